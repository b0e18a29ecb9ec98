#include "nanotorus/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "nanotorus/format.hpp"

namespace nanotorus {

namespace odeint = boost::numeric::odeint;

QuantumState::QuantumState(Eigen::VectorXcd amplitudes, double norm_tolerance)
    : amplitudes_(std::move(amplitudes)) {
    if (dim() != 2 && dim() != 3) {
        throw InvalidArgument("quantum state: dimension must be 2 or 3, got " +
                              std::to_string(dim()));
    }
    if (!amplitudes_.allFinite()) throw InvalidArgument("quantum state: non-finite amplitude");
    const double defect = std::abs(amplitudes_.squaredNorm() - 1.0);
    if (defect > norm_tolerance) {
        throw InvalidArgument("quantum state: norm defect " + format_double(defect) +
                              " exceeds " + format_double(norm_tolerance));
    }
}

QuantumState::QuantumState(Eigen::VectorXcd amplitudes, NoCheck)
    : amplitudes_(std::move(amplitudes)) {}

QuantumState QuantumState::unchecked(Eigen::VectorXcd amplitudes) {
    return QuantumState(std::move(amplitudes), NoCheck{});
}

QuantumState QuantumState::basis(int dim, int index) {
    if (index < 0 || index >= dim) throw InvalidArgument("quantum state: basis index out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(index) = 1.0;
    return QuantumState(std::move(v));
}

QuantumState QuantumState::from_bloch_angles(double polar, double azimuth) {
    Eigen::VectorXcd v(2);
    v << std::cos(0.5 * polar), std::polar(std::sin(0.5 * polar), azimuth);
    return QuantumState(std::move(v));
}

void PulseSpec::validate() const {
    if (!std::isfinite(rabi) || !std::isfinite(detuning) || !std::isfinite(phase) ||
        !std::isfinite(frame_phase) || !std::isfinite(duration)) {
        throw InvalidArgument("pulse: non-finite parameter");
    }
    if (rabi < 0.0) throw InvalidArgument("pulse: Rabi frequency must be >= 0");
    if (duration < 0.0) throw InvalidArgument("pulse: duration must be >= 0");
}

Eigen::Matrix2cd sigma_plus() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(1, 0) = 1.0;
    return m;
}

Eigen::Matrix2cd sigma_minus() { return sigma_plus().transpose(); }

Eigen::Matrix2cd rwa_hamiltonian(const PulseSpec& p) {
    const Complex g = std::polar(0.5 * p.rabi, p.phase);
    Eigen::Matrix2cd h;
    h << 0.0, g, std::conj(g), p.detuning;
    return h;
}

Eigen::Matrix2cd rwa_unitary(const PulseSpec& p) {
    p.validate();
    // H = (Delta/2) 1 + K with K^2 = lambda^2 1.
    const double t = p.duration;
    const double lambda = 0.5 * std::hypot(p.detuning, p.rabi);
    const double x = lambda * t;
    const double sin_over_lambda = x == 0.0 ? t : std::sin(x) / lambda;

    Eigen::Matrix2cd k = rwa_hamiltonian(p);
    k(0, 0) -= 0.5 * p.detuning;
    k(1, 1) -= 0.5 * p.detuning;

    const Complex i(0.0, 1.0);
    Eigen::Matrix2cd u = std::cos(x) * Eigen::Matrix2cd::Identity() - i * sin_over_lambda * k;
    u *= std::polar(1.0, -0.5 * p.detuning * t);
    u.row(1) *= std::polar(1.0, p.frame_phase);
    return u;
}

QuantumState evolve_rwa(const QuantumState& state, const PulseSpec& pulse) {
    if (state.dim() != 2) throw InvalidArgument("evolve_rwa: two-level state required");
    return QuantumState::unchecked(rwa_unitary(pulse) * state.amplitudes());
}

Eigen::Matrix2cd rotating_frame(double omega_rf, double t) {
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Identity();
    r(1, 1) = std::polar(1.0, omega_rf * t);
    return r;
}

void LadderModel::validate() const {
    const auto n = static_cast<Eigen::Index>(levels.size());
    if (n < 2) throw InvalidArgument("ladder: at least two levels required");
    if (coupling.rows() != n || coupling.cols() != n) {
        throw InvalidArgument("ladder: coupling must be square and match the level count");
    }
    const double scale = std::max(1.0, coupling.cwiseAbs().maxCoeff());
    if ((coupling - coupling.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("ladder: coupling must be Hermitian");
    }
    for (double e : levels) {
        if (!std::isfinite(e)) throw InvalidArgument("ladder: non-finite level");
    }
    if (!coupling.allFinite() || !std::isfinite(omega_rf) || !std::isfinite(phase)) {
        throw InvalidArgument("ladder: non-finite drive");
    }
}

LadderModel two_level_ladder(double omega, double rabi, double omega_rf, double phase) {
    LadderModel m;
    m.levels = {0.0, omega};
    m.coupling = Eigen::MatrixXcd::Zero(2, 2);
    m.coupling(0, 1) = m.coupling(1, 0) = rabi;
    m.omega_rf = omega_rf;
    m.phase = phase;
    return m;
}

LadderModel three_level_ladder(const QubitParameters& qubit, double E0, double omega_rf,
                               double phase) {
    // Position operator of the oscillator, truncated only after cubing so the
    // 3x3 block of X^3 carries the exact oscillator matrix elements.
    constexpr int kWork = 6;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(kWork, kWork);
    for (int n = 1; n < kWork; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(double(n));
    const Eigen::MatrixXd x3 = x * x * x;

    const double s = qubit.zero_point_spread;
    const double scale =
        PhysicalConstants::electron_charge * E0 * qubit.geom.r_minor() / PhysicalConstants::hbar;
    const Eigen::MatrixXd drive =
        scale * (s * x.topLeftCorner(3, 3) - (s * s * s / 6.0) * x3.topLeftCorner(3, 3));

    LadderModel m;
    m.levels = {0.0, qubit.omega, 2.0 * qubit.omega + 12.0 * qubit.alpha / PhysicalConstants::hbar};
    m.coupling = drive.cast<Complex>();
    m.omega_rf = omega_rf;
    m.phase = phase;
    return m;
}

IntegrationResult integrate_ladder(const QuantumState& state, const LadderModel& model, double t,
                                   const IntegrationOptions& options) {
    model.validate();
    if (state.dim() != model.dim()) {
        throw InvalidArgument("integrate: state and ladder dimensions differ");
    }
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("integrate: t must be >= 0");
    if (!(options.tolerance >= 1e-12 && options.tolerance <= 1e-6)) {
        throw InvalidArgument("integrate: tolerance must lie in [1e-12, 1e-6]");
    }

    const int n = model.dim();
    const auto lab_amplitudes = [&](const std::vector<Complex>& c, double time) {
        Eigen::VectorXcd psi(n);
        for (int j = 0; j < n; ++j) psi(j) = std::polar(1.0, -model.levels[j] * time) * c[j];
        return psi;
    };
    std::vector<Complex> c(state.amplitudes().data(), state.amplitudes().data() + n);
    if (t == 0.0) return {QuantumState::unchecked(lab_amplitudes(c, 0.0)), 0, 0.0};

    // Dimensionless time tau = rate * t keeps step sizes O(1).
    double rate = std::abs(model.omega_rf);
    for (double e : model.levels) rate = std::max(rate, std::abs(e));
    rate = std::max(rate, model.coupling.cwiseAbs().maxCoeff());
    if (rate == 0.0) rate = 1.0 / t;

    // Interaction picture of the level energies; the integrand then only
    // carries the drive, which keeps the fast diagonal phases out of the stepper.
    const auto system = [&](const std::vector<Complex>& x, std::vector<Complex>& dxdtau,
                            double tau) {
        const double time = tau / rate;
        const double f = std::cos(model.omega_rf * time + model.phase) / rate;
        for (int j = 0; j < n; ++j) {
            Complex acc = 0.0;
            for (int k = 0; k < n; ++k) {
                const Complex mjk = model.coupling(j, k);
                if (mjk == 0.0) continue;
                acc += mjk * std::polar(1.0, (model.levels[j] - model.levels[k]) * time) * x[k];
            }
            dxdtau[j] = Complex(0.0, -f) * acc;
        }
    };

    using State = std::vector<Complex>;
    auto stepper = odeint::make_controlled(options.tolerance, options.tolerance, 0.5,
                                           odeint::runge_kutta_dopri5<State>());
    double reached = 0.0;
    std::size_t steps = 0;
    const auto observer = [&](const State& x, double tau) {
        reached = tau / rate;
        if (options.observer) options.observer(reached, lab_amplitudes(x, reached));
    };
    try {
        steps = odeint::integrate_adaptive(stepper, system, c, 0.0, rate * t, 1e-2, observer);
    } catch (const odeint::odeint_error& e) {
        throw IntegrationError(std::string("integrate: step size control failed at t=") +
                                   format_double(reached) + " s: " + e.what(),
                               reached);
    }

    Eigen::VectorXcd psi = lab_amplitudes(c, t);
    const double drift = std::abs(psi.norm() - state.norm());
    return {QuantumState::unchecked(std::move(psi)), steps, drift};
}

QuantumState evolve_labframe(const QuantumState& state, const QubitParameters& qubit,
                             const FieldConfig& field, double t, double tol) {
    const auto model = two_level_ladder(qubit.omega, qubit.rabi_frequency(field.E0()),
                                        field.omega_rf(), field.phi());
    return integrate_ladder(state, model, t, {.tolerance = tol, .observer = {}}).state;
}

double leakage_probe(const LadderModel& model, double t, double tol) {
    if (model.dim() != 3) throw InvalidArgument("leakage probe: three-level ladder required");
    double peak = 0.0;
    IntegrationOptions options{.tolerance = tol,
                               .observer = [&peak](double, const Eigen::VectorXcd& psi) {
                                   peak = std::max(peak, std::norm(psi(2)));
                               }};
    integrate_ladder(QuantumState::basis(3, 0), model, t, options);
    return peak;
}

double leakage_probe(const QubitParameters& qubit, const FieldConfig& field, double t,
                     double tol) {
    return leakage_probe(three_level_ladder(qubit, field.E0(), field.omega_rf(), field.phi()), t,
                         tol);
}

BlochPoint bloch(const QuantumState& state) {
    if (state.dim() != 2) throw InvalidArgument("bloch: two-level state required");
    const Complex coherence = std::conj(state[0]) * state[1];
    return {2.0 * coherence.real(), 2.0 * coherence.imag(),
            state.probability(0) - state.probability(1)};
}

std::vector<TrajectorySample> trajectory(const QuantumState& state, const PulseSpec& pulse,
                                         int n_samples) {
    if (n_samples < 2) throw InvalidArgument("trajectory: need at least two samples");
    pulse.validate();
    std::vector<TrajectorySample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        PulseSpec partial = pulse;
        partial.duration = pulse.duration * k / (n_samples - 1);
        // The frame update belongs to the end of the segment.
        if (k != n_samples - 1) partial.frame_phase = 0.0;
        out.push_back({partial.duration, evolve_rwa(state, partial)});
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples) {
    const bool three = !samples.empty() && samples.front().state.dim() == 3;
    os << "t,x,y,z,p0,p1" << (three ? ",p2" : "") << '\n';
    for (const auto& s : samples) {
        BlochPoint b;
        if (s.state.dim() == 2) {
            b = bloch(s.state);
        } else {
            // Bloch view of the qubit block, unnormalized by leakage.
            const Complex coherence = std::conj(s.state[0]) * s.state[1];
            b = {2.0 * coherence.real(), 2.0 * coherence.imag(),
                 s.state.probability(0) - s.state.probability(1)};
        }
        os << format_double(s.t) << ',' << format_double(b.x) << ',' << format_double(b.y) << ','
           << format_double(b.z) << ',' << format_double(s.state.probability(0)) << ','
           << format_double(s.state.probability(1));
        if (three) os << ',' << format_double(s.state.probability(2));
        os << '\n';
    }
}

}  // namespace nanotorus
