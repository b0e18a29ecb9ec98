#include "nanotorus/control.hpp"

#include <cmath>
#include <string>

#include "nanotorus/format.hpp"

namespace nanotorus {

namespace {

Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Eigen::Matrix2cd pauli_y() {
    Eigen::Matrix2cd m;
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

void require_rabi(double rabi) {
    if (!(rabi > 0.0) || !std::isfinite(rabi)) {
        throw InvalidArgument("gate synthesis: Rabi frequency must be > 0");
    }
}

}  // namespace

GateSpec GateSpec::identity() { return {}; }

GateSpec GateSpec::hadamard() {
    GateSpec g;
    g.kind = GateKind::hadamard;
    g.ideal = (pauli_x() + pauli_z()) / std::sqrt(2.0);
    return g;
}

GateSpec GateSpec::phase(double eta) {
    if (!std::isfinite(eta)) throw InvalidArgument("phase gate: eta must be finite");
    GateSpec g;
    g.kind = GateKind::phase;
    g.eta = eta;
    g.ideal = Eigen::Matrix2cd::Identity();
    g.ideal(1, 1) = std::polar(1.0, eta);
    return g;
}

GateSpec GateSpec::rotation(const Eigen::Vector3d& axis, double angle) {
    const double len = axis.norm();
    if (!(len > 0.0) || !std::isfinite(len) || !std::isfinite(angle)) {
        throw InvalidArgument("rotation gate: axis must be nonzero and angle finite");
    }
    GateSpec g;
    g.kind = GateKind::rotation;
    g.axis = axis / len;
    g.angle = angle;
    const Eigen::Matrix2cd n_sigma =
        g.axis.x() * pauli_x() + g.axis.y() * pauli_y() + g.axis.z() * pauli_z();
    g.ideal = canonicalize_phase(std::cos(0.5 * angle) * Eigen::Matrix2cd::Identity() -
                                 Complex(0.0, std::sin(0.5 * angle)) * n_sigma);
    return g;
}

std::string GateSpec::name() const {
    switch (kind) {
        case GateKind::identity: return "identity";
        case GateKind::hadamard: return "hadamard";
        case GateKind::phase: return "phase:" + format_double(eta);
        case GateKind::rotation:
            return "rotation:" + format_double(axis.x()) + "," + format_double(axis.y()) + "," +
                   format_double(axis.z()) + ":" + format_double(angle);
    }
    return "unknown";
}

Eigen::Matrix2cd canonicalize_phase(const Eigen::Matrix2cd& u) {
    for (int k = 0; k < 4; ++k) {
        const Complex z = u.data()[k];
        if (std::abs(z) > 1e-12) return u * (std::abs(z) / z);
    }
    return u;
}

double gate_fidelity(const Eigen::Matrix2cd& ideal, const Eigen::Matrix2cd& actual) {
    return 0.5 * std::abs((ideal.adjoint() * actual).trace());
}

double PulseSequence::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

void PulseSequence::validate() const {
    for (const auto& s : segments) s.validate();
    if (!std::isfinite(total_duration())) throw InvalidArgument("sequence: infinite duration");
}

PulseSequence prepare_state(double theta, double eta, double rabi) {
    if (!(theta > 0.0 && theta <= kPi)) throw InvalidArgument("prepare_state: theta must lie in (0, pi]");
    if (!(eta >= 0.0 && eta <= kPi)) throw InvalidArgument("prepare_state: eta must lie in [0, pi]");
    require_rabi(rabi);
    // cos(Omega t / 2) = sin(theta / 2) and -(phi + pi/2) = eta.
    PulseSpec p;
    p.rabi = rabi;
    p.duration = 2.0 / rabi * std::acos(std::min(1.0, std::sin(0.5 * theta)));
    p.phase = wrap_angle(-eta - 0.5 * kPi);
    return {{p}};
}

PulseSequence prepare_state(double theta, double eta, const QubitParameters& qubit, double E0) {
    return prepare_state(theta, eta, qubit.rabi_frequency(E0));
}

PulseSequence hadamard_sequence(double rabi) {
    require_rabi(rabi);
    PulseSpec p;
    p.rabi = rabi;
    p.detuning = rabi;
    p.phase = kPi;
    p.duration = kPi / (std::sqrt(2.0) * rabi);
    return {{p}};
}

PulseSequence hadamard_sequence(const QubitParameters& qubit, double E0) {
    return hadamard_sequence(qubit.rabi_frequency(E0));
}

PulseSequence phase_gate_sequence(double eta, const PhaseGateOptions& options) {
    if (!(eta >= 0.0 && eta < kTwoPi)) throw InvalidArgument("phase gate: eta must lie in [0, 2 pi)");
    PulseSpec p;
    if (options.realization == PhaseRealization::virtual_frame) {
        p.frame_phase = eta;
        return {{p}};
    }
    if (!(options.wait_detuning != 0.0) || !std::isfinite(options.wait_detuning)) {
        throw InvalidArgument("phase gate: detuned wait needs a nonzero finite detuning");
    }
    // Free evolution multiplies |1> by e^{-i Delta t}.
    p.detuning = options.wait_detuning;
    const double target = options.wait_detuning > 0.0 ? wrap_angle(-eta) : eta;
    p.duration = target / std::abs(options.wait_detuning);
    return {{p}};
}

PulseSequence rotation_sequence(const Eigen::Vector3d& axis, double angle, double rabi) {
    const auto gate = GateSpec::rotation(axis, angle);
    const Eigen::Vector3d n = gate.axis;
    const double transverse = std::hypot(n.x(), n.y());
    if (transverse < 1e-12) {
        // exp(-i angle sigma_z / 2) ~ diag(1, e^{i angle n_z}).
        PulseSpec p;
        p.frame_phase = wrap_angle(angle * n.z());
        return {{p}};
    }
    require_rabi(rabi);
    // H_eff = Delta/2 + (1/2)(Omega cos(phi) sx - Omega sin(phi) sy - Delta sz).
    const double w = rabi / transverse;
    PulseSpec p;
    p.rabi = rabi;
    p.detuning = -n.z() * w;
    p.phase = wrap_angle(std::atan2(-n.y(), n.x()));
    // Angles are only meaningful modulo 2 pi up to global phase.
    p.duration = wrap_angle(angle) / w;
    return {{p}};
}

PulseSequence synthesize(const GateSpec& gate, double rabi, const PhaseGateOptions& options) {
    switch (gate.kind) {
        case GateKind::identity: return {};
        case GateKind::hadamard: return hadamard_sequence(rabi);
        case GateKind::phase: return phase_gate_sequence(wrap_angle(gate.eta), options);
        case GateKind::rotation: return rotation_sequence(gate.axis, gate.angle, rabi);
    }
    return {};
}

std::string_view to_string(EvolutionMode mode) {
    return mode == EvolutionMode::rwa ? "rwa" : "labframe";
}

EvolutionMode evolution_mode_from_string(std::string_view name) {
    if (name == "rwa") return EvolutionMode::rwa;
    if (name == "labframe") return EvolutionMode::labframe;
    throw InvalidArgument("unknown evolution mode '" + std::string(name) + "'");
}

Eigen::Matrix2cd gate_unitary(const PulseSequence& seq) {
    seq.validate();
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
    for (const auto& s : seq.segments) u = rwa_unitary(s) * u;
    return u;
}

Eigen::Matrix2cd gate_unitary(const PulseSequence& seq, EvolutionMode mode, double omega,
                              double tol) {
    if (mode == EvolutionMode::rwa) return gate_unitary(seq);
    seq.validate();
    if (!(omega > 0.0)) throw InvalidArgument("gate_unitary: qubit frequency must be > 0");

    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
    for (const auto& s : seq.segments) {
        Eigen::Matrix2cd step = Eigen::Matrix2cd::Identity();
        if (s.duration > 0.0) {
            const double omega_rf = omega - s.detuning;
            const auto ladder = two_level_ladder(omega, s.rabi, omega_rf, s.phase);
            for (int col = 0; col < 2; ++col) {
                const auto r = integrate_ladder(QuantumState::basis(2, col), ladder, s.duration,
                                                {.tolerance = tol, .observer = {}});
                step.col(col) = r.state.amplitudes();
            }
            step = rotating_frame(omega_rf, s.duration) * step;
        }
        step.row(1) *= std::polar(1.0, s.frame_phase);
        u = step * u;
    }
    return u;
}

Eigen::Matrix2cd gate_unitary(const PulseSequence& seq, const QubitParameters& qubit,
                              EvolutionMode mode, double tol) {
    return gate_unitary(seq, mode, qubit.omega, tol);
}

}  // namespace nanotorus
