#include "nanotorus/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nanotorus/format.hpp"
#include "nanotorus/parallel.hpp"

namespace nanotorus {

void ErrorModel::validate() const {
    if (!std::isfinite(delta_B_rel) || !std::isfinite(delta_E_rel)) {
        throw InvalidArgument("error model: relative errors must be finite");
    }
    if (!(delta_B_rel > -1.0) || !(delta_E_rel > -1.0)) {
        throw InvalidArgument("error model: relative errors must exceed -1");
    }
    if (!(B0 > 0.0) || !(E0 > 0.0) || !std::isfinite(B0) || !std::isfinite(E0)) {
        throw InvalidArgument("error model: reference fields B0 and E0 must be positive");
    }
}

QubitModel qubit_model(const TorusGeometry& geom, CoefficientSource source) {
    return [geom, source](double B) { return qubit_at(geom, B, source); };
}

PerturbedPulse perturbed_pulse(const PulseSequence& calibrated, const QubitModel& qubit_fn,
                               const ErrorModel& model) {
    model.validate();
    calibrated.validate();
    const auto reference = qubit_fn(model.B0);
    PerturbedPulse out;
    out.B_perturbed = model.B0 * (1.0 + model.delta_B_rel);
    if (model.delta_B_rel == 0.0) {
        out.omega_perturbed = reference.omega;
    } else {
        const auto shifted = qubit_fn(out.B_perturbed);
        out.omega_perturbed = shifted.omega;
        out.detuning_error = shifted.omega - reference.omega;
        out.rabi_scale = shifted.mu / reference.mu;
    }
    out.rabi_scale *= 1.0 + model.delta_E_rel;

    out.sequence = calibrated;
    for (auto& s : out.sequence.segments) {
        if (s.duration == 0.0) continue;
        s.rabi *= out.rabi_scale;
        s.detuning += out.detuning_error;
    }
    return out;
}

double infidelity(const QuantumState& a, const QuantumState& b) {
    if (a.dim() != b.dim()) throw InvalidArgument("infidelity: dimension mismatch");
    const double overlap = std::norm(a.amplitudes().dot(b.amplitudes()));
    return std::clamp(1.0 - overlap, 0.0, 1.0);
}

double HaarSampler::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

QuantumState HaarSampler::next() {
    const double z = 2.0 * uniform() - 1.0;
    const double azimuth = kTwoPi * uniform();
    return QuantumState::from_bloch_angles(std::acos(z), azimuth);
}

double pairwise_sum(const std::vector<double>& values) {
    const auto sum = [&values](auto&& self, std::size_t lo, std::size_t hi) -> double {
        if (hi - lo <= 8) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += values[i];
            return s;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        return self(self, lo, mid) + self(self, mid, hi);
    };
    return sum(sum, 0, values.size());
}

InfidelityReport average_infidelity(const Eigen::Matrix2cd& ideal, const Eigen::Matrix2cd& actual,
                                    int n_samples, std::uint64_t seed, bool keep_samples) {
    if (n_samples < 1) throw InvalidArgument("infidelity average: n_samples must be >= 1");
    const auto n = static_cast<std::size_t>(n_samples);

    // States are drawn serially so sample i does not depend on the worker count.
    HaarSampler sampler(seed);
    std::vector<Eigen::Vector2cd> inputs;
    inputs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) inputs.emplace_back(sampler.next().amplitudes());

    constexpr std::size_t kChunk = 1024;
    std::vector<double> values(n);
    parallel_for((n + kChunk - 1) / kChunk, [&](std::size_t chunk) {
        const std::size_t end = std::min(n, (chunk + 1) * kChunk);
        for (std::size_t i = chunk * kChunk; i < end; ++i) {
            const Eigen::Vector2cd a = ideal * inputs[i];
            const Eigen::Vector2cd b = actual * inputs[i];
            values[i] = std::clamp(1.0 - std::norm(a.dot(b)), 0.0, 1.0);
        }
    });

    InfidelityReport report;
    report.n_samples = n_samples;
    report.seed = seed;
    report.mean_infidelity = pairwise_sum(values) / static_cast<double>(n);
    report.max_infidelity = *std::max_element(values.begin(), values.end());
    // Rounding in the sum can push the mean a few ulps past the max.
    report.mean_infidelity = std::min(report.mean_infidelity, report.max_infidelity);
    if (keep_samples) report.samples = std::move(values);
    return report;
}

InfidelityReport average_gate_infidelity(const GateSpec& gate, const QubitModel& qubit_fn,
                                         const ErrorModel& model, int n_samples,
                                         std::uint64_t seed, const StudyOptions& options) {
    model.validate();
    const auto reference = qubit_fn(model.B0);
    const auto calibrated =
        synthesize(gate, reference.rabi_frequency(model.E0), options.phase_options);
    const auto perturbed = perturbed_pulse(calibrated, qubit_fn, model);

    const Eigen::Matrix2cd u_eff =
        gate_unitary(calibrated, options.mode, reference.omega, options.tolerance);
    const Eigen::Matrix2cd u_per =
        gate_unitary(perturbed.sequence, options.mode, perturbed.omega_perturbed, options.tolerance);

    auto report = average_infidelity(u_eff, u_per, n_samples, seed, options.keep_samples);
    report.detuning_error = perturbed.detuning_error;
    report.rabi_scale = perturbed.rabi_scale;
    if (options.window) {
        report.window_warning = !options.window->contains(model.B0) ||
                                !options.window->contains(perturbed.B_perturbed);
    }
    return report;
}

MitigationTable mitigation_sweep(const GateSpec& gate, const QubitModel& qubit_fn,
                                 const ErrorModel& base, SweepParameter parameter,
                                 const std::vector<double>& grid, int n_samples,
                                 std::uint64_t seed, const StudyOptions& options) {
    if (grid.empty()) throw InvalidArgument("mitigation sweep: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw InvalidArgument("mitigation sweep: grid must be strictly increasing");
        }
    }
    MitigationTable table;
    table.parameter = parameter;
    for (double value : grid) {
        ErrorModel model = base;
        (parameter == SweepParameter::E0 ? model.E0 : model.B0) = value;
        table.rows.push_back(
            {value, average_gate_infidelity(gate, qubit_fn, model, n_samples, seed, options)});
    }
    const auto best = std::min_element(
        table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
            return a.report.mean_infidelity < b.report.mean_infidelity;
        });
    table.argmin = static_cast<std::size_t>(best - table.rows.begin());
    return table;
}

void write_infidelity_csv(std::ostream& os, const std::vector<double>& deltas,
                          const std::vector<InfidelityReport>& reports) {
    if (deltas.size() != reports.size()) {
        throw InvalidArgument("infidelity csv: deltas and reports differ in length");
    }
    os << "delta,mean_infidelity,max_infidelity\n";
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        os << format_double(deltas[i]) << ',' << format_double(reports[i].mean_infidelity) << ','
           << format_double(reports[i].max_infidelity) << '\n';
    }
}

void write_mitigation_csv(std::ostream& os, const MitigationTable& table) {
    os << (table.parameter == SweepParameter::E0 ? "E0" : "B0")
       << ",mean_infidelity,max_infidelity,window_warning\n";
    for (const auto& row : table.rows) {
        os << format_double(row.value) << ',' << format_double(row.report.mean_infidelity) << ','
           << format_double(row.report.max_infidelity) << ',' << (row.report.window_warning ? 1 : 0)
           << '\n';
    }
}

}  // namespace nanotorus
