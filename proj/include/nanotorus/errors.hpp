#pragma once

// Systematic field errors: perturbed pulses, Bures infidelity averaged over
// Haar-random inputs, and mitigation sweeps over E0 or B0.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "nanotorus/control.hpp"
#include "nanotorus/spectral.hpp"

namespace nanotorus {

struct ErrorModel {
    double delta_B_rel = 0.0;  // dB / B0
    double delta_E_rel = 0.0;  // dE / E0
    double B0 = 0.45;          // T
    double E0 = 100.0;         // V/m

    void validate() const;
};

/// Qubit data as a function of the static field B.
using QubitModel = std::function<QubitParameters(double B)>;

QubitModel qubit_model(const TorusGeometry& geom,
                       CoefficientSource source = CoefficientSource::numerical_taylor);

struct PerturbedPulse {
    PulseSequence sequence;
    double B_perturbed = 0.0;
    double omega_perturbed = 0.0;  // rad/s
    double detuning_error = 0.0;   // omega(B0 + dB) - omega(B0), rad/s
    double rabi_scale = 1.0;       // Omega' / Omega
};

/// Shifts the Hamiltonian under a calibrated sequence while durations,
/// phases, frame updates and omega_rf stay at their calibration values.
PerturbedPulse perturbed_pulse(const PulseSequence& calibrated, const QubitModel& qubit_fn,
                               const ErrorModel& model);

/// Bures infidelity 1 - |<a|b>|^2.
double infidelity(const QuantumState& a, const QuantumState& b);

/// Haar-uniform pure qubit states: z uniform in [-1, 1], azimuth uniform.
class HaarSampler {
public:
    explicit HaarSampler(std::uint64_t seed) : engine_(seed) {}
    QuantumState next();

private:
    double uniform();
    std::mt19937_64 engine_;
};

/// Order-fixed pairwise summation.
double pairwise_sum(const std::vector<double>& values);

struct StudyOptions {
    EvolutionMode mode = EvolutionMode::rwa;
    double tolerance = 1e-9;  // lab-frame only
    PhaseGateOptions phase_options;
    bool keep_samples = false;
    /// When set, a perturbed B outside it raises window_warning.
    std::optional<InitializationWindow> window;
};

struct InfidelityReport {
    double mean_infidelity = 0.0;
    double max_infidelity = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
    std::vector<double> samples;
    bool window_warning = false;
    double detuning_error = 0.0;
    double rabi_scale = 1.0;
};

/// Mean and max of 1 - |<U_eff psi|U_per psi>|^2 over n_samples Haar states.
InfidelityReport average_gate_infidelity(const GateSpec& gate, const QubitModel& qubit_fn,
                                         const ErrorModel& model, int n_samples,
                                         std::uint64_t seed, const StudyOptions& options = {});

/// Same average for an explicit pair of unitaries.
InfidelityReport average_infidelity(const Eigen::Matrix2cd& ideal, const Eigen::Matrix2cd& actual,
                                    int n_samples, std::uint64_t seed, bool keep_samples = false);

enum class SweepParameter { E0, B0 };

struct MitigationRow {
    double value = 0.0;
    InfidelityReport report;
};

struct MitigationTable {
    SweepParameter parameter = SweepParameter::E0;
    std::vector<MitigationRow> rows;
    std::size_t argmin = 0;
};

/// Mean infidelity at fixed relative errors while E0 or B0 steps over a
/// strictly monotone grid. Every row reuses the same seed.
MitigationTable mitigation_sweep(const GateSpec& gate, const QubitModel& qubit_fn,
                                 const ErrorModel& base, SweepParameter parameter,
                                 const std::vector<double>& grid, int n_samples,
                                 std::uint64_t seed, const StudyOptions& options = {});

/// Columns delta,mean_infidelity,max_infidelity.
void write_infidelity_csv(std::ostream& os, const std::vector<double>& deltas,
                          const std::vector<InfidelityReport>& reports);

/// Columns E0 (or B0),mean_infidelity,max_infidelity,window_warning.
void write_mitigation_csv(std::ostream& os, const MitigationTable& table);

}  // namespace nanotorus
