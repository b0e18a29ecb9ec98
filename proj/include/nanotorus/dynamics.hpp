#pragma once

// Qubit time evolution: closed-form RWA rotations, numerical lab-frame
// integration of the driven ladder, and Bloch-sphere views.

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <vector>

#include "nanotorus/model.hpp"
#include "nanotorus/reduction.hpp"

namespace nanotorus {

using Complex = std::complex<double>;

/// Pure state on the {|0>, |1>} or {|0>, |1>, |2>} basis.
class QuantumState {
public:
    /// Rejects dimensions other than 2 or 3 and norms off by more than
    /// `norm_tolerance`.
    explicit QuantumState(Eigen::VectorXcd amplitudes, double norm_tolerance = 1e-10);

    static QuantumState basis(int dim, int index);
    /// cos(polar/2)|0> + e^{i azimuth} sin(polar/2)|1>.
    static QuantumState from_bloch_angles(double polar, double azimuth);
    /// Wraps integrator output without the norm check.
    static QuantumState unchecked(Eigen::VectorXcd amplitudes);

    int dim() const { return static_cast<int>(amplitudes_.size()); }
    const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
    Complex operator[](int i) const { return amplitudes_(i); }
    double probability(int i) const { return std::norm(amplitudes_(i)); }
    double norm() const { return amplitudes_.norm(); }

private:
    struct NoCheck {};
    QuantumState(Eigen::VectorXcd amplitudes, NoCheck);
    Eigen::VectorXcd amplitudes_;
};

/// One drive segment in the frame rotating at omega_rf = omega - detuning.
/// frame_phase applies diag(1, e^{i frame_phase}) after the segment; it is
/// how the virtual phase gate is realized.
struct PulseSpec {
    double rabi = 0.0;       // Omega, rad/s
    double detuning = 0.0;   // Delta = omega - omega_rf, rad/s
    double phase = 0.0;      // phi, rad
    double duration = 0.0;   // s
    double frame_phase = 0.0;

    void validate() const;
};

struct BlochPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Two-level ladder operators with |0> as the ground state: sigma_plus
/// raises |0> to |1>.
Eigen::Matrix2cd sigma_plus();
Eigen::Matrix2cd sigma_minus();

/// H_eff / hbar = Delta s+ s- + (Omega/2)(e^{i phi} s- + e^{-i phi} s+).
Eigen::Matrix2cd rwa_hamiltonian(const PulseSpec& pulse);
/// exp(-i H_eff t / hbar) followed by the frame phase.
Eigen::Matrix2cd rwa_unitary(const PulseSpec& pulse);
QuantumState evolve_rwa(const QuantumState& state, const PulseSpec& pulse);

/// Frame change R(t) = exp(i omega_rf t s+ s-) from the lab to the rotating frame.
Eigen::Matrix2cd rotating_frame(double omega_rf, double t);

/// Raised when the adaptive integrator cannot meet the tolerance.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time_reached)
        : Error(what), time_reached_(time_reached) {}
    double time_reached() const { return time_reached_; }

private:
    double time_reached_;
};

/// H(t) / hbar = diag(levels) + cos(omega_rf t + phase) * coupling, all in rad/s.
struct LadderModel {
    std::vector<double> levels;
    Eigen::MatrixXcd coupling;
    double omega_rf = 0.0;
    double phase = 0.0;

    int dim() const { return static_cast<int>(levels.size()); }
    void validate() const;
};

/// Two-level drive  hbar omega s+s- + hbar Omega cos(omega_rf t + phi)(s+ + s-).
LadderModel two_level_ladder(double omega, double rabi, double omega_rf, double phase);

/// Levels 0, hbar omega, 2 hbar omega + 12 alpha; drive e E0 r [s X - s^3/6 X^3]
/// with X = a + a^dagger truncated to three levels.
LadderModel three_level_ladder(const QubitParameters& qubit, double E0, double omega_rf,
                               double phase);

struct IntegrationOptions {
    double tolerance = 1e-9;  // absolute and relative local error, in [1e-12, 1e-6]
    /// Called after every accepted step with (t, lab-frame amplitudes).
    std::function<void(double, const Eigen::VectorXcd&)> observer;
};

struct IntegrationResult {
    QuantumState state;
    std::size_t steps = 0;
    double norm_drift = 0.0;
};

/// Lab-frame Schroedinger evolution over [0, t] by an embedded Dormand-Prince
/// pair in the interaction picture of the level energies.
IntegrationResult integrate_ladder(const QuantumState& state, const LadderModel& model, double t,
                                   const IntegrationOptions& options = {});

/// Lab-frame evolution of the driven qubit with amplitude field.E0, drive
/// frequency field.omega_rf and phase field.phi.
QuantumState evolve_labframe(const QuantumState& state, const QubitParameters& qubit,
                             const FieldConfig& field, double t, double tol = 1e-9);

/// Max over [0, t] of |<2|psi>|^2 starting from |0> in the three-level ladder.
double leakage_probe(const LadderModel& model, double t, double tol = 1e-9);
double leakage_probe(const QubitParameters& qubit, const FieldConfig& field, double t,
                     double tol = 1e-9);

BlochPoint bloch(const QuantumState& state);

/// States at n_samples equally spaced times over the pulse, endpoints included.
struct TrajectorySample {
    double t = 0.0;
    QuantumState state;
};
std::vector<TrajectorySample> trajectory(const QuantumState& state, const PulseSpec& pulse,
                                         int n_samples);

/// Columns t,x,y,z,p0,p1 (and p2 for three-level states); t in seconds.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples);

}  // namespace nanotorus
