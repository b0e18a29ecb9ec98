#pragma once

// Gate synthesis: state preparation, Hadamard and phase gates expressed as
// pulse sequences, and their composed unitaries.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nanotorus/dynamics.hpp"

namespace nanotorus {

enum class GateKind { identity, hadamard, phase, rotation };

struct GateSpec {
    GateKind kind = GateKind::identity;
    double eta = 0.0;                          // phase gate angle
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // rotation axis, unit length
    double angle = 0.0;                        // rotation angle
    /// Ideal unitary with the first nonzero entry real and positive.
    Eigen::Matrix2cd ideal = Eigen::Matrix2cd::Identity();

    static GateSpec identity();
    static GateSpec hadamard();
    /// diag(1, e^{i eta}).
    static GateSpec phase(double eta);
    /// exp(-i angle axis.sigma / 2).
    static GateSpec rotation(const Eigen::Vector3d& axis, double angle);

    std::string name() const;
};

/// Global phase fixed so that the first nonzero entry (column-major) is
/// real and positive.
Eigen::Matrix2cd canonicalize_phase(const Eigen::Matrix2cd& u);

/// Phase-insensitive gate fidelity |Tr(G^dagger U)| / 2.
double gate_fidelity(const Eigen::Matrix2cd& ideal, const Eigen::Matrix2cd& actual);

struct PulseSequence {
    std::vector<PulseSpec> segments;

    double total_duration() const;
    void validate() const;
};

/// Resonant pulse taking |0> to sin(theta/2)|0> + e^{i eta} cos(theta/2)|1>
/// up to global phase. theta in (0, pi], eta in [0, pi].
PulseSequence prepare_state(double theta, double eta, double rabi);
PulseSequence prepare_state(double theta, double eta, const QubitParameters& qubit, double E0);

/// Single tilted-axis pulse: Delta = Omega, phi = pi, t = pi / (sqrt(2) Omega).
PulseSequence hadamard_sequence(double rabi);
PulseSequence hadamard_sequence(const QubitParameters& qubit, double E0);

enum class PhaseRealization { virtual_frame, detuned_wait };

struct PhaseGateOptions {
    PhaseRealization realization = PhaseRealization::virtual_frame;
    /// Free-evolution detuning for the detuned wait, rad/s.
    double wait_detuning = 0.0;
};

/// R_eta, eta in [0, 2 pi). The virtual form is a zero-length frame update;
/// the detuned wait idles with Omega = 0 until free evolution at the given
/// detuning has accumulated the relative phase eta.
PulseSequence phase_gate_sequence(double eta, const PhaseGateOptions& options = {});

/// Single pulse realizing exp(-i angle n.sigma / 2) up to global phase. An
/// axis along z becomes a frame update.
PulseSequence rotation_sequence(const Eigen::Vector3d& axis, double angle, double rabi);

PulseSequence synthesize(const GateSpec& gate, double rabi, const PhaseGateOptions& options = {});

enum class EvolutionMode { rwa, labframe };

std::string_view to_string(EvolutionMode mode);
EvolutionMode evolution_mode_from_string(std::string_view name);

/// Composed unitary over all segments in the rotating frame. In lab-frame
/// mode each segment is integrated at qubit frequency `omega` with the drive
/// at omega - Delta, then mapped back through the rotating-frame transform.
Eigen::Matrix2cd gate_unitary(const PulseSequence& seq);
Eigen::Matrix2cd gate_unitary(const PulseSequence& seq, EvolutionMode mode, double omega,
                              double tol = 1e-9);
Eigen::Matrix2cd gate_unitary(const PulseSequence& seq, const QubitParameters& qubit,
                              EvolutionMode mode, double tol = 1e-9);

}  // namespace nanotorus
