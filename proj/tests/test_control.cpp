#include <gtest/gtest.h>

#include <cmath>

#include "nanotorus/control.hpp"

using namespace nanotorus;

namespace {

QuantumState apply(const PulseSequence& seq, const QuantumState& s) {
    return QuantumState::unchecked(gate_unitary(seq) * s.amplitudes());
}

double overlap(const QuantumState& a, const QuantumState& b) {
    return std::norm(a.amplitudes().dot(b.amplitudes()));
}

Eigen::Matrix2cd hadamard_matrix() {
    Eigen::Matrix2cd h;
    h << 1, 1, 1, -1;
    return h / std::sqrt(2.0);
}

}  // namespace

TEST(Gates, IdealMatrices) {
    EXPECT_LT((GateSpec::hadamard().ideal - hadamard_matrix()).norm(), 1e-15);
    const auto p = GateSpec::phase(0.9);
    EXPECT_EQ(p.ideal(0, 0), Complex(1.0));
    EXPECT_NEAR(std::abs(p.ideal(1, 1) - std::polar(1.0, 0.9)), 0.0, 1e-15);
    EXPECT_EQ(GateSpec::hadamard().name(), "hadamard");
    const auto r = GateSpec::rotation(Eigen::Vector3d(0, 0, 2), M_PI);
    EXPECT_NEAR(r.axis.norm(), 1.0, 1e-15);
    EXPECT_THROW(GateSpec::rotation(Eigen::Vector3d::Zero(), 1.0), InvalidArgument);
}

TEST(Gates, FidelityIgnoresGlobalPhase) {
    const Eigen::Matrix2cd h = hadamard_matrix();
    EXPECT_NEAR(gate_fidelity(h, std::polar(1.0, 1.3) * h), 1.0, 1e-15);
    EXPECT_NEAR(gate_fidelity(Eigen::Matrix2cd::Identity(), h), 0.0, 1e-15);
    const Eigen::Matrix2cd c = canonicalize_phase(Complex(0, -1) * h);
    EXPECT_NEAR(c(0, 0).imag(), 0.0, 1e-15);
    EXPECT_GT(c(0, 0).real(), 0.0);
}

TEST(Prepare, ReachesTargetsOverGrid) {
    const double rabi = 3.0e9;
    for (int i = 1; i <= 8; ++i) {
        for (int j = 0; j <= 8; ++j) {
            const double theta = M_PI * i / 8, eta = M_PI * j / 8;
            const auto s = apply(prepare_state(theta, eta, rabi), QuantumState::basis(2, 0));
            Eigen::Vector2cd target(std::sin(theta / 2), std::polar(std::cos(theta / 2), eta));
            EXPECT_NEAR(overlap(s, QuantumState(target)), 1.0, 1e-13) << theta << ' ' << eta;
        }
    }
}

TEST(Prepare, PulseShape) {
    const double rabi = 2.0;
    const auto seq = prepare_state(M_PI, 0.0, rabi);
    ASSERT_EQ(seq.segments.size(), 1u);
    EXPECT_EQ(seq.segments[0].detuning, 0.0);
    EXPECT_NEAR(seq.segments[0].duration, 0.0, 1e-15);
    EXPECT_NEAR(prepare_state(M_PI / 2, 0.0, rabi).total_duration(), M_PI / (2 * rabi), 1e-15);
}

TEST(Prepare, RejectsOutOfRange) {
    EXPECT_THROW(prepare_state(0.0, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(prepare_state(4.0, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(prepare_state(1.0, 3.5, 1.0), InvalidArgument);
    EXPECT_THROW(prepare_state(1.0, 0.5, 0.0), InvalidArgument);
}

TEST(Prepare, EquatorCoherence) {
    for (int k = 0; k < 64; ++k) {
        const double eta = M_PI * k / 63;
        const auto s = apply(prepare_state(M_PI / 2, eta, 1.0), QuantumState::basis(2, 0));
        const auto b = bloch(s);
        EXPECT_LT(std::abs(b.z), 1e-9);
        EXPECT_NEAR(std::abs(std::conj(s[0]) * s[1]), 0.5, 1e-9);
    }
}

TEST(Hadamard, SequenceAndAction) {
    const double rabi = 1.5;
    const auto seq = hadamard_sequence(rabi);
    ASSERT_EQ(seq.segments.size(), 1u);
    EXPECT_EQ(seq.segments[0].detuning, rabi);
    EXPECT_NEAR(seq.segments[0].phase, M_PI, 1e-15);
    EXPECT_NEAR(seq.segments[0].duration, M_PI / (std::sqrt(2.0) * rabi), 1e-15);

    const Eigen::Matrix2cd u = gate_unitary(seq);
    EXPECT_GE(gate_fidelity(hadamard_matrix(), u), 1 - 1e-12);
    EXPECT_LT((canonicalize_phase(u * u) - Eigen::Matrix2cd::Identity()).norm(), 1e-9);
    const auto plus = QuantumState::from_bloch_angles(M_PI / 2, 0.0);
    EXPECT_NEAR(overlap(apply(seq, QuantumState::basis(2, 0)), plus), 1.0, 1e-13);
}

TEST(Hadamard, LabFrameAtWeakDrive) {
    const double omega = 1000.0, rabi = 1.0;
    const Eigen::Matrix2cd u = gate_unitary(hadamard_sequence(rabi), EvolutionMode::labframe, omega);
    EXPECT_GE(gate_fidelity(hadamard_matrix(), u), 0.999);
}

TEST(PhaseGate, VirtualAndDetunedWait) {
    for (double eta : {0.0, 0.4, M_PI, 5.9}) {
        const auto v = phase_gate_sequence(eta);
        EXPECT_EQ(v.total_duration(), 0.0);
        EXPECT_GE(gate_fidelity(GateSpec::phase(eta).ideal, gate_unitary(v)), 1 - 1e-14);
        for (double d : {2.0, -3.0}) {
            const auto w = phase_gate_sequence(eta, {PhaseRealization::detuned_wait, d});
            EXPECT_GE(w.total_duration(), 0.0);
            EXPECT_GE(gate_fidelity(GateSpec::phase(eta).ideal, gate_unitary(w)), 1 - 1e-12) << eta << d;
        }
    }
    EXPECT_THROW(phase_gate_sequence(7.0), InvalidArgument);
    EXPECT_THROW(phase_gate_sequence(1.0, {PhaseRealization::detuned_wait, 0.0}), InvalidArgument);
}

TEST(PhaseGate, HadamardThenPhaseMakesEquatorState) {
    const double eta = 1.2;
    PulseSequence circuit = hadamard_sequence(1.0);
    for (const auto& s : phase_gate_sequence(eta).segments) circuit.segments.push_back(s);
    const auto out = apply(circuit, QuantumState::basis(2, 0));
    EXPECT_NEAR(overlap(out, QuantumState::from_bloch_angles(M_PI / 2, eta)), 1.0, 1e-13);
}

TEST(Sequences, EmptyAndPiPulse) {
    EXPECT_LT((gate_unitary(PulseSequence{}) - Eigen::Matrix2cd::Identity()).norm(), 1e-15);
    PulseSequence pi{{PulseSpec{.rabi = 2.0, .duration = M_PI / 2.0}}};
    Eigen::Matrix2cd x;
    x << 0, 1, 1, 0;
    EXPECT_GE(gate_fidelity(x, gate_unitary(pi)), 1 - 1e-14);
    EXPECT_NEAR(pi.total_duration(), M_PI / 2, 1e-15);
}

TEST(Rotations, SynthesizedAxes) {
    const std::vector<Eigen::Vector3d> axes{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {0.3, -0.5, -0.8}};
    for (const auto& axis : axes) {
        for (double angle : {0.5, M_PI, 4.0}) {
            const auto spec = GateSpec::rotation(axis, angle);
            const auto seq = synthesize(spec, 2.0);
            EXPECT_GE(gate_fidelity(spec.ideal, gate_unitary(seq)), 1 - 1e-12);
            for (const auto& s : seq.segments) EXPECT_LE(s.rabi, 2.0 + 1e-12);
        }
    }
    EXPECT_GE(gate_fidelity(GateSpec::hadamard().ideal, gate_unitary(synthesize(GateSpec::hadamard(), 1.0))),
              1 - 1e-12);
    EXPECT_EQ(synthesize(GateSpec::identity(), 1.0).total_duration(), 0.0);
}

TEST(Modes, NamesRoundTrip) {
    EXPECT_EQ(evolution_mode_from_string(to_string(EvolutionMode::labframe)), EvolutionMode::labframe);
    EXPECT_EQ(evolution_mode_from_string("rwa"), EvolutionMode::rwa);
    EXPECT_THROW(evolution_mode_from_string("exact"), InvalidArgument);
}
