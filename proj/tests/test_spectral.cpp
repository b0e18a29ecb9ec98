#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nanotorus/spectral.hpp"

using namespace nanotorus;

namespace {

// Cyclic Jacobi diagonalization; returns ascending eigenvalues.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
    const int n = static_cast<int>(a.rows());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) < 1e-14 * a.norm()) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
                const double c = 1 / std::sqrt(1 + t * t), s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

TorusGeometry fig3a() { return TorusGeometry::from_angstrom(350, 900); }

std::vector<double> harmonic_potential(int n, double a) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = 2 * M_PI * i / n - M_PI;
        v[static_cast<std::size_t>(i)] = a * x * x;
    }
    return v;
}

double level(const CyclicBandMatrix& h, int k) { return lowest_eigenpairs(h, k + 1).values[k]; }

double slope(const std::vector<double>& hs, const std::vector<double>& errors) {
    // Least-squares slope of log(error) against log(h).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double x = std::log(hs[i]), y = std::log(errors[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(Discretization, Validation) {
    EXPECT_THROW((Discretization{32}.validate()), InvalidArgument);
    EXPECT_NO_THROW((Discretization{64}.validate()));
    EXPECT_NEAR((Discretization{1024}.spacing()), 2 * M_PI / 1024, 1e-16);
}

TEST(CyclicBand, CornersAndSymmetry) {
    const PotentialParams p(fig3a(), 0.45);
    for (auto order : {StencilOrder::second, StencilOrder::fourth}) {
        const auto h = build_hamiltonian(p, {64, order});
        const Eigen::MatrixXd d = h.to_dense();
        EXPECT_EQ((d - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_NE(d(0, 63), 0.0);
        EXPECT_EQ(d(0, 63), d(0, 1));
        Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(64, -1, 2);
        EXPECT_LT((h.apply(x) - d * x).cwiseAbs().maxCoeff(), 1e-9 * h.norm_inf());
    }
    const double hh = 2 * M_PI / 64;
    const auto h2 = build_hamiltonian(std::vector<double>(64, 0.0), {64});
    EXPECT_NEAR(h2(0, 0), 2 / (hh * hh), 1e-9);
    EXPECT_NEAR(h2(5, 6), -1 / (hh * hh), 1e-9);
    EXPECT_EQ(h2(5, 8), 0.0);
}

TEST(CyclicBand, RejectsNonFinitePotential) {
    std::vector<double> v(64, 0.0);
    v[3] = NAN;
    EXPECT_THROW(build_hamiltonian(v, {64}), InvalidArgument);
}

TEST(Eigen, DenseMatchesJacobiOracle) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(40, 40);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = normal(rng);
    const auto oracle = jacobi_eigenvalues(a);
    const auto pairs = lowest_eigenpairs(a, 6);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(pairs.values[k], oracle[k], 1e-10);
}

TEST(Eigen, BandMatchesJacobiOracle) {
    const PotentialParams p(fig3a(), 0.45);
    for (auto order : {StencilOrder::second, StencilOrder::fourth}) {
        const auto h = build_hamiltonian(p, {96, order});
        const auto oracle = jacobi_eigenvalues(h.to_dense());
        const auto pairs = lowest_eigenpairs(h, 8);
        for (int k = 0; k < 8; ++k) {
            EXPECT_NEAR(pairs.values[k], oracle[k], 1e-9 * std::max(1.0, std::abs(oracle[k])));
        }
    }
}

TEST(Eigen, BandEigenvectorsOrthonormalWithSmallResiduals) {
    const auto h = build_hamiltonian(PotentialParams(fig3a(), 0.0, 0.0, 1), {1024});
    const auto pairs = lowest_eigenpairs(h, 8);
    const Eigen::MatrixXd gram = pairs.vectors.transpose() * pairs.vectors;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
    for (int k = 0; k < 8; ++k) {
        const Eigen::VectorXd v = pairs.vectors.col(k);
        EXPECT_LT((h.apply(v) - pairs.values[k] * v).norm(), 1e-9 * h.norm_inf());
    }
    EXPECT_TRUE(std::is_sorted(pairs.values.begin(), pairs.values.end()));
}

TEST(Eigen, BandAgreesWithDenseOnDegenerateFreeParticle) {
    const auto h = build_hamiltonian(std::vector<double>(128, 0.0), {128});
    const auto band = lowest_eigenpairs(h, 7);
    const auto dense = lowest_eigenpairs(h.to_dense(), 7);
    for (int k = 0; k < 7; ++k) EXPECT_NEAR(band.values[k], dense.values[k], 1e-9);
    // Degenerate +-k pairs must come back as independent vectors.
    const Eigen::MatrixXd gram = band.vectors.transpose() * band.vectors;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Eigen, HarmonicOscillatorLadder) {
    // -d^2 + a x^2 has levels sqrt(a)(2n + 1); a = 1e4 keeps the states
    // (width ~0.1 rad) far from the periodic boundary.
    const int n = 2048;
    const auto h = build_hamiltonian(harmonic_potential(n, 1e4), {n});
    const auto pairs = lowest_eigenpairs(h, 4);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(pairs.values[k] / (100.0 * (2 * k + 1)), 1.0, 1e-3);
}

TEST(Eigen, SecondOrderConvergenceSlope) {
    // Free particle: exact level k^2 (k = 3 pair); discrete (2 - 2 cos kh)/h^2.
    std::vector<double> hs, free_err, full_err;
    const PotentialParams p(fig3a(), 0.45);
    const double reference = level(build_hamiltonian(p, {16384}), 1);
    for (int n : {128, 256, 512, 1024}) {
        const double h = 2 * M_PI / n;
        hs.push_back(h);
        free_err.push_back(std::abs(level(build_hamiltonian(std::vector<double>(n, 0.0), {n}), 5) - 9.0));
        full_err.push_back(std::abs(level(build_hamiltonian(p, {n}), 1) - reference));
    }
    EXPECT_NEAR(slope(hs, free_err), 2.0, 0.2);
    EXPECT_NEAR(slope(hs, full_err), 2.0, 0.2);
}

TEST(Eigen, FourthOrderConvergesFaster) {
    std::vector<double> hs, err;
    for (int n : {64, 128, 256}) {
        hs.push_back(2 * M_PI / n);
        err.push_back(std::abs(
            level(build_hamiltonian(std::vector<double>(n, 0.0), {n, StencilOrder::fourth}), 5) - 9.0));
    }
    EXPECT_NEAR(slope(hs, err), 4.0, 0.3);
}

TEST(Eigen, RejectsBadRequests) {
    const auto h = build_hamiltonian(std::vector<double>(64, 0.0), {64});
    EXPECT_THROW(lowest_eigenpairs(h, 0), InvalidArgument);
    EXPECT_THROW(lowest_eigenpairs(h, 65), InvalidArgument);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
    a(0, 1) = 1.0;
    EXPECT_THROW(lowest_eigenpairs(a, 1), InvalidArgument);
}

TEST(Spectrum, ZeroFieldStructure) {
    const Discretization disc{1024};
    const auto m0 = solve_spectrum(PotentialParams(fig3a(), 0.0, 0.0, 0), disc);
    EXPECT_EQ(m0.bound_count(), 1);
    EXPECT_TRUE(m0.states[0].bound);
    const auto mp = solve_spectrum(PotentialParams(fig3a(), 0.0, 0.0, 1), disc);
    const auto mm = solve_spectrum(PotentialParams(fig3a(), 0.0, 0.0, -1), disc);
    EXPECT_EQ(mp.bound_count(), 1);
    EXPECT_EQ(mm.bound_count(), 1);
    EXPECT_NEAR(mp.states[0].energy, mm.states[0].energy, 1e-12);
}

TEST(Spectrum, WavefunctionNormalizationAndSign) {
    const Discretization disc{512};
    const auto sp = solve_spectrum(PotentialParams(fig3a(), 0.45), disc, 4);
    for (const auto& s : sp.states) {
        double norm = 0.0, peak = 0.0;
        for (double x : s.wavefunction) {
            norm += x * x * disc.spacing();
            if (std::abs(x) > std::abs(peak)) peak = x;
        }
        EXPECT_NEAR(norm, 1.0, 1e-10);
        EXPECT_GT(peak, 0.0);
        EXPECT_GE(s.localization, 0.0);
        EXPECT_LE(s.localization, 1.0 + 1e-12);
    }
}

TEST(Spectrum, LocalizationOfUniformStateIsHalf) {
    const int n = 1024;
    std::vector<double> chi(n, 1.0 / std::sqrt(2 * M_PI));
    EXPECT_NEAR(localization_of(chi, 2 * M_PI / n), 0.5, 2e-3);
}

TEST(Spectrum, ClassificationNeedsEnergyAndLocalization) {
    BoundState s;
    s.energy = 1.0;
    s.localization = 0.9;
    EXPECT_TRUE(classify_bound(s, 2.0));
    EXPECT_FALSE(classify_bound(s, 0.5));
    s.localization = 0.3;
    EXPECT_FALSE(classify_bound(s, 2.0));
    EXPECT_TRUE(classify_bound(s, 2.0, BoundCriteria{0.2}));
}

TEST(Sweep, OrderedByFieldThenM) {
    SweepRequest req;
    req.values = {0.0, 0.2, 0.45};
    req.m_list = {1, 0};
    req.n_levels = 3;
    const auto sweep = sweep_field(fig3a(), req, {256});
    ASSERT_EQ(sweep.size(), 6u);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        EXPECT_EQ(sweep[i].field, req.values[i / 2]);
        EXPECT_EQ(sweep[i].spectrum.params.m_orbital, req.m_list[i % 2]);
    }
    std::ostringstream os;
    write_sweep_csv(os, sweep, FieldAxis::magnetic);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "B,m,n,energy,bound,localization");
}

TEST(Sweep, RejectsNonMonotoneValues) {
    SweepRequest req;
    req.values = {0.1, 0.1};
    EXPECT_THROW(sweep_field(fig3a(), req, {256}), InvalidArgument);
    req.values = {0.1};
    EXPECT_THROW(sweep_field(fig3a(), req, {256}), InvalidArgument);
}

TEST(Window, Fig3aContainsOperatingPoint) {
    const auto w = initialization_window(fig3a(), {1024});
    EXPECT_TRUE(w.contains(0.45));
    EXPECT_LT(w.B_min, 0.45);
    EXPECT_GT(w.B_max, 0.45);
    EXPECT_EQ(bound_count_m0(fig3a(), 0.45, {1024}), 2);
}

TEST(Window, NoWindowInNarrowRange) {
    WindowSearch s;
    s.B_lo = 0.0;
    s.B_hi = 0.2;
    s.scan_points = 11;
    EXPECT_THROW(initialization_window(fig3a(), {512}, s), NoWindowError);
}
