#include "nanotorus/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <cmath>
#include <ostream>
#include <sstream>

#include "nanotorus/format.hpp"
#include "nanotorus/parallel.hpp"

namespace nanotorus {

namespace {

constexpr double kResidualTolerance = 1e-9;

int wrap_index(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

// Interleaved ordering 0, n-1, 1, n-2, ... maps a cyclic band matrix of half
// bandwidth w onto an ordinary band matrix of half bandwidth 2w.
std::vector<int> interleaved_order(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    int lo = 0;
    int hi = n - 1;
    for (int p = 0; p < n; ++p) order[static_cast<std::size_t>(p)] = (p % 2 == 0) ? lo++ : hi--;
    return order;
}

double residual_norm(const Eigen::VectorXd& hv, double value, const Eigen::VectorXd& v) {
    return (hv - value * v).norm();
}

void check_residuals(const Eigenpairs& pairs, double norm) {
    for (std::size_t i = 0; i < pairs.residuals.size(); ++i) {
        if (!(pairs.residuals[i] <= kResidualTolerance * std::max(norm, 1.0))) {
            std::ostringstream os;
            os << "eigensolver: residual " << pairs.residuals[i] << " of pair " << i
               << " exceeds bound " << kResidualTolerance * std::max(norm, 1.0);
            throw EigenSolverError(os.str(), pairs.residuals[i]);
        }
    }
}

}  // namespace

void Discretization::validate() const {
    if (n_points < 64) throw InvalidArgument("discretization: n_points must be >= 64");
    if (stencil != StencilOrder::second && stencil != StencilOrder::fourth) {
        throw InvalidArgument("discretization: stencil order must be 2 or 4");
    }
}

CyclicBandMatrix::CyclicBandMatrix(std::vector<double> diagonal, std::vector<double> band)
    : diagonal_(std::move(diagonal)), band_(std::move(band)) {
    if (diagonal_.empty()) throw InvalidArgument("band matrix: empty diagonal");
    if (2 * band_.size() >= diagonal_.size()) {
        throw InvalidArgument("band matrix: bandwidth too large for a cyclic stencil");
    }
}

double CyclicBandMatrix::operator()(int i, int j) const {
    const int n = size();
    if (i == j) return diagonal_[static_cast<std::size_t>(i)];
    const int d = wrap_index(j - i, n);
    const int offset = std::min(d, n - d);
    if (offset >= 1 && offset <= half_bandwidth()) return band_[static_cast<std::size_t>(offset - 1)];
    return 0.0;
}

Eigen::VectorXd CyclicBandMatrix::apply(const Eigen::VectorXd& x) const {
    const int n = size();
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        double acc = diagonal_[static_cast<std::size_t>(i)] * x[i];
        for (int k = 1; k <= half_bandwidth(); ++k) {
            acc += band_[static_cast<std::size_t>(k - 1)] * (x[wrap_index(i + k, n)] + x[wrap_index(i - k, n)]);
        }
        y[i] = acc;
    }
    return y;
}

Eigen::MatrixXd CyclicBandMatrix::to_dense() const {
    const int n = size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = diagonal_[static_cast<std::size_t>(i)];
        for (int k = 1; k <= half_bandwidth(); ++k) {
            a(i, wrap_index(i + k, n)) = band_[static_cast<std::size_t>(k - 1)];
            a(i, wrap_index(i - k, n)) = band_[static_cast<std::size_t>(k - 1)];
        }
    }
    return a;
}

double CyclicBandMatrix::norm_inf() const {
    double off = 0.0;
    for (double b : band_) off += 2.0 * std::abs(b);
    double best = 0.0;
    for (double d : diagonal_) best = std::max(best, std::abs(d) + off);
    return best;
}

CyclicBandMatrix build_hamiltonian(const std::vector<double>& potential_values,
                                   const Discretization& disc) {
    disc.validate();
    if (static_cast<int>(potential_values.size()) != disc.n_points) {
        throw InvalidArgument("hamiltonian: potential size does not match the grid");
    }
    const double h2 = disc.spacing() * disc.spacing();
    double kinetic_diag = 0.0;
    std::vector<double> band;
    if (disc.stencil == StencilOrder::second) {
        kinetic_diag = 2.0 / h2;
        band = {-1.0 / h2};
    } else {
        kinetic_diag = 2.5 / h2;
        band = {-4.0 / (3.0 * h2), 1.0 / (12.0 * h2)};
    }
    std::vector<double> diagonal(potential_values.size());
    for (std::size_t i = 0; i < potential_values.size(); ++i) {
        if (!std::isfinite(potential_values[i])) {
            throw InvalidArgument("hamiltonian: non-finite potential value");
        }
        diagonal[i] = kinetic_diag + potential_values[i];
    }
    return {std::move(diagonal), std::move(band)};
}

CyclicBandMatrix build_hamiltonian(const PotentialParams& params, const Discretization& disc) {
    disc.validate();
    return build_hamiltonian(sample_profile(params, disc.n_points).total, disc);
}

Eigenpairs lowest_eigenpairs(const Eigen::MatrixXd& matrix, int k) {
    const auto n = matrix.rows();
    if (matrix.cols() != n) throw InvalidArgument("eigensolver: matrix must be square");
    if (k < 1 || k > n) throw InvalidArgument("eigensolver: need 1 <= k <= n");
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() != 0.0) {
        throw InvalidArgument("eigensolver: matrix must be symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
    if (solver.info() != Eigen::Success) {
        throw EigenSolverError("eigensolver: dense diagonalization did not converge",
                               std::numeric_limits<double>::infinity());
    }
    Eigenpairs out;
    out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + k);
    out.vectors = solver.eigenvectors().leftCols(k);
    out.residuals.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        out.residuals[static_cast<std::size_t>(i)] =
            residual_norm(matrix * out.vectors.col(i), out.values[static_cast<std::size_t>(i)],
                          out.vectors.col(i));
    }
    check_residuals(out, matrix.cwiseAbs().rowwise().sum().maxCoeff());
    return out;
}

Eigenpairs lowest_eigenpairs(const CyclicBandMatrix& matrix, int k) {
    const int n = matrix.size();
    if (k < 1 || k > n) throw InvalidArgument("eigensolver: need 1 <= k <= n");

    const auto order = interleaved_order(n);
    const int kd = 2 * matrix.half_bandwidth();
    auto permuted = [&](int i, int j) {
        return matrix(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    };

    // Eigenvalues from the symmetric band form (lower storage, column major:
    // ab[(i - j) + j * ldab] = A(i, j)).
    const int ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        for (int i = j; i <= std::min(n - 1, j + kd); ++i) {
            ab[static_cast<std::size_t>((i - j) + j * ldab)] = permuted(i, j);
        }
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
    lapack_int found = 0;
    double unused_q = 0.0;
    double unused_z = 0.0;
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'L', n, kd, ab.data(), ldab,
                                     &unused_q, 1, 0.0, 0.0, 1, k, abstol, &found, w.data(),
                                     &unused_z, 1, ifail.data());
    if (info != 0 || found != k) {
        std::ostringstream os;
        os << "eigensolver: banded eigenvalue solve failed (info " << info << ", found " << found
           << " of " << k << ")";
        throw EigenSolverError(os.str(), std::numeric_limits<double>::infinity());
    }

    // Eigenvectors by shifted inverse iteration on the general band LU of
    // (A - sigma I), orthogonalized against the vectors already found so
    // degenerate and clustered levels come out orthonormal.
    const double norm = matrix.norm_inf();
    const int ldlu = 3 * kd + 1;
    std::vector<double> lu(static_cast<std::size_t>(ldlu) * n);
    std::vector<lapack_int> pivots(static_cast<std::size_t>(n));
    Eigen::MatrixXd vecs(n, k);
    std::vector<double> residuals(static_cast<std::size_t>(k));
    std::uint64_t lcg = 0x9E3779B97F4A7C15ull;

    for (int c = 0; c < k; ++c) {
        const double lambda = w[static_cast<std::size_t>(c)];
        double shift = lambda;
        for (int attempt = 0;; ++attempt) {
            std::fill(lu.begin(), lu.end(), 0.0);
            for (int j = 0; j < n; ++j) {
                for (int i = std::max(0, j - kd); i <= std::min(n - 1, j + kd); ++i) {
                    lu[static_cast<std::size_t>((2 * kd + i - j) + j * ldlu)] =
                        permuted(i, j) - (i == j ? shift : 0.0);
                }
            }
            info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd, lu.data(), ldlu, pivots.data());
            if (info == 0) break;
            if (attempt > 8) {
                throw EigenSolverError("eigensolver: singular shifted band factorization",
                                       std::numeric_limits<double>::infinity());
            }
            shift -= 64.0 * (attempt + 1) * std::numeric_limits<double>::epsilon() * norm;
        }

        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) {
            lcg = lcg * 6364136223846793005ull + 1442695040888963407ull;
            x[i] = static_cast<double>(lcg >> 11) * 0x1.0p-53 - 0.5;
        }
        double residual = std::numeric_limits<double>::infinity();
        Eigen::VectorXd ax(n);
        for (int iter = 0; iter < 12; ++iter) {
            info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kd, kd, 1, lu.data(), ldlu,
                                  pivots.data(), x.data(), n);
            if (info != 0) {
                throw EigenSolverError("eigensolver: band back-substitution failed", residual);
            }
            for (int pass = 0; pass < 2; ++pass) {
                for (int p = 0; p < c; ++p) x -= vecs.col(p).dot(x) * vecs.col(p);
            }
            x.normalize();
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = std::max(0, i - kd); j <= std::min(n - 1, i + kd); ++j) {
                    acc += permuted(i, j) * x[j];
                }
                ax[i] = acc;
            }
            residual = residual_norm(ax, lambda, x);
            if (residual <= 1e-13 * norm && iter >= 1) break;
        }
        vecs.col(c) = x;
        residuals[static_cast<std::size_t>(c)] = residual;
    }

    Eigenpairs out;
    out.values.assign(w.begin(), w.begin() + k);
    out.vectors.resize(n, k);
    for (int p = 0; p < n; ++p) out.vectors.row(order[static_cast<std::size_t>(p)]) = vecs.row(p);
    out.residuals = std::move(residuals);
    check_residuals(out, norm);
    return out;
}

int Spectrum::bound_count() const {
    return static_cast<int>(std::count_if(states.begin(), states.end(),
                                          [](const BoundState& s) { return s.bound; }));
}

double localization_of(const std::vector<double>& wavefunction, double spacing) {
    const auto n = wavefunction.size();
    double weight = 0.0;
    // Tolerance keeps grid points that sit exactly on pi/2 or 3pi/2.
    const double slack = 1e-9 * spacing;
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = spacing * static_cast<double>(i);
        if (theta >= 0.5 * kPi - slack && theta <= 1.5 * kPi + slack) {
            weight += wavefunction[i] * wavefunction[i];
        }
    }
    return std::clamp(weight * spacing, 0.0, 1.0);
}

bool classify_bound(const BoundState& state, double barrier_energy, const BoundCriteria& criteria) {
    return state.energy < barrier_energy && state.localization >= criteria.localization_threshold;
}

Spectrum solve_spectrum(const PotentialParams& params, const Discretization& disc, int n_levels,
                        const BoundCriteria& criteria) {
    disc.validate();
    if (n_levels < 1) throw InvalidArgument("spectrum: n_levels must be >= 1");
    const auto profile = sample_profile(params, disc.n_points);
    const auto hamiltonian = build_hamiltonian(profile.total, disc);
    const double barrier = profile.total.front();
    const double h = disc.spacing();

    int k = std::min(n_levels, disc.n_points);
    Eigenpairs pairs = lowest_eigenpairs(hamiltonian, k);
    while (pairs.values.back() < barrier && k < disc.n_points) {
        k = std::min(2 * k, disc.n_points);
        pairs = lowest_eigenpairs(hamiltonian, k);
    }

    Spectrum spec{.params = params, .disc = disc, .states = {}, .barrier_energy = barrier};
    spec.states.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        BoundState s;
        s.m_orbital = params.m_orbital;
        s.level = c;
        s.energy = pairs.values[static_cast<std::size_t>(c)];
        s.wavefunction.resize(static_cast<std::size_t>(disc.n_points));
        const double scale = 1.0 / std::sqrt(h);
        for (int i = 0; i < disc.n_points; ++i) {
            s.wavefunction[static_cast<std::size_t>(i)] = pairs.vectors(i, c) * scale;
        }
        // Sign convention: the largest-magnitude sample is positive.
        const auto pivot = *std::max_element(
            s.wavefunction.begin(), s.wavefunction.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
        if (pivot < 0.0) {
            for (auto& x : s.wavefunction) x = -x;
        }
        s.localization = localization_of(s.wavefunction, h);
        s.bound = classify_bound(s, barrier, criteria);
        spec.states.push_back(std::move(s));
    }
    return spec;
}

std::vector<SweepPoint> sweep_field(const TorusGeometry& geom, const SweepRequest& request,
                                    const Discretization& disc) {
    disc.validate();
    const auto& values = request.values;
    if (values.size() < 2) throw InvalidArgument("sweep: need at least 2 field samples");
    const bool increasing = values[1] > values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (increasing ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1])) {
            throw InvalidArgument("sweep: field values must be strictly monotone");
        }
    }
    if (request.m_list.empty()) throw InvalidArgument("sweep: m_list is empty");
    if (request.axis == FieldAxis::magnetic) {
        for (double v : values) {
            if (v < 0.0) throw InvalidArgument("sweep: B must be >= 0");
        }
    }

    const std::size_t n_m = request.m_list.size();
    std::vector<std::optional<SweepPoint>> slots(values.size() * n_m);
    parallel_for(slots.size(), [&](std::size_t idx) {
        const double field = values[idx / n_m];
        const int m = request.m_list[idx % n_m];
        const double B = request.axis == FieldAxis::magnetic ? field : request.fixed_field;
        const double E = request.axis == FieldAxis::electric ? field : request.fixed_field;
        try {
            slots[idx] = SweepPoint{field, solve_spectrum(PotentialParams(geom, B, E, m), disc,
                                                          request.n_levels, request.criteria)};
        } catch (const EigenSolverError& e) {
            throw FieldSweepError(std::string(e.what()) + " at field " + format_double(field),
                                  field);
        }
    });

    std::vector<SweepPoint> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& sweep, FieldAxis axis) {
    os << (axis == FieldAxis::magnetic ? "B" : "E") << ",m,n,energy,bound,localization\n";
    for (const auto& point : sweep) {
        const double scale = energy_scale_of(point.spectrum.params.geom);
        for (const auto& s : point.spectrum.states) {
            os << format_double(point.field) << ',' << s.m_orbital << ',' << s.level << ','
               << format_double(s.energy * scale) << ',' << (s.bound ? 1 : 0) << ','
               << format_double(s.localization) << '\n';
        }
    }
}

int bound_count_m0(const TorusGeometry& geom, double B, const Discretization& disc,
                   const WindowSearch& search) {
    return solve_spectrum(PotentialParams(geom, B, 0.0, 0), disc, search.n_levels, search.criteria)
        .bound_count();
}

InitializationWindow initialization_window(const TorusGeometry& geom, const Discretization& disc,
                                           const WindowSearch& search) {
    if (search.scan_points < 2 || !(search.B_hi > search.B_lo) || search.B_lo < 0.0) {
        throw InvalidArgument("window: need B_lo >= 0, B_hi > B_lo and >= 2 scan points");
    }
    if (!(search.tolerance > 0.0)) throw InvalidArgument("window: tolerance must be > 0");

    const auto n = static_cast<std::size_t>(search.scan_points);
    std::vector<double> B(n);
    for (std::size_t i = 0; i < n; ++i) {
        B[i] = search.B_lo + (search.B_hi - search.B_lo) * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    }
    std::vector<int> counts(n);
    parallel_for(n, [&](std::size_t i) { counts[i] = bound_count_m0(geom, B[i], disc, search); });

    const auto first = std::find(counts.begin(), counts.end(), 2);
    if (first == counts.end()) {
        std::ostringstream os;
        os << "window: no field in [" << search.B_lo << ", " << search.B_hi
           << "] T gives exactly two bound m=0 states";
        throw NoWindowError(os.str());
    }
    const auto i0 = static_cast<std::size_t>(first - counts.begin());
    std::size_t i1 = i0;
    while (i1 + 1 < n && counts[i1 + 1] == 2) ++i1;

    auto two_bound = [&](double b) { return bound_count_m0(geom, b, disc, search) == 2; };
    // Invariant: `inside` satisfies the predicate, `outside` does not.
    auto refine = [&](double inside, double outside) {
        while (std::abs(outside - inside) > search.tolerance) {
            const double mid = 0.5 * (inside + outside);
            (two_bound(mid) ? inside : outside) = mid;
        }
        return inside;
    };

    InitializationWindow win;
    win.B_min = i0 == 0 ? B[0] : refine(B[i0], B[i0 - 1]);
    win.B_max = i1 + 1 == n ? B[n - 1] : refine(B[i1], B[i1 + 1]);
    return win;
}

}  // namespace nanotorus
