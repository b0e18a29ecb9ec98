#pragma once

// Finite-difference solver for the periodic one-dimensional Schroedinger
// operator -d^2/dtheta^2 + V(theta) (internal units) and the field sweeps
// built on it.

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <vector>

#include "nanotorus/potential.hpp"

namespace nanotorus {

enum class StencilOrder { second = 2, fourth = 4 };

struct Discretization {
    int n_points = 1024;
    StencilOrder stencil = StencilOrder::second;

    void validate() const;
    double spacing() const { return kTwoPi / n_points; }
};

/// Raised when an eigensolve does not converge or misses its residual bound.
class EigenSolverError : public Error {
public:
    EigenSolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Symmetric n x n matrix whose only off-diagonal entries are constant bands
/// at offsets +-1..+-w with periodic wraparound (cyclic corner entries).
class CyclicBandMatrix {
public:
    /// band[k-1] is the entry at offset +-k.
    CyclicBandMatrix(std::vector<double> diagonal, std::vector<double> band);

    int size() const { return static_cast<int>(diagonal_.size()); }
    int half_bandwidth() const { return static_cast<int>(band_.size()); }
    const std::vector<double>& diagonal() const { return diagonal_; }
    const std::vector<double>& band() const { return band_; }

    double operator()(int i, int j) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd to_dense() const;
    /// Max absolute row sum, an upper bound on the spectral norm.
    double norm_inf() const;

private:
    std::vector<double> diagonal_;
    std::vector<double> band_;
};

/// Discretized Hamiltonian: kinetic central differences plus the diagonal
/// potential from `potential`.
CyclicBandMatrix build_hamiltonian(const PotentialParams& params, const Discretization& disc);

/// Same kinetic operator with an arbitrary potential sampled on the grid.
CyclicBandMatrix build_hamiltonian(const std::vector<double>& potential_values,
                                   const Discretization& disc);

struct Eigenpairs {
    std::vector<double> values;  // ascending
    Eigen::MatrixXd vectors;     // orthonormal columns
    std::vector<double> residuals;
};

/// k smallest eigenpairs of a dense symmetric matrix.
Eigenpairs lowest_eigenpairs(const Eigen::MatrixXd& matrix, int k);
/// k smallest eigenpairs of a cyclic band matrix; banded LAPACK path.
Eigenpairs lowest_eigenpairs(const CyclicBandMatrix& matrix, int k);

struct BoundCriteria {
    double localization_threshold = 0.5;
};

struct BoundState {
    int m_orbital = 0;
    int level = 0;
    double energy = 0.0;
    /// Normalized so that sum |chi_i|^2 h = 1.
    std::vector<double> wavefunction;
    /// Probability weight in theta in [pi/2, 3 pi/2].
    double localization = 0.0;
    bool bound = false;
};

struct Spectrum {
    PotentialParams params;
    Discretization disc;
    std::vector<BoundState> states;
    /// V_total at theta = 0.
    double barrier_energy = 0.0;

    int bound_count() const;
};

double localization_of(const std::vector<double>& wavefunction, double spacing);

bool classify_bound(const BoundState& state, double barrier_energy,
                    const BoundCriteria& criteria = {});

/// Lowest n_levels states of one m sector. If all of them lie below
/// the barrier more are computed until the top one is not.
Spectrum solve_spectrum(const PotentialParams& params, const Discretization& disc,
                        int n_levels = 8, const BoundCriteria& criteria = {});

enum class FieldAxis { magnetic, electric };

struct SweepRequest {
    FieldAxis axis = FieldAxis::magnetic;
    std::vector<double> values;
    std::vector<int> m_list{0};
    /// Value of the field that is not swept.
    double fixed_field = 0.0;
    int n_levels = 8;
    BoundCriteria criteria;
};

struct SweepPoint {
    double field = 0.0;
    Spectrum spectrum;
};

/// Raised by sweeps; carries the field value at which the solve failed.
class FieldSweepError : public Error {
public:
    FieldSweepError(const std::string& what, double field) : Error(what), field_(field) {}
    double field() const { return field_; }

private:
    double field_;
};

/// Ordered by (field, m) following the request order.
std::vector<SweepPoint> sweep_field(const TorusGeometry& geom, const SweepRequest& request,
                                    const Discretization& disc);

/// CSV columns B,m,n,energy,bound,localization (E instead of B on the
/// electric axis). Energies in joules.
void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& sweep, FieldAxis axis);

class NoWindowError : public Error {
public:
    using Error::Error;
};

struct WindowSearch {
    double B_lo = 0.0;
    double B_hi = 2.0;
    int scan_points = 101;
    double tolerance = 1e-3;  // T
    int n_levels = 8;
    BoundCriteria criteria;
};

struct InitializationWindow {
    double B_min = 0.0;
    double B_max = 0.0;
    bool contains(double B) const { return B >= B_min && B <= B_max; }
};

/// Number of bound m = 0 states at field B.
int bound_count_m0(const TorusGeometry& geom, double B, const Discretization& disc,
                   const WindowSearch& search = {});

/// First contiguous B interval in which the m = 0 sector holds exactly two
/// bound states, edges refined by bisection to search.tolerance.
InitializationWindow initialization_window(const TorusGeometry& geom,
                                           const Discretization& disc,
                                           const WindowSearch& search = {});

}  // namespace nanotorus
