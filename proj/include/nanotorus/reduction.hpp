#pragma once

// Reduction of the trapping well around theta = pi to a quartic oscillator,
// and from there to the qubit parameters omega, alpha, mu and Omega(E).

#include <functional>
#include <string_view>

#include "nanotorus/model.hpp"

namespace nanotorus {

enum class CoefficientSource { paper_formula, numerical_taylor };

std::string_view to_string(CoefficientSource source);
CoefficientSource coefficient_source_from_string(std::string_view name);

/// V(pi + x) ~ constant + quadratic x^2 + quartic x^4, all in internal
/// energy units. quadratic corresponds to beta^2 / 2m*, quartic to delta
/// and constant to epsilon.
struct OscillatorCoefficients {
    double quadratic = 0.0;
    double quartic = 0.0;
    double constant = 0.0;
    CoefficientSource source = CoefficientSource::numerical_taylor;

    /// beta^2 in SI (kg m / s)^2.
    double beta_squared(const TorusGeometry& geom) const;
};

/// Closed-form expansion coefficients as published.
OscillatorCoefficients coefficients_paper(const TorusGeometry& geom, double B);

/// Raised when the odd Taylor coefficients are not negligible, which means
/// the expanded potential is not symmetric about theta = pi.
class TaylorSymmetryError : public Error {
public:
    using Error::Error;
};

struct TaylorOptions {
    double initial_step = 0.3;
    int levels = 6;
    double odd_tolerance = 1e-10;
};

/// Richardson-extrapolated central derivatives of f at x = 0:
/// c0 = f(0), c2 = f''/2, c4 = f''''/24.
OscillatorCoefficients taylor_coefficients(const std::function<double(double)>& potential_of_offset,
                                           const TaylorOptions& options = {});

/// Taylor coefficients of v_bare + v_magnetic (+ v_electric when E_static is
/// nonzero, which fails the symmetry check) around theta = pi.
OscillatorCoefficients coefficients_numerical(const TorusGeometry& geom, double B, int m = 0,
                                              double E_static = 0.0,
                                              const TaylorOptions& options = {});

OscillatorCoefficients oscillator_coefficients(const TorusGeometry& geom, double B,
                                               CoefficientSource source);

struct QubitParameters {
    TorusGeometry geom;
    double B = 0.0;
    OscillatorCoefficients coefficients;

    double omega = 0.0;          // rad/s, qubit transition frequency
    double ground_energy = 0.0;  // J, epsilon + hbar omega / 2
    double alpha = 0.0;          // J, delta (hbar / 2 m* omega r^2)^2
    double mu = 0.0;             // C m, effective dipole
    double zero_point_spread = 0.0;  // s = sqrt(hbar / 2 m* omega r^2), rad
    double anharmonicity_ratio = 0.0;  // |alpha| / (hbar omega)

    /// s >= 1: the small-angle expansion of sin(theta) is not valid.
    bool spread_warning = false;
    /// anharmonicity_ratio < 1e-6: second transition not resolvable.
    bool anharmonicity_warning = false;

    double rabi_frequency(double E0) const;
};

QubitParameters qubit_parameters(const OscillatorCoefficients& coeffs, const TorusGeometry& geom,
                                 double B);

QubitParameters qubit_at(const TorusGeometry& geom, double B,
                         CoefficientSource source = CoefficientSource::numerical_taylor);

/// mu = e r (s - s^3 / 6).
double effective_dipole(const TorusGeometry& geom, double B,
                        CoefficientSource source = CoefficientSource::numerical_taylor);

/// Omega = mu E0 / hbar.
double rabi_frequency(double mu, double E0);

/// Constant term of the direct expansion minus the published one. The
/// published cross terms (-2Rr + 2r^2) carry the opposite sign; the
/// difference is -hbar^2 / (2 m* r (R - r)) in joules.
double predicted_constant_discrepancy(const TorusGeometry& geom);

}  // namespace nanotorus
