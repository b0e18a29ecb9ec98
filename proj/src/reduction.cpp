#include "nanotorus/reduction.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "nanotorus/potential.hpp"

namespace nanotorus {

std::string_view to_string(CoefficientSource source) {
    return source == CoefficientSource::paper_formula ? "paper_formula" : "numerical_taylor";
}

CoefficientSource coefficient_source_from_string(std::string_view name) {
    if (name == "paper_formula" || name == "paper") return CoefficientSource::paper_formula;
    if (name == "numerical_taylor" || name == "numerical") {
        return CoefficientSource::numerical_taylor;
    }
    throw InvalidArgument("unknown coefficient source '" + std::string(name) + "'");
}

double OscillatorCoefficients::beta_squared(const TorusGeometry& geom) const {
    return 2.0 * geom.effective_mass() * quadratic * energy_scale_of(geom);
}

OscillatorCoefficients coefficients_paper(const TorusGeometry& geom, double B) {
    if (B < 0.0) throw InvalidArgument("coefficients: B must be >= 0");
    const double rho = geom.aspect();
    const double b2 = std::pow(magnetic_coupling(geom, B), 2);
    const double d = rho - 1.0;

    OscillatorCoefficients c;
    c.source = CoefficientSource::paper_formula;
    c.quadratic = 0.25 * (1.0 / (d * d * d) + b2 * d);
    c.quartic = -((rho + 8.0) / std::pow(d, 4) + b2 * (rho - 4.0)) / 48.0;
    c.constant = (b2 * std::pow(d, 4) - (rho * rho - 2.0 * rho + 2.0)) / (4.0 * d * d);
    return c;
}

OscillatorCoefficients taylor_coefficients(const std::function<double(double)>& f,
                                           const TaylorOptions& options) {
    if (options.levels < 1 || !(options.initial_step > 0.0)) {
        throw InvalidArgument("taylor: need levels >= 1 and a positive step");
    }
    const double f0 = f(0.0);
    const auto levels = static_cast<std::size_t>(options.levels);

    // Four central-difference estimates per step size, each with an error
    // series in even powers of h, which Richardson extrapolation removes.
    std::vector<std::vector<double>> d1(levels), d2(levels), d3(levels), d4(levels);
    double h = options.initial_step;
    for (std::size_t j = 0; j < levels; ++j, h *= 0.5) {
        const double fp = f(h), fm = f(-h), f2p = f(2 * h), f2m = f(-2 * h);
        d1[j] = {(fp - fm) / (2 * h)};
        d2[j] = {(fp - 2 * f0 + fm) / (h * h)};
        d3[j] = {(f2p - 2 * fp + 2 * fm - f2m) / (2 * h * h * h)};
        d4[j] = {(f2p - 4 * fp + 6 * f0 - 4 * fm + f2m) / (h * h * h * h)};
    }
    auto extrapolate = [levels](std::vector<std::vector<double>>& t) {
        for (std::size_t j = 1; j < levels; ++j) {
            double factor = 4.0;
            for (std::size_t k = 1; k <= j; ++k, factor *= 4.0) {
                t[j].push_back(t[j][k - 1] + (t[j][k - 1] - t[j - 1][k - 1]) / (factor - 1.0));
            }
        }
        return t[levels - 1].back();
    };

    const double first = extrapolate(d1);
    const double second = extrapolate(d2);
    const double third = extrapolate(d3);
    const double fourth = extrapolate(d4);

    const double even = std::abs(second) + std::abs(fourth);
    const double odd = std::abs(first) + std::abs(third);
    if (odd > options.odd_tolerance * even) {
        throw TaylorSymmetryError("taylor: odd derivatives " + std::to_string(odd) +
                                  " are not negligible against even ones " +
                                  std::to_string(even) + " (is E != 0?)");
    }

    OscillatorCoefficients c;
    c.source = CoefficientSource::numerical_taylor;
    c.constant = f0;
    c.quadratic = 0.5 * second;
    c.quartic = fourth / 24.0;
    return c;
}

OscillatorCoefficients coefficients_numerical(const TorusGeometry& geom, double B, int m,
                                              double E_static, const TaylorOptions& options) {
    if (B < 0.0) throw InvalidArgument("coefficients: B must be >= 0");
    const PotentialParams params(geom, B, E_static, m);
    // cos(pi + x) = -cos x and sin(pi + x) = -sin x, so mirrored offsets
    // see bit-identical symmetric terms.
    return taylor_coefficients(
        [&params](double x) { return potential_terms(-std::cos(x), -std::sin(x), params).total(); },
        options);
}

OscillatorCoefficients oscillator_coefficients(const TorusGeometry& geom, double B,
                                               CoefficientSource source) {
    return source == CoefficientSource::paper_formula ? coefficients_paper(geom, B)
                                                      : coefficients_numerical(geom, B);
}

double QubitParameters::rabi_frequency(double E0) const {
    return nanotorus::rabi_frequency(mu, E0);
}

QubitParameters qubit_parameters(const OscillatorCoefficients& coeffs, const TorusGeometry& geom,
                                 double B) {
    if (!(coeffs.quadratic > 0.0)) {
        throw InvalidArgument("qubit parameters: beta^2 must be > 0 (no trapping well)");
    }
    const auto units = UnitSystem::for_geometry(geom);

    // Internal units: hbar omega = 2 sqrt(c2) and s^2 = 1 / (hbar omega).
    const double omega_internal = 2.0 * std::sqrt(coeffs.quadratic);
    const double s = 1.0 / std::sqrt(omega_internal);

    QubitParameters q{.geom = geom, .B = B, .coefficients = coeffs};
    q.omega = units.from_internal(omega_internal, Quantity::angular_frequency);
    q.ground_energy = units.from_internal(coeffs.constant + 0.5 * omega_internal, Quantity::energy);
    q.alpha = units.from_internal(coeffs.quartic * std::pow(s, 4), Quantity::energy);
    q.zero_point_spread = s;
    q.mu = PhysicalConstants::electron_charge * geom.r_minor() * (s - s * s * s / 6.0);
    q.anharmonicity_ratio = std::abs(coeffs.quartic) * std::pow(s, 4) / omega_internal;
    q.spread_warning = s >= 1.0;
    q.anharmonicity_warning = q.anharmonicity_ratio < 1e-6;
    return q;
}

QubitParameters qubit_at(const TorusGeometry& geom, double B, CoefficientSource source) {
    return qubit_parameters(oscillator_coefficients(geom, B, source), geom, B);
}

double effective_dipole(const TorusGeometry& geom, double B, CoefficientSource source) {
    return qubit_at(geom, B, source).mu;
}

double rabi_frequency(double mu, double E0) {
    if (E0 < 0.0) throw InvalidArgument("rabi frequency: E0 must be >= 0");
    return mu * E0 / PhysicalConstants::hbar;
}

double predicted_constant_discrepancy(const TorusGeometry& geom) {
    const double hbar = PhysicalConstants::hbar;
    const double r = geom.r_minor();
    return -hbar * hbar / (2.0 * geom.effective_mass() * r * (geom.R_major() - r));
}

}  // namespace nanotorus
