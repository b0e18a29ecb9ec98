#include "nanotorus/model.hpp"

#include <cmath>
#include <sstream>

namespace nanotorus {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

}  // namespace

TorusGeometry::TorusGeometry(double r_minor, double R_major, double effective_mass_ratio)
    : r_minor_(r_minor), R_major_(R_major), mass_ratio_(effective_mass_ratio) {
    require_finite(r_minor, "r_minor");
    require_finite(R_major, "R_major");
    require_finite(effective_mass_ratio, "effective_mass_ratio");
    if (!(r_minor > 0.0)) throw InvalidArgument("geometry: r_minor must be > 0");
    if (!(r_minor < R_major)) {
        throw InvalidArgument("geometry: r_minor < R_major required (self-intersecting torus)");
    }
    if (!(effective_mass_ratio > 0.0)) {
        throw InvalidArgument("geometry: effective_mass_ratio must be > 0");
    }
}

TorusGeometry TorusGeometry::from_angstrom(double r_minor, double R_major,
                                           double effective_mass_ratio) {
    return {r_minor * kAngstrom, R_major * kAngstrom, effective_mass_ratio};
}

double wrap_angle(double angle) {
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod of a tiny negative number can round up to exactly 2 pi.
    if (w >= kTwoPi) w = 0.0;
    return w;
}

FieldConfig::FieldConfig(double B, double E0, double omega_rf, double phi)
    : B_(B), E0_(E0), omega_rf_(omega_rf), phi_(0.0) {
    require_finite(B, "B");
    require_finite(E0, "E0");
    require_finite(omega_rf, "omega_rf");
    require_finite(phi, "phi");
    if (B < 0.0) throw InvalidArgument("field: B must be >= 0");
    if (E0 < 0.0) throw InvalidArgument("field: E0 must be >= 0");
    phi_ = wrap_angle(phi);
}

UnitSystem::UnitSystem(double energy_scale, double length_scale, double time_scale)
    : energy_(energy_scale), length_(length_scale), time_(time_scale) {
    if (!(energy_scale > 0.0) || !(length_scale > 0.0) || !(time_scale > 0.0) ||
        !std::isfinite(energy_scale) || !std::isfinite(length_scale) ||
        !std::isfinite(time_scale)) {
        throw InvalidArgument("unit system: scales must be positive and finite");
    }
}

UnitSystem UnitSystem::for_geometry(const TorusGeometry& geom) {
    const double e = energy_scale_of(geom);
    return {e, geom.r_minor(), PhysicalConstants::hbar / e};
}

double UnitSystem::scale_of(Quantity q) const {
    switch (q) {
        case Quantity::energy: return energy_;
        case Quantity::length: return length_;
        case Quantity::time: return time_;
        case Quantity::angular_frequency: return 1.0 / time_;
    }
    return 1.0;
}

double UnitSystem::to_internal(double value, Quantity q) const {
    require_finite(value, "quantity");
    return value / scale_of(q);
}

double UnitSystem::from_internal(double value, Quantity q) const {
    require_finite(value, "quantity");
    return value * scale_of(q);
}

double energy_scale_of(const TorusGeometry& geom) {
    const double hbar = PhysicalConstants::hbar;
    const double r = geom.r_minor();
    return hbar * hbar / (2.0 * geom.effective_mass() * r * r);
}

double magnetic_coupling(const TorusGeometry& geom, double B) {
    const double r = geom.r_minor();
    return PhysicalConstants::electron_charge * B * r * r / PhysicalConstants::hbar;
}

double electric_coupling(const TorusGeometry& geom, double E) {
    return PhysicalConstants::electron_charge * E * geom.r_minor() / energy_scale_of(geom);
}

Dimension operator*(Dimension a, const Dimension& b) {
    for (std::size_t i = 0; i < a.exponents.size(); ++i) a.exponents[i] += b.exponents[i];
    return a;
}

Dimension operator/(Dimension a, const Dimension& b) {
    for (std::size_t i = 0; i < a.exponents.size(); ++i) a.exponents[i] -= b.exponents[i];
    return a;
}

Dimension Dimension::pow(int p) const {
    Dimension d = *this;
    for (auto& e : d.exponents) e *= p;
    return d;
}

Dimension Dimension::sqrt() const {
    Dimension d = *this;
    for (auto& e : d.exponents) {
        if (e % 2 != 0) throw InvalidArgument("dimension: square root of odd exponent");
        e /= 2;
    }
    return d;
}

std::string Dimension::to_string() const {
    static constexpr const char* names[] = {"kg", "m", "s", "C"};
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (exponents[i] == 0) continue;
        if (!first) os << ' ';
        os << names[i];
        if (exponents[i] != 1) os << '^' << exponents[i];
        first = false;
    }
    return first ? "1" : os.str();
}

namespace dims {
Dimension joule() {
    return Dimension::kilogram() * Dimension::metre().pow(2) / Dimension::second().pow(2);
}
Dimension tesla() {
    // T = kg / (C s)
    return Dimension::kilogram() / (Dimension::coulomb() * Dimension::second());
}
Dimension action() { return joule() * Dimension::second(); }
}  // namespace dims

bool dipole_dimension_check(const TorusGeometry& geom, double B) {
    if (B < 0.0) throw InvalidArgument("dipole_dimension_check: B must be >= 0");
    (void)geom;  // dimensions do not depend on the values

    const Dimension m = Dimension::metre();
    const Dimension C = Dimension::coulomb();
    // beta^2 = (r/4) [hbar^2/(R-r)^3 + e^2 B^2 (R-r)]
    const Dimension curvature_term = m * dims::action().pow(2) / m.pow(3);
    const Dimension field_term = m * C.pow(2) * dims::tesla().pow(2) * m;
    if (!(curvature_term == field_term)) return false;

    Dimension beta;
    try {
        beta = curvature_term.sqrt();
    } catch (const InvalidArgument&) {
        return false;
    }
    const Dimension spread = dims::action() / (m * beta);
    if (!(spread == Dimension::dimensionless())) return false;
    const Dimension mu = C * m * spread;
    return mu == C * m;
}

}  // namespace nanotorus
