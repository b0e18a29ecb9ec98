#pragma once

// Physical constants, the internal unit system, and the device/field value
// types shared by every stage of the simulator.

#include <array>
#include <stdexcept>
#include <string>

namespace nanotorus {

/// Base class for all errors raised by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// CODATA 2018 values in SI.
struct PhysicalConstants {
    static constexpr double hbar = 1.054571817e-34;           // J s
    static constexpr double electron_charge = 1.602176634e-19; // C
    static constexpr double electron_mass = 9.1093837015e-31;  // kg
};

inline constexpr double kAngstrom = 1e-10;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Torus with minor radius r (around the tube) and major radius R (around
/// the symmetry axis), plus the carrier effective mass m* = ratio * m0.
class TorusGeometry {
public:
    TorusGeometry(double r_minor, double R_major, double effective_mass_ratio = 0.3);

    static TorusGeometry from_angstrom(double r_minor, double R_major,
                                       double effective_mass_ratio = 0.3);

    double r_minor() const { return r_minor_; }
    double R_major() const { return R_major_; }
    double effective_mass_ratio() const { return mass_ratio_; }
    double effective_mass() const { return mass_ratio_ * PhysicalConstants::electron_mass; }
    /// R / r, always > 1.
    double aspect() const { return R_major_ / r_minor_; }

private:
    double r_minor_;
    double R_major_;
    double mass_ratio_;
};

/// Static magnetic field plus the RF drive E(t) = E0 cos(omega_rf t + phi).
class FieldConfig {
public:
    FieldConfig() = default;
    FieldConfig(double B, double E0, double omega_rf = 0.0, double phi = 0.0);

    double B() const { return B_; }
    double E0() const { return E0_; }
    double omega_rf() const { return omega_rf_; }
    /// Always in [0, 2 pi).
    double phi() const { return phi_; }

private:
    double B_ = 0.0;
    double E0_ = 0.0;
    double omega_rf_ = 0.0;
    double phi_ = 0.0;
};

/// Wraps an angle into [0, 2 pi).
double wrap_angle(double angle);

enum class Quantity { energy, length, time, angular_frequency };

/// Scales for the dimensionless internal representation. Energies are
/// measured in hbar^2/(2 m* r^2), lengths in r and times in hbar/energy.
class UnitSystem {
public:
    UnitSystem(double energy_scale, double length_scale, double time_scale);

    static UnitSystem for_geometry(const TorusGeometry& geom);
    static UnitSystem si() { return {1.0, 1.0, 1.0}; }

    double energy_scale() const { return energy_; }
    double length_scale() const { return length_; }
    double time_scale() const { return time_; }

    double to_internal(double value, Quantity q) const;
    double from_internal(double value, Quantity q) const;

private:
    double scale_of(Quantity q) const;

    double energy_;
    double length_;
    double time_;
};

/// hbar^2 / (2 m* r^2) in joules.
double energy_scale_of(const TorusGeometry& geom);

/// Dimensionless magnetic coupling e B r^2 / hbar. In internal units the
/// magnetic potential is b^2 (rho + cos)^2 / 4 - m b.
double magnetic_coupling(const TorusGeometry& geom, double B);

/// Dimensionless electric coupling e E r / (hbar^2 / 2 m* r^2).
double electric_coupling(const TorusGeometry& geom, double E);

/// Exponents of (kg, m, s, C). Used to reproduce the dipole dimensional
/// analysis through the same unit bookkeeping as the rest of the code.
struct Dimension {
    std::array<int, 4> exponents{0, 0, 0, 0};

    static Dimension kilogram() { return {{1, 0, 0, 0}}; }
    static Dimension metre() { return {{0, 1, 0, 0}}; }
    static Dimension second() { return {{0, 0, 1, 0}}; }
    static Dimension coulomb() { return {{0, 0, 0, 1}}; }
    static Dimension dimensionless() { return {}; }

    friend Dimension operator*(Dimension a, const Dimension& b);
    friend Dimension operator/(Dimension a, const Dimension& b);
    friend bool operator==(const Dimension&, const Dimension&) = default;
    Dimension pow(int p) const;
    /// Throws InvalidArgument if any exponent is odd.
    Dimension sqrt() const;
    std::string to_string() const;
};

namespace dims {
Dimension joule();
Dimension tesla();
Dimension action();
}  // namespace dims

/// True iff hbar/(r |beta|) is dimensionless and mu = e r [...] carries C m.
/// B enters only to check that both terms of beta^2 have the same dimension.
bool dipole_dimension_check(const TorusGeometry& geom, double B);

}  // namespace nanotorus
