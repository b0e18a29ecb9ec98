#pragma once

// Curvature-induced confinement potential on the nanotorus tube, with the
// static electric and magnetic contributions. All energies are returned in
// internal units of hbar^2 / (2 m* r^2).

#include <iosfwd>
#include <vector>

#include "nanotorus/model.hpp"

namespace nanotorus {

struct PotentialParams {
    TorusGeometry geom;
    double B = 0.0;         // T
    double E_static = 0.0;  // V/m, along the symmetry axis
    int m_orbital = 0;

    PotentialParams(TorusGeometry g, double B_ = 0.0, double E_ = 0.0, int m = 0);
};

double v_bare(double theta, const PotentialParams& params);
double v_electric(double theta, const PotentialParams& params);
double v_magnetic(double theta, const PotentialParams& params);
double v_total(double theta, const PotentialParams& params);

/// Individual potential terms evaluated from (cos theta, sin theta) directly,
/// so callers expanding around theta = pi can pass exactly mirrored values.
struct PotentialTerms {
    double bare;
    double electric;
    double magnetic;
    double total() const { return bare + electric + magnetic; }
};
PotentialTerms potential_terms(double cos_theta, double sin_theta, const PotentialParams& params);

struct PotentialProfile {
    std::vector<double> theta;
    std::vector<double> bare;
    std::vector<double> electric;
    std::vector<double> magnetic;
    std::vector<double> total;
    PotentialParams params;
};

/// Uniform periodic grid theta_i = 2 pi i / n on [0, 2 pi). n_points >= 16.
std::vector<double> periodic_grid(int n_points);

PotentialProfile sample_profile(const PotentialParams& params, int n_points);

/// Columns theta,V_bare,V_E,V_B,V_total; theta in rad, energies in joules.
void write_profile_csv(std::ostream& os, const PotentialProfile& profile);

}  // namespace nanotorus
