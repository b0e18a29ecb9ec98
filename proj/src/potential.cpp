#include "nanotorus/potential.hpp"

#include <cmath>
#include <ostream>

#include "nanotorus/format.hpp"

namespace nanotorus {

PotentialParams::PotentialParams(TorusGeometry g, double B_, double E_, int m)
    : geom(g), B(B_), E_static(E_), m_orbital(m) {
    if (!std::isfinite(B_) || !std::isfinite(E_)) {
        throw InvalidArgument("potential: fields must be finite");
    }
}

PotentialTerms potential_terms(double c, double s, const PotentialParams& p) {
    const double rho = p.geom.aspect();
    const double m = p.m_orbital;
    const double d = rho + c;

    const double bracket = -0.25 * rho * rho + m * m + 0.25 * s * s + 0.5 * (rho * c + 1.0);
    const double b = magnetic_coupling(p.geom, p.B);

    PotentialTerms t{};
    t.bare = bracket / (d * d);
    t.electric = -electric_coupling(p.geom, p.E_static) * s;
    t.magnetic = 0.25 * b * b * d * d - m * b;
    return t;
}

double v_bare(double theta, const PotentialParams& params) {
    return potential_terms(std::cos(theta), std::sin(theta), params).bare;
}

double v_electric(double theta, const PotentialParams& params) {
    return potential_terms(std::cos(theta), std::sin(theta), params).electric;
}

double v_magnetic(double theta, const PotentialParams& params) {
    return potential_terms(std::cos(theta), std::sin(theta), params).magnetic;
}

double v_total(double theta, const PotentialParams& params) {
    return potential_terms(std::cos(theta), std::sin(theta), params).total();
}

std::vector<double> periodic_grid(int n_points) {
    if (n_points < 16) throw InvalidArgument("potential: n_points must be >= 16");
    std::vector<double> grid(static_cast<std::size_t>(n_points));
    const double h = kTwoPi / n_points;
    for (int i = 0; i < n_points; ++i) grid[static_cast<std::size_t>(i)] = h * i;
    return grid;
}

PotentialProfile sample_profile(const PotentialParams& params, int n_points) {
    PotentialProfile prof{.theta = periodic_grid(n_points),
                          .bare = {},
                          .electric = {},
                          .magnetic = {},
                          .total = {},
                          .params = params};
    const auto n = prof.theta.size();
    prof.bare.resize(n);
    prof.electric.resize(n);
    prof.magnetic.resize(n);
    prof.total.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = potential_terms(std::cos(prof.theta[i]), std::sin(prof.theta[i]), params);
        prof.bare[i] = t.bare;
        prof.electric[i] = t.electric;
        prof.magnetic[i] = t.magnetic;
        prof.total[i] = t.total();
    }
    return prof;
}

void write_profile_csv(std::ostream& os, const PotentialProfile& profile) {
    const double scale = energy_scale_of(profile.params.geom);
    os << "theta,V_bare,V_E,V_B,V_total\n";
    for (std::size_t i = 0; i < profile.theta.size(); ++i) {
        os << format_double(profile.theta[i]) << ',' << format_double(profile.bare[i] * scale)
           << ',' << format_double(profile.electric[i] * scale) << ','
           << format_double(profile.magnetic[i] * scale) << ','
           << format_double(profile.total[i] * scale) << '\n';
    }
}

}  // namespace nanotorus
