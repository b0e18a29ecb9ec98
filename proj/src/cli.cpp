#include "nanotorus/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "nanotorus/format.hpp"

namespace nanotorus::cli {

using nlohmann::json;

const char* const kVersion = "0.1.0";

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

double parse_number(const std::string& text) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("'" + text + "' is not a number");
    }
    if (used != text.size()) throw InvalidArgument("'" + text + "' is not a number");
    return value;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error("invalid configuration: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

Range Range::parse(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() == 1) return {parse_number(parts[0]), parse_number(parts[0]), 1};
    if (parts.size() != 3) throw InvalidArgument("range '" + text + "' must be a:b:n");
    const double n = parse_number(parts[2]);
    if (n != std::floor(n) || n < 2 || n > 1e6) {
        throw InvalidArgument("range '" + text + "': n must be an integer in [2, 1e6]");
    }
    return {parse_number(parts[0]), parse_number(parts[1]), static_cast<int>(n)};
}

std::vector<double> Range::values() const {
    if (count == 1) return {start};
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        v[static_cast<std::size_t>(i)] =
            i == count - 1 ? stop : start + (stop - start) * i / (count - 1);
    }
    return v;
}

std::string Range::to_string() const {
    if (count == 1) return format_double(start);
    return format_double(start) + ":" + format_double(stop) + ":" + std::to_string(count);
}

TorusGeometry RunConfig::geometry() const {
    return TorusGeometry::from_angstrom(r_angstrom, R_angstrom, mass_ratio);
}

Discretization RunConfig::discretization() const {
    return {n_points, stencil == 4 ? StencilOrder::fourth : StencilOrder::second};
}

WindowSearch RunConfig::window_search() const {
    WindowSearch w;
    w.B_lo = window_lo;
    w.B_hi = window_hi;
    w.scan_points = window_scan_points;
    w.tolerance = window_tolerance;
    w.n_levels = n_levels;
    w.criteria.localization_threshold = localization_threshold;
    return w;
}

void RunConfig::validate() const {
    std::vector<std::string> v;
    auto check = [&v](bool ok, const std::string& message) {
        if (!ok) v.push_back(message);
    };
    check(r_angstrom > 0.0, "geometry.r_angstrom must be > 0");
    check(R_angstrom > r_angstrom, "geometry requires r < R (got r=" + format_double(r_angstrom) +
                                       ", R=" + format_double(R_angstrom) + ")");
    check(mass_ratio > 0.0, "geometry.mass_ratio must be > 0");
    check(B >= 0.0 && std::isfinite(B), "field.B must be finite and >= 0");
    check(E0 >= 0.0 && std::isfinite(E0), "field.E0 must be finite and >= 0");
    check(std::isfinite(E_static), "field.E_static must be finite");
    check(!omega_rf || (*omega_rf > 0.0 && std::isfinite(*omega_rf)),
          "field.omega_rf must be > 0 when given");
    check(std::isfinite(phi), "field.phi must be finite");
    check(n_points >= 64, "discretization.n_points must be >= 64");
    check(stencil == 2 || stencil == 4, "discretization.stencil must be 2 or 4");
    check(!m_list.empty(), "spectrum.m_list must not be empty");
    check(n_levels >= 1, "spectrum.n_levels must be >= 1");
    check(localization_threshold > 0.0 && localization_threshold <= 1.0,
          "spectrum.localization_threshold must lie in (0, 1]");
    check(B_range.count >= 2 && B_range.stop > B_range.start && B_range.start >= 0.0,
          "sweep.B_range must be increasing with >= 2 points and start >= 0");
    check(window_lo >= 0.0 && window_hi > window_lo, "window requires 0 <= B_lo < B_hi");
    check(window_scan_points >= 3, "window.scan_points must be >= 3");
    check(window_tolerance > 0.0, "window.tolerance must be > 0");
    check(theta > 0.0 && theta <= kPi, "evolve.theta must lie in (0, pi]");
    check(eta >= 0.0 && eta <= kPi, "evolve.eta must lie in [0, pi]");
    check(trajectory_samples >= 2, "evolve.samples must be >= 2");
    check(tolerance >= 1e-12 && tolerance <= 1e-6, "gate.tolerance must lie in [1e-12, 1e-6]");
    if (gate.rfind("prep:", 0) != 0) {
        try {
            const auto g = parse_gate(gate);
            check(phase_realization == PhaseRealization::virtual_frame ||
                      g.kind != GateKind::phase || wait_detuning != 0.0,
                  "gate.wait_detuning must be nonzero for detuned_wait phase gates");
        } catch (const Error& e) {
            v.emplace_back(std::string("gate.name: ") + e.what());
        }
    } else {
        const auto args = split(gate.substr(5), ',');
        check(args.size() == 2, "gate.name prep:THETA,ETA needs two angles");
    }
    check(scan == "dB" || scan == "dE", "errors.scan must be dB or dE");
    const auto deltas = delta_range.values();
    check(delta_range.count == 1 || delta_range.stop != delta_range.start,
          "errors.range must span a nonzero interval");
    bool deltas_ok = true;
    for (double d : deltas) deltas_ok = deltas_ok && std::isfinite(d) && d > -1.0;
    check(deltas_ok, "errors.range values must be finite and > -1");
    check(std::isfinite(delta_B_rel) && delta_B_rel > -1.0, "errors.delta_B_rel must be > -1");
    check(std::isfinite(delta_E_rel) && delta_E_rel > -1.0, "errors.delta_E_rel must be > -1");
    check(sweep_over == "E0" || sweep_over == "B0", "errors.over must be E0 or B0");
    check(sweep_range.start > 0.0 && (sweep_range.count == 1 || sweep_range.stop > sweep_range.start),
          "errors.sweep_range must be positive and increasing");
    check(samples >= 1, "errors.samples must be >= 1");
    check(!output_dir.empty(), "output_dir must not be empty");
    if (!v.empty()) throw ConfigError(std::move(v));
}

RunConfig preset(const std::string& name) {
    RunConfig c;
    c.preset = name;
    if (name == "fig3a") {
        c.B = 0.0;
        c.E0 = 0.0;
    } else if (name == "fig3b") {
        c.R_angstrom = 3600.0;
        c.B = 0.0;
        c.E0 = 0.0;
        c.B_range = {0.0, 0.8, 81};
    } else if (name != "fig5") {
        throw ConfigError({"unknown preset '" + name + "' (known: " + join(preset_names(), ", ") + ")"});
    }
    return c;
}

std::vector<std::string> preset_names() { return {"fig3a", "fig3b", "fig5"}; }

namespace {

using Setter = std::function<void(const json&)>;

Setter number(double& field) {
    return [&field](const json& v) {
        if (!v.is_number()) throw InvalidArgument("expected a number");
        field = v.get<double>();
    };
}

Setter integer(int& field) {
    return [&field](const json& v) {
        if (!v.is_number_integer()) throw InvalidArgument("expected an integer");
        field = v.get<int>();
    };
}

Setter text(std::string& field) {
    return [&field](const json& v) {
        if (!v.is_string()) throw InvalidArgument("expected a string");
        field = v.get<std::string>();
    };
}

Setter range(Range& field) {
    return [&field](const json& v) {
        if (!v.is_string()) throw InvalidArgument("expected a string a:b:n");
        field = Range::parse(v.get<std::string>());
    };
}

PhaseRealization phase_realization_from_string(const std::string& name) {
    if (name == "virtual") return PhaseRealization::virtual_frame;
    if (name == "detuned_wait") return PhaseRealization::detuned_wait;
    throw InvalidArgument("phase realization must be virtual or detuned_wait");
}

std::string_view to_string(PhaseRealization r) {
    return r == PhaseRealization::virtual_frame ? "virtual" : "detuned_wait";
}

void apply_section(const json& obj, const std::string& section,
                   const std::map<std::string, Setter>& setters,
                   std::vector<std::string>& violations) {
    if (!obj.is_object()) {
        violations.push_back(section + ": expected an object");
        return;
    }
    for (const auto& [key, value] : obj.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) {
            violations.push_back("unknown key '" + section + "." + key + "'");
            continue;
        }
        try {
            it->second(value);
        } catch (const std::exception& e) {
            violations.push_back(section + "." + key + ": " + e.what());
        }
    }
}

}  // namespace

RunConfig apply_json(RunConfig base, const json& doc) {
    std::vector<std::string> violations;
    if (!doc.is_object()) throw ConfigError({"configuration must be a JSON object"});
    if (doc.contains("preset")) {
        if (!doc["preset"].is_string()) throw ConfigError({"preset: expected a string"});
        base = preset(doc["preset"].get<std::string>());
    }
    RunConfig& c = base;

    const std::map<std::string, std::map<std::string, Setter>> sections{
        {"geometry",
         {{"r_angstrom", number(c.r_angstrom)},
          {"R_angstrom", number(c.R_angstrom)},
          {"mass_ratio", number(c.mass_ratio)}}},
        {"field",
         {{"B", number(c.B)},
          {"E0", number(c.E0)},
          {"E_static", number(c.E_static)},
          {"omega_rf",
           [&c](const json& v) {
               if (v.is_null()) {
                   c.omega_rf.reset();
               } else if (v.is_number()) {
                   c.omega_rf = v.get<double>();
               } else {
                   throw InvalidArgument("expected a number or null");
               }
           }},
          {"phi", number(c.phi)}}},
        {"discretization", {{"n_points", integer(c.n_points)}, {"stencil", integer(c.stencil)}}},
        {"spectrum",
         {{"m_list",
           [&c](const json& v) {
               if (!v.is_array()) throw InvalidArgument("expected an array of integers");
               std::vector<int> m;
               for (const auto& x : v) {
                   if (!x.is_number_integer()) throw InvalidArgument("expected integers");
                   m.push_back(x.get<int>());
               }
               c.m_list = std::move(m);
           }},
          {"n_levels", integer(c.n_levels)},
          {"localization_threshold", number(c.localization_threshold)}}},
        {"sweep", {{"B_range", range(c.B_range)}}},
        {"window",
         {{"B_lo", number(c.window_lo)},
          {"B_hi", number(c.window_hi)},
          {"scan_points", integer(c.window_scan_points)},
          {"tolerance", number(c.window_tolerance)}}},
        {"reduction",
         {{"source",
           [&c](const json& v) {
               if (!v.is_string()) throw InvalidArgument("expected a string");
               c.source = coefficient_source_from_string(v.get<std::string>());
           }}}},
        {"evolve",
         {{"theta", number(c.theta)},
          {"eta", number(c.eta)},
          {"samples", integer(c.trajectory_samples)},
          {"leakage",
           [&c](const json& v) {
               if (!v.is_boolean()) throw InvalidArgument("expected a boolean");
               c.leakage = v.get<bool>();
           }}}},
        {"gate",
         {{"name", text(c.gate)},
          {"mode",
           [&c](const json& v) {
               if (!v.is_string()) throw InvalidArgument("expected a string");
               c.mode = evolution_mode_from_string(v.get<std::string>());
           }},
          {"tolerance", number(c.tolerance)},
          {"phase_realization",
           [&c](const json& v) {
               if (!v.is_string()) throw InvalidArgument("expected a string");
               c.phase_realization = phase_realization_from_string(v.get<std::string>());
           }},
          {"wait_detuning", number(c.wait_detuning)}}},
        {"errors",
         {{"scan", text(c.scan)},
          {"range", range(c.delta_range)},
          {"delta_B_rel", number(c.delta_B_rel)},
          {"delta_E_rel", number(c.delta_E_rel)},
          {"over", text(c.sweep_over)},
          {"sweep_range", range(c.sweep_range)},
          {"samples", integer(c.samples)},
          {"seed",
           [&c](const json& v) {
               if (!v.is_number_unsigned()) throw InvalidArgument("expected a non-negative integer");
               c.seed = v.get<std::uint64_t>();
           }}}},
    };

    for (const auto& [key, value] : doc.items()) {
        if (key == "preset") continue;
        if (key == "output_dir") {
            if (value.is_string()) {
                c.output_dir = value.get<std::string>();
            } else {
                violations.emplace_back("output_dir: expected a string");
            }
            continue;
        }
        const auto it = sections.find(key);
        if (it == sections.end()) {
            violations.push_back("unknown key '" + key + "'");
            continue;
        }
        apply_section(value, key, it->second, violations);
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return base;
}

json to_json(const RunConfig& c) {
    return {
        {"preset", c.preset},
        {"geometry", {{"r_angstrom", c.r_angstrom}, {"R_angstrom", c.R_angstrom}, {"mass_ratio", c.mass_ratio}}},
        {"field",
         {{"B", c.B},
          {"E0", c.E0},
          {"E_static", c.E_static},
          {"omega_rf", c.omega_rf ? json(*c.omega_rf) : json(nullptr)},
          {"phi", c.phi}}},
        {"discretization", {{"n_points", c.n_points}, {"stencil", c.stencil}}},
        {"spectrum",
         {{"m_list", c.m_list},
          {"n_levels", c.n_levels},
          {"localization_threshold", c.localization_threshold}}},
        {"sweep", {{"B_range", c.B_range.to_string()}}},
        {"window",
         {{"B_lo", c.window_lo},
          {"B_hi", c.window_hi},
          {"scan_points", c.window_scan_points},
          {"tolerance", c.window_tolerance}}},
        {"reduction", {{"source", std::string(to_string(c.source))}}},
        {"evolve",
         {{"theta", c.theta}, {"eta", c.eta}, {"samples", c.trajectory_samples}, {"leakage", c.leakage}}},
        {"gate",
         {{"name", c.gate},
          {"mode", std::string(to_string(c.mode))},
          {"tolerance", c.tolerance},
          {"phase_realization", std::string(to_string(c.phase_realization))},
          {"wait_detuning", c.wait_detuning}}},
        {"errors",
         {{"scan", c.scan},
          {"range", c.delta_range.to_string()},
          {"delta_B_rel", c.delta_B_rel},
          {"delta_E_rel", c.delta_E_rel},
          {"over", c.sweep_over},
          {"sweep_range", c.sweep_range.to_string()},
          {"samples", c.samples},
          {"seed", c.seed}}},
        {"output_dir", c.output_dir},
    };
}

GateSpec parse_gate(const std::string& text) {
    if (text == "hadamard") return GateSpec::hadamard();
    if (text == "identity") return GateSpec::identity();
    if (text.rfind("phase:", 0) == 0) {
        const double eta = parse_number(text.substr(6));
        if (!(eta >= 0.0 && eta < kTwoPi)) throw InvalidArgument("phase angle must lie in [0, 2 pi)");
        return GateSpec::phase(eta);
    }
    if (text.rfind("rotation:", 0) == 0) {
        const auto parts = split(text.substr(9), ':');
        const auto axis = parts.empty() ? std::vector<std::string>{} : split(parts[0], ',');
        if (parts.size() != 2 || axis.size() != 3) {
            throw InvalidArgument("rotation gate must be rotation:X,Y,Z:ANGLE");
        }
        return GateSpec::rotation(
            {parse_number(axis[0]), parse_number(axis[1]), parse_number(axis[2])},
            parse_number(parts[1]));
    }
    throw InvalidArgument("unknown gate '" + text +
                          "' (expected hadamard, identity, phase:ETA, rotation:X,Y,Z:ANGLE or "
                          "prep:THETA,ETA)");
}

namespace {

std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        try {
            t = static_cast<std::time_t>(std::stoll(epoch));
        } catch (const std::exception&) {
        }
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

json RunManifest::to_json() const {
    return {
        {"artifact", artifact},
        {"subcommand", subcommand},
        {"software", {{"name", "nanotorus"}, {"version", kVersion}}},
        {"created_utc", timestamp_utc()},
        {"config", config},
        {"units",
         {{"energy_scale_J", units.energy_scale()},
          {"length_scale_m", units.length_scale()},
          {"time_scale_s", units.time_scale()}}},
        {"warnings", warnings},
    };
}

namespace {

namespace fs = std::filesystem;

/// Shared state for one subcommand invocation.
class Session {
public:
    Session(std::string subcommand, RunConfig config)
        : subcommand_(std::move(subcommand)), config_(std::move(config)) {}

    const RunConfig& config() const { return config_; }
    void warn(const std::string& w) { warnings_.push_back(w); }

    /// Writes `content` to output_dir/name and its manifest. `columns` maps
    /// data columns or fields to SI units.
    void emit(const std::string& name, const std::string& content, const json& columns,
              const json& summary = json::object()) {
        const fs::path dir(config_.output_dir);
        fs::create_directories(dir);
        const fs::path path = dir / name;
        write_file(path, content);

        RunManifest m;
        m.artifact = name;
        m.subcommand = subcommand_;
        m.config = cli::to_json(config_);
        m.warnings = warnings_;
        m.units = UnitSystem::for_geometry(config_.geometry());
        json doc = m.to_json();
        doc["columns"] = columns;
        doc["summary"] = summary;
        write_file(dir / (name + ".manifest.json"), doc.dump(2) + "\n");
        std::cout << path.string() << '\n';
    }

private:
    static void write_file(const fs::path& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open '" + path.string() + "' for writing");
        out << content;
        if (!out) throw Error("failed writing '" + path.string() + "'");
    }

    std::string subcommand_;
    RunConfig config_;
    std::vector<std::string> warnings_;
};

json complex_matrix(const Eigen::Matrix2cd& u) {
    json rows = json::array();
    for (int i = 0; i < 2; ++i) {
        json row = json::array();
        for (int j = 0; j < 2; ++j) row.push_back({u(i, j).real(), u(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

json sequence_json(const PulseSequence& seq) {
    json out = json::array();
    for (const auto& s : seq.segments) {
        out.push_back({{"rabi_rad_per_s", s.rabi},
                       {"detuning_rad_per_s", s.detuning},
                       {"phase_rad", s.phase},
                       {"duration_s", s.duration},
                       {"frame_phase_rad", s.frame_phase}});
    }
    return out;
}

BoundCriteria criteria_of(const RunConfig& c) {
    BoundCriteria b;
    b.localization_threshold = c.localization_threshold;
    return b;
}

void add_qubit_warnings(Session& session, const QubitParameters& q, double E0) {
    if (q.spread_warning) {
        session.warn("zero-point spread s = " + format_double(q.zero_point_spread) +
                     " >= 1: small-angle expansion of sin(theta) is not valid");
    }
    if (q.anharmonicity_warning) {
        session.warn("anharmonicity ratio " + format_double(q.anharmonicity_ratio) +
                     " < 1e-6: second transition not resolvable");
    }
    const double ratio = q.rabi_frequency(E0) / q.omega;
    if (ratio >= 1e-2) {
        session.warn("Omega/omega = " + format_double(ratio) +
                     " >= 1e-2: outside the resonant-drive regime of the RWA");
    }
}

void cmd_potential(Session& s) {
    const auto& c = s.config();
    const PotentialParams params(c.geometry(), c.B, c.E_static, c.m_list.front());
    std::ostringstream out;
    write_profile_csv(out, sample_profile(params, c.n_points));
    s.emit("potential.csv", out.str(),
           {{"theta", "rad"}, {"V_bare", "J"}, {"V_E", "J"}, {"V_B", "J"}, {"V_total", "J"}});
}

void cmd_spectrum(Session& s) {
    const auto& c = s.config();
    const auto geom = c.geometry();
    const auto disc = c.discretization();
    const double scale = energy_scale_of(geom);

    json sectors = json::array();
    std::vector<Spectrum> spectra;
    for (int m : c.m_list) {
        spectra.push_back(solve_spectrum(PotentialParams(geom, c.B, c.E_static, m), disc,
                                         c.n_levels, criteria_of(c)));
        const auto& sp = spectra.back();
        json states = json::array();
        for (const auto& st : sp.states) {
            states.push_back({{"level", st.level},
                              {"energy_J", st.energy * scale},
                              {"localization", st.localization},
                              {"bound", st.bound}});
        }
        sectors.push_back({{"m", m},
                           {"barrier_energy_J", sp.barrier_energy * scale},
                           {"bound_count", sp.bound_count()},
                           {"states", states}});
    }
    const json report = {{"B_T", c.B}, {"E_static_V_per_m", c.E_static}, {"sectors", sectors}};
    s.emit("spectrum.json", report.dump(2) + "\n",
           {{"energy_J", "J"}, {"barrier_energy_J", "J"}, {"localization", "1"}});

    std::ostringstream wf;
    wf << "theta";
    for (const auto& sp : spectra) {
        for (const auto& st : sp.states) wf << ",m" << st.m_orbital << "_n" << st.level;
    }
    wf << '\n';
    const double h = disc.spacing();
    for (int i = 0; i < disc.n_points; ++i) {
        wf << format_double(i * h);
        for (const auto& sp : spectra) {
            for (const auto& st : sp.states) wf << ',' << format_double(st.wavefunction[i]);
        }
        wf << '\n';
    }
    s.emit("spectrum_wavefunctions.csv", wf.str(),
           {{"theta", "rad"}, {"m*_n*", "rad^-1/2, normalized to sum chi^2 h = 1"}});
}

void cmd_sweep_b(Session& s) {
    const auto& c = s.config();
    SweepRequest request;
    request.axis = FieldAxis::magnetic;
    request.values = c.B_range.values();
    request.m_list = c.m_list;
    request.fixed_field = c.E_static;
    request.n_levels = c.n_levels;
    request.criteria = criteria_of(c);
    const auto sweep = sweep_field(c.geometry(), request, c.discretization());

    std::ostringstream out;
    write_sweep_csv(out, sweep, FieldAxis::magnetic);
    std::ostringstream counts;
    counts << "B,m,bound_count\n";
    json runs = json::array();
    double run_start = -1.0, last = 0.0;
    for (const auto& p : sweep) {
        const int n = p.spectrum.bound_count();
        counts << format_double(p.field) << ',' << p.spectrum.params.m_orbital << ',' << n << '\n';
        if (p.spectrum.params.m_orbital != 0) continue;
        if (n == 2 && run_start < 0.0) run_start = p.field;
        if (n != 2 && run_start >= 0.0) {
            runs.push_back({{"B_first_T", run_start}, {"B_last_T", last}});
            run_start = -1.0;
        }
        last = p.field;
    }
    if (run_start >= 0.0) runs.push_back({{"B_first_T", run_start}, {"B_last_T", last}});
    if (runs.empty()) s.warn("no sampled B has exactly two bound m=0 states");

    const json summary = {{"two_bound_state_runs_m0", runs}};
    s.emit("sweep_b.csv", out.str(),
           {{"B", "T"}, {"m", "1"}, {"n", "1"}, {"energy", "J"}, {"bound", "0/1"}, {"localization", "1"}},
           summary);
    s.emit("bound_counts.csv", counts.str(), {{"B", "T"}, {"m", "1"}, {"bound_count", "1"}}, summary);
}

void cmd_window(Session& s) {
    const auto& c = s.config();
    const auto w = initialization_window(c.geometry(), c.discretization(), c.window_search());
    const json report = {{"B_min_T", w.B_min},
                         {"B_max_T", w.B_max},
                         {"tolerance_T", c.window_tolerance},
                         {"contains_B", w.contains(c.B)},
                         {"B_T", c.B}};
    if (!w.contains(c.B)) s.warn("configured B is outside the initialization window");
    s.emit("window.json", report.dump(2) + "\n", {{"B_min_T", "T"}, {"B_max_T", "T"}});
}

json coefficients_json(const OscillatorCoefficients& k, const TorusGeometry& geom) {
    const double scale = energy_scale_of(geom);
    return {{"beta_sq", k.beta_squared(geom)},
            {"delta", k.quartic * scale},
            {"epsilon", k.constant * scale}};
}

void cmd_qubit_params(Session& s) {
    const auto& c = s.config();
    const auto geom = c.geometry();
    const auto numerical = coefficients_numerical(geom, c.B);
    const auto paper = coefficients_paper(geom, c.B);
    const auto& chosen = c.source == CoefficientSource::paper_formula ? paper : numerical;
    const auto q = qubit_parameters(chosen, geom, c.B);
    add_qubit_warnings(s, q, c.E0);
    const double scale = energy_scale_of(geom);

    json report = coefficients_json(chosen, geom);
    report.update({{"source", std::string(to_string(chosen.source))},
                   {"B_T", c.B},
                   {"E0_V_per_m", c.E0},
                   {"omega", q.omega},
                   {"ground_energy", q.ground_energy},
                   {"alpha", q.alpha},
                   {"mu", q.mu},
                   {"Omega", q.rabi_frequency(c.E0)},
                   {"Omega_over_omega", q.rabi_frequency(c.E0) / q.omega},
                   {"anharmonicity_ratio", q.anharmonicity_ratio},
                   {"zero_point_spread", q.zero_point_spread},
                   {"sources",
                    {{"numerical_taylor", coefficients_json(numerical, geom)},
                     {"paper_formula", coefficients_json(paper, geom)}}},
                   {"epsilon_discrepancy",
                    {{"numerical_minus_paper", (numerical.constant - paper.constant) * scale},
                     {"predicted_cross_term_sign_flip", predicted_constant_discrepancy(geom)}}},
                   {"beta_sq_relative_difference",
                    numerical.quadratic / paper.quadratic - 1.0}});
    s.emit("qubit_params.json", report.dump(2) + "\n",
           {{"beta_sq", "kg^2 m^2 s^-2"},
            {"delta", "J rad^-4"},
            {"epsilon", "J"},
            {"omega", "rad/s"},
            {"ground_energy", "J"},
            {"alpha", "J"},
            {"mu", "C m"},
            {"Omega", "rad/s"},
            {"zero_point_spread", "rad"}});
}

void cmd_evolve(Session& s) {
    const auto& c = s.config();
    const auto q = qubit_at(c.geometry(), c.B, c.source);
    add_qubit_warnings(s, q, c.E0);
    const double rabi = q.rabi_frequency(c.E0);
    if (!(rabi > 0.0)) throw ConfigError({"evolve requires field.E0 > 0"});
    auto pulse = prepare_state(c.theta, c.eta, rabi).segments.front();
    const double omega_rf = c.omega_rf.value_or(q.omega);
    pulse.detuning = q.omega - omega_rf;

    if (c.leakage && c.mode == EvolutionMode::rwa) {
        throw ConfigError({"evolve.leakage requires gate.mode labframe"});
    }
    std::vector<TrajectorySample> samples;
    if (c.mode == EvolutionMode::rwa) {
        samples = trajectory(QuantumState::basis(2, 0), pulse, c.trajectory_samples);
    } else {
        const auto ladder = c.leakage ? three_level_ladder(q, c.E0, omega_rf, pulse.phase)
                                      : two_level_ladder(q.omega, rabi, omega_rf, pulse.phase);
        const int dim = ladder.dim();
        auto to_rotating = [&](const Eigen::VectorXcd& psi, double t) {
            Eigen::VectorXcd out = psi;
            for (int j = 1; j < dim; ++j) out(j) *= std::polar(1.0, j * omega_rf * t);
            return QuantumState::unchecked(out);
        };
        QuantumState lab = QuantumState::basis(dim, 0);
        samples.push_back({0.0, to_rotating(lab.amplitudes(), 0.0)});
        double t_prev = 0.0;
        for (int k = 1; k < c.trajectory_samples; ++k) {
            const double t = pulse.duration * k / (c.trajectory_samples - 1);
            // Continue from t_prev by shifting the drive phase to that origin.
            LadderModel shifted = ladder;
            shifted.phase = ladder.phase + omega_rf * t_prev;
            lab = integrate_ladder(lab, shifted, t - t_prev, {.tolerance = c.tolerance, .observer = {}})
                      .state;
            samples.push_back({t, to_rotating(lab.amplitudes(), t)});
            t_prev = t;
        }
    }
    std::ostringstream out;
    write_trajectory_csv(out, samples);
    json columns = {{"t", "s"}, {"x", "1"}, {"y", "1"}, {"z", "1"}, {"p0", "1"}, {"p1", "1"}};
    if (c.leakage) columns["p2"] = "1";
    s.emit("trajectory.csv", out.str(), columns,
           {{"pulse", sequence_json({{pulse}})}, {"frame", "rotating at omega_rf"}});
}

QubitParameters checked_qubit(Session& s) {
    const auto& c = s.config();
    const auto q = qubit_at(c.geometry(), c.B, c.source);
    add_qubit_warnings(s, q, c.E0);
    if (!(q.rabi_frequency(c.E0) > 0.0)) throw ConfigError({"gate synthesis requires field.E0 > 0"});
    return q;
}

PhaseGateOptions phase_options_of(const RunConfig& c) {
    return {c.phase_realization, c.wait_detuning};
}

void cmd_gate(Session& s) {
    const auto& c = s.config();
    const auto q = checked_qubit(s);
    const double rabi = q.rabi_frequency(c.E0);

    PulseSequence seq;
    json report;
    std::optional<Eigen::Vector2cd> target;
    std::optional<GateSpec> gate;
    if (c.gate.rfind("prep:", 0) == 0) {
        const auto args = split(c.gate.substr(5), ',');
        const double theta = parse_number(args.at(0)), eta = parse_number(args.at(1));
        seq = prepare_state(theta, eta, rabi);
        target = Eigen::Vector2cd(std::sin(0.5 * theta), std::polar(std::cos(0.5 * theta), eta));
    } else {
        gate = parse_gate(c.gate);
        seq = synthesize(*gate, rabi, phase_options_of(c));
    }
    const Eigen::Matrix2cd u = gate_unitary(seq, q, c.mode, c.tolerance);
    const double unitarity_defect =
        (u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();

    report = {{"gate", c.gate},
              {"mode", std::string(to_string(c.mode))},
              {"sequence", sequence_json(seq)},
              {"total_duration_s", seq.total_duration()},
              {"unitary", complex_matrix(canonicalize_phase(u))},
              {"unitarity_defect", unitarity_defect},
              {"Omega_over_omega", rabi / q.omega}};
    if (gate) {
        const double f = gate_fidelity(gate->ideal, u);
        report["ideal"] = complex_matrix(gate->ideal);
        report["fidelity_to_ideal"] = f;
    } else {
        const Eigen::Vector2cd out = u.col(0);
        report["target_state"] = json::array(
            {{(*target)(0).real(), (*target)(0).imag()}, {(*target)(1).real(), (*target)(1).imag()}});
        report["fidelity_to_ideal"] = std::norm(target->dot(out));
    }
    s.emit("gate.json", report.dump(2) + "\n",
           {{"rabi_rad_per_s", "rad/s"}, {"detuning_rad_per_s", "rad/s"}, {"duration_s", "s"},
            {"unitary", "[re, im] pairs, global phase canonicalized"}});
}

GateSpec study_gate(const RunConfig& c) {
    if (c.gate.rfind("prep:", 0) == 0) {
        throw ConfigError({"gate.name prep:... is a state preparation, not a gate; use it with "
                           "the gate subcommand"});
    }
    return parse_gate(c.gate);
}

std::optional<InitializationWindow> study_window(Session& s) {
    const auto& c = s.config();
    try {
        return initialization_window(c.geometry(), c.discretization(), c.window_search());
    } catch (const NoWindowError&) {
        s.warn("no initialization window in the searched B range; qubit model validity unchecked");
        return std::nullopt;
    }
}

StudyOptions study_options(Session& s) {
    const auto& c = s.config();
    StudyOptions o;
    o.mode = c.mode;
    o.tolerance = c.tolerance;
    o.phase_options = phase_options_of(c);
    o.window = study_window(s);
    return o;
}

void cmd_fidelity(Session& s) {
    const auto& c = s.config();
    const auto gate = study_gate(c);
    checked_qubit(s);
    const auto options = study_options(s);
    const auto fn = qubit_model(c.geometry(), c.source);

    const auto deltas = c.delta_range.values();
    std::vector<InfidelityReport> reports;
    int flagged = 0;
    for (double d : deltas) {
        ErrorModel model;
        model.B0 = c.B;
        model.E0 = c.E0;
        (c.scan == "dB" ? model.delta_B_rel : model.delta_E_rel) = d;
        reports.push_back(average_gate_infidelity(gate, fn, model, c.samples, c.seed, options));
        flagged += reports.back().window_warning ? 1 : 0;
    }
    if (flagged > 0) {
        s.warn(std::to_string(flagged) +
               " scan point(s) put B0 or the perturbed B outside the initialization window");
    }
    std::ostringstream out;
    write_infidelity_csv(out, deltas, reports);
    s.emit("fidelity.csv", out.str(),
           {{"delta", c.scan == "dB" ? "dB/B0" : "dE/E0"}, {"mean_infidelity", "1"}, {"max_infidelity", "1"}},
           {{"gate", gate.name()}, {"samples", c.samples}, {"seed", c.seed}});
}

void cmd_mitigate(Session& s) {
    const auto& c = s.config();
    const auto gate = study_gate(c);
    checked_qubit(s);
    const auto options = study_options(s);
    const auto fn = qubit_model(c.geometry(), c.source);

    ErrorModel base;
    base.B0 = c.B;
    base.E0 = c.E0;
    base.delta_B_rel = c.delta_B_rel;
    base.delta_E_rel = c.delta_E_rel;
    const auto parameter = c.sweep_over == "E0" ? SweepParameter::E0 : SweepParameter::B0;
    const auto table = mitigation_sweep(gate, fn, base, parameter, c.sweep_range.values(), c.samples,
                                        c.seed, options);
    int flagged = 0;
    for (const auto& row : table.rows) flagged += row.report.window_warning ? 1 : 0;
    if (flagged > 0) {
        s.warn(std::to_string(flagged) + " grid point(s) outside the initialization window");
    }
    std::ostringstream out;
    write_mitigation_csv(out, table);
    const auto& best = table.rows[table.argmin];
    s.emit("mitigate.csv", out.str(),
           {{c.sweep_over, c.sweep_over == "E0" ? "V/m" : "T"},
            {"mean_infidelity", "1"},
            {"max_infidelity", "1"},
            {"window_warning", "0/1"}},
           {{"gate", gate.name()},
            {"argmin", best.value},
            {"min_mean_infidelity", best.report.mean_infidelity},
            {"samples", c.samples},
            {"seed", c.seed}});
}

/// Command-line values that override the configuration.
struct Overrides {
    std::optional<std::string> config_path, preset, output_dir;
    std::optional<double> r, R, mass_ratio, B, E0, E_static, omega_rf, phi;
    std::optional<int> n_points, stencil, levels, samples, trajectory_samples;
    std::optional<std::vector<int>> m_list;
    std::optional<std::string> source, b_range, gate, mode, scan, delta_range, over, sweep_range,
        phase_realization;
    std::optional<double> theta, eta, tolerance, dB, dE, wait_detuning, window_lo, window_hi,
        window_tolerance;
    std::optional<std::uint64_t> seed;
    bool leakage = false;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--preset", o.preset, "fig3a, fig3b or fig5");
    app->add_option("--output-dir", o.output_dir, "Directory for artifacts and manifests");
    app->add_option("--r", o.r, "Minor radius, angstrom");
    app->add_option("--R", o.R, "Major radius, angstrom");
    app->add_option("--mass-ratio", o.mass_ratio, "m*/m0");
    app->add_option("--B,--B0", o.B, "Static magnetic field, T");
    app->add_option("--E0", o.E0, "Drive amplitude, V/m");
    app->add_option("--n-points", o.n_points, "Grid points on theta");
    app->add_option("--stencil", o.stencil, "Finite-difference order, 2 or 4");
    app->add_option("--source", o.source, "numerical_taylor or paper_formula");
}

RunConfig resolve(const Overrides& o) {
    RunConfig c = preset(o.preset.value_or("fig5"));
    if (o.config_path) {
        std::ifstream in(*o.config_path);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError({"config '" + *o.config_path + "': " + e.what()});
        }
        if (o.preset && doc.is_object()) doc.erase("preset");
        c = apply_json(c, doc);
    }
    std::vector<std::string> violations;
    auto set = [](auto& field, const auto& value) {
        if (value) field = *value;
    };
    set(c.output_dir, o.output_dir);
    set(c.r_angstrom, o.r);
    set(c.R_angstrom, o.R);
    set(c.mass_ratio, o.mass_ratio);
    set(c.B, o.B);
    set(c.E0, o.E0);
    set(c.E_static, o.E_static);
    if (o.omega_rf) c.omega_rf = *o.omega_rf;
    set(c.phi, o.phi);
    set(c.n_points, o.n_points);
    set(c.stencil, o.stencil);
    set(c.n_levels, o.levels);
    set(c.m_list, o.m_list);
    set(c.samples, o.samples);
    set(c.trajectory_samples, o.trajectory_samples);
    set(c.theta, o.theta);
    set(c.eta, o.eta);
    set(c.tolerance, o.tolerance);
    set(c.delta_B_rel, o.dB);
    set(c.delta_E_rel, o.dE);
    set(c.wait_detuning, o.wait_detuning);
    set(c.window_lo, o.window_lo);
    set(c.window_hi, o.window_hi);
    set(c.window_tolerance, o.window_tolerance);
    set(c.seed, o.seed);
    set(c.gate, o.gate);
    set(c.scan, o.scan);
    set(c.sweep_over, o.over);
    if (o.leakage) c.leakage = true;
    auto guarded = [&violations](const std::string& flag, const auto& fn) {
        try {
            fn();
        } catch (const Error& e) {
            violations.push_back(flag + ": " + e.what());
        }
    };
    if (o.source) guarded("--source", [&] { c.source = coefficient_source_from_string(*o.source); });
    if (o.mode) guarded("--mode", [&] { c.mode = evolution_mode_from_string(*o.mode); });
    if (o.phase_realization) {
        guarded("--phase-realization",
                [&] { c.phase_realization = phase_realization_from_string(*o.phase_realization); });
    }
    if (o.b_range) guarded("--B-range", [&] { c.B_range = Range::parse(*o.b_range); });
    if (o.delta_range) guarded("--range", [&] { c.delta_range = Range::parse(*o.delta_range); });
    if (o.sweep_range) guarded("--sweep-range", [&] { c.sweep_range = Range::parse(*o.sweep_range); });
    if (!violations.empty()) throw ConfigError(std::move(violations));
    c.validate();
    return c;
}

void print_error(const std::string& kind, const std::string& message,
                 const std::vector<std::string>& violations = {}) {
    json err = {{"kind", kind}, {"message", message}};
    if (!violations.empty()) err["violations"] = violations;
    std::cerr << json{{"error", err}}.dump() << '\n';
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Curvature-bound electron qubit on a graphene nanotorus"};
    app.set_version_flag("--version", std::string("nanotorus ") + kVersion);
    app.require_subcommand(1);

    Overrides o;
    using Handler = void (*)(Session&);
    std::vector<std::pair<CLI::App*, Handler>> commands;
    auto add = [&](const char* name, const char* help, Handler handler) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, o);
        commands.emplace_back(sub, handler);
        return sub;
    };

    auto* potential = add("potential", "Potential profile CSV", cmd_potential);
    potential->add_option("--E", o.E_static, "Static electric field, V/m");
    potential->add_option("--m", o.m_list, "Orbital quantum number (first value used)");

    auto* spectrum = add("spectrum", "Bound-state spectrum and wavefunctions", cmd_spectrum);
    spectrum->add_option("--E", o.E_static, "Static electric field, V/m");
    spectrum->add_option("--m", o.m_list, "Orbital quantum numbers")->delimiter(',');
    spectrum->add_option("--levels", o.levels, "Levels per m sector");

    auto* sweep = add("sweep-b", "Spectrum versus magnetic field", cmd_sweep_b);
    sweep->add_option("--B-range", o.b_range, "a:b:n in T");
    sweep->add_option("--m", o.m_list, "Orbital quantum numbers")->delimiter(',');
    sweep->add_option("--levels", o.levels, "Levels per m sector");

    auto* window = add("window", "Two-bound-state initialization window", cmd_window);
    window->add_option("--B-lo", o.window_lo, "Scan start, T");
    window->add_option("--B-hi", o.window_hi, "Scan end, T");
    window->add_option("--tolerance", o.window_tolerance, "Edge tolerance, T");

    add("qubit-params", "Oscillator reduction report", cmd_qubit_params);

    auto* evolve = add("evolve", "Bloch trajectory of a preparation pulse", cmd_evolve);
    evolve->add_option("--theta", o.theta, "Target polar angle in (0, pi]");
    evolve->add_option("--eta", o.eta, "Target phase in [0, pi]");
    evolve->add_option("--samples", o.trajectory_samples, "Trajectory samples");
    evolve->add_option("--mode", o.mode, "rwa or labframe");
    evolve->add_option("--tol", o.tolerance, "Integrator tolerance");
    evolve->add_option("--omega-rf", o.omega_rf, "Drive frequency, rad/s (default: resonant)");
    evolve->add_flag("--leakage", o.leakage, "Three-level ladder (labframe only)");

    auto* gate = add("gate", "Gate synthesis, unitary and fidelity", cmd_gate);
    gate->add_option("--gate", o.gate, "hadamard|identity|phase:ETA|rotation:X,Y,Z:ANGLE|prep:THETA,ETA");
    gate->add_option("--mode", o.mode, "rwa or labframe");
    gate->add_option("--tol", o.tolerance, "Integrator tolerance");
    gate->add_option("--phase-realization", o.phase_realization, "virtual or detuned_wait");
    gate->add_option("--wait-detuning", o.wait_detuning, "Detuning for detuned_wait, rad/s");

    auto* fidelity = add("fidelity", "Average gate infidelity under field errors", cmd_fidelity);
    fidelity->add_option("--gate", o.gate, "Gate name");
    fidelity->add_option("--scan", o.scan, "dB or dE");
    fidelity->add_option("--range", o.delta_range, "a:b:n relative error values");
    fidelity->add_option("--samples", o.samples, "Haar samples per point");
    fidelity->add_option("--seed", o.seed, "RNG seed");
    fidelity->add_option("--mode", o.mode, "rwa or labframe");

    auto* mitigate = add("mitigate", "Infidelity versus E0 or B0 at fixed errors", cmd_mitigate);
    mitigate->add_option("--gate", o.gate, "Gate name");
    mitigate->add_option("--dB", o.dB, "Relative magnetic error");
    mitigate->add_option("--dE", o.dE, "Relative electric error");
    mitigate->add_option("--over", o.over, "E0 or B0");
    mitigate->add_option("--sweep-range", o.sweep_range, "a:b:n grid");
    mitigate->add_option("--samples", o.samples, "Haar samples per point");
    mitigate->add_option("--seed", o.seed, "RNG seed");
    mitigate->add_option("--mode", o.mode, "rwa or labframe");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("usage", e.what());
        return 2;
    }

    try {
        for (const auto& [sub, handler] : commands) {
            if (!sub->parsed()) continue;
            Session session(sub->get_name(), resolve(o));
            handler(session);
        }
        return 0;
    } catch (const ConfigError& e) {
        print_error("config", e.what(), e.violations());
        return 2;
    } catch (const InvalidArgument& e) {
        print_error("invalid_argument", e.what());
        return 2;
    } catch (const EigenSolverError& e) {
        print_error("eigensolver", e.what() + std::string(" (residual ") + format_double(e.residual()) + ")");
        return 3;
    } catch (const FieldSweepError& e) {
        print_error("sweep", e.what() + std::string(" (field ") + format_double(e.field()) + ")");
        return 3;
    } catch (const IntegrationError& e) {
        print_error("integration", e.what());
        return 3;
    } catch (const NoWindowError& e) {
        print_error("no_window", e.what());
        return 3;
    } catch (const Error& e) {
        print_error("numerical", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
}

}  // namespace nanotorus::cli
