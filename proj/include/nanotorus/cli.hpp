#pragma once

// Command-line front end: JSON run configuration, presets and subcommand
// dispatch. Every artifact is written next to a manifest.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanotorus/control.hpp"
#include "nanotorus/errors.hpp"
#include "nanotorus/spectral.hpp"

namespace nanotorus::cli {

/// Every violated precondition of a configuration, reported together.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// a:b:n, n >= 2 points from a to b inclusive, or a single value with n = 1.
struct Range {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;

    static Range parse(const std::string& text);
    std::vector<double> values() const;
    std::string to_string() const;
};

struct RunConfig {
    std::string preset = "fig5";

    double r_angstrom = 350.0;
    double R_angstrom = 900.0;
    double mass_ratio = 0.3;

    double B = 0.45;          // T
    double E0 = 100.0;        // V/m, drive amplitude
    double E_static = 0.0;    // V/m, static field for potential/spectrum
    std::optional<double> omega_rf;  // rad/s, defaults to the qubit frequency
    double phi = 0.0;

    int n_points = 1024;
    int stencil = 2;

    std::vector<int> m_list{0};
    int n_levels = 8;
    double localization_threshold = 0.5;

    Range B_range{0.0, 1.2, 121};
    double window_lo = 0.0;
    double window_hi = 2.0;
    int window_scan_points = 101;
    double window_tolerance = 1e-3;

    CoefficientSource source = CoefficientSource::numerical_taylor;

    double theta = kPi / 2.0;  // prepared polar angle
    double eta = 0.0;          // prepared phase
    int trajectory_samples = 101;
    bool leakage = false;

    std::string gate = "hadamard";
    EvolutionMode mode = EvolutionMode::rwa;
    double tolerance = 1e-9;
    PhaseRealization phase_realization = PhaseRealization::virtual_frame;
    double wait_detuning = 0.0;  // rad/s, detuned-wait phase gates

    std::string scan = "dB";
    Range delta_range{0.0, 1e-2, 11};
    double delta_B_rel = 5e-3;
    double delta_E_rel = 0.0;
    std::string sweep_over = "E0";
    Range sweep_range{100.0, 10000.0, 9};
    int samples = 10000;
    std::uint64_t seed = 20240611;

    std::string output_dir = ".";

    TorusGeometry geometry() const;
    Discretization discretization() const;
    WindowSearch window_search() const;
    /// Collects every violated precondition; throws ConfigError if any.
    void validate() const;
};

/// Named presets: fig3a (r = 350 A, R = 900 A), fig3b (R = 3600 A) and
/// fig5 (fig3a with B0 = 0.45 T, E0 = 100 V/m).
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Applies a JSON document on top of `base`. Unknown keys are rejected.
RunConfig apply_json(RunConfig base, const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

/// Parses a gate name: identity, hadamard, phase:ETA, rotation:X,Y,Z:ANGLE.
GateSpec parse_gate(const std::string& text);

/// Manifest written as <artifact>.manifest.json.
struct RunManifest {
    std::string artifact;
    std::string subcommand;
    nlohmann::json config;
    std::vector<std::string> warnings;
    UnitSystem units = UnitSystem::si();

    nlohmann::json to_json() const;
};

/// Full CLI entry point; returns the process exit status.
int run(int argc, char** argv);

extern const char* const kVersion;

}  // namespace nanotorus::cli
