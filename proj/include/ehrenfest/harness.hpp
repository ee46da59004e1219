#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ehrenfest/propagator.hpp"
#include "ehrenfest/rational.hpp"

// Scenario configuration, orchestration and report persistence.
namespace ehrenfest::harness {

using exact::BigRational;

enum class Mode { counterexample, evolve, crosscheck };

std::string to_string(Mode m);
std::optional<Mode> mode_from_name(std::string_view name);

struct EvolveConfig {
    std::string potential = "harmonic";
    double omega = 1.0;
    double coupling = 1.0;
    double height = 1.0;
    double width = 1.0;
    double center = 0.0;
    double x0 = 2.0;
    double p0 = 0.0;
    double sigma = 1.0;
    double length = 40.0;
    std::size_t nodes = 512;
    double total_time = 6.4;
    double dt = 1e-3;
    int save_every = 10;
    std::vector<std::string> observables{"x", "p", "H"};
    propagator::Scheme scheme = propagator::Scheme::cayley4;
    int derivative_order = 4;
    double residual_tol = 5e-6;   // generic observables
    double conserved_tol = 1e-10; // identity and H, where both sides vanish
    double norm_tol = 1e-8;
    double energy_tol = 1e-6;
    bool convergence = false;     // rerun at dt/2 and report slopes
    double min_slope = 1.9;
    double sup_tol = 0.01;        // relative sup-norm change under dt/2
};

struct CounterexampleConfig {
    int n_bumps = 20;
    std::string rule = "harmonic";
    BigRational t0_fraction{1, 4};
    BigRational eta_fraction{1, 16};
    int samples = 100;  // random t outside I_j + Z per bump
    int hermitean_pairs = 50;
};

struct CrosscheckConfig {
    int n_bumps = 5;
    std::string rule = "dyadic";
    BigRational t0_fraction{1, 4};
    BigRational eta_fraction{1, 16};
    double length = 16.0;
    std::size_t nodes = std::size_t{1} << 17;
    std::vector<BigRational> times;  // empty: resonance times, witnesses, gaps
    bool refine = true;
    double relative_tol = 0.05;
    double min_ratio = 3.5;
};

struct ScenarioConfig {
    Mode mode = Mode::evolve;
    std::uint64_t seed = 0;
    EvolveConfig evolve;
    CounterexampleConfig counterexample;
    CrosscheckConfig crosscheck;
};

struct Diagnostic {
    int line = 0;  // 0 when the problem is not tied to one line
    std::string field;
    std::string message;
};

std::string format(const Diagnostic& d);

struct ParseResult {
    std::optional<ScenarioConfig> config;
    std::vector<Diagnostic> errors;
};

// Format: "key = value" lines; "[section]" headers for evolve,
// counterexample and crosscheck; '#' starts a comment. Top-level keys are
// mode and seed. Every problem in the text is reported, not only the first.
ParseResult parse_config(std::string_view text);
/// Throws Error(parse) listing every diagnostic.
ScenarioConfig parse_config_or_throw(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Normalized text of every effective setting, the input of the config hash.
std::string canonical_text(const ScenarioConfig& config);
/// 64-bit FNV-1a of canonical_text, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunManifest {
    std::string mode;
    std::string config_hash;
    std::string version;
    std::string started;   // UTC, ISO 8601
    std::string finished;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;  // relative to the output directory
    std::vector<Check> checks;
    bool partial = false;  // a stage aborted; outputs may be incomplete
    std::string error;
    bool ok() const;
};

/// Runs the selected mode, writes its artifacts and manifest.json into
/// out_dir (created if missing). Downstream failures are recorded in the
/// manifest rather than thrown; only an unwritable out_dir throws.
RunManifest run(const ScenarioConfig& config, const std::filesystem::path& out_dir, std::ostream* log = nullptr);

std::string manifest_json(const RunManifest& manifest);

const char* version();

}  // namespace ehrenfest::harness
