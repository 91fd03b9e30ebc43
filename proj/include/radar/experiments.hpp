#pragma once

// Named, seed-reproducible experiments. Each one runs a simulation, writes
// CSV data and SVG plots under <output_dir>/<name>/ and checks its measured
// quantities against tagged expectations. A failed expectation is reported,
// not thrown.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace radar::experiments {

using Params = nlohmann::ordered_json;

enum class Provenance { Paper, Derived, Property };

enum class Comparison {
    Within,   ///< |measured - target| <= tolerance
    AtLeast,  ///< measured >= target
    AtMost,   ///< measured <= target
    Above,    ///< measured > target
};

std::string_view to_string(Provenance p);
std::string_view to_string(Comparison c);

struct Expectation {
    std::string quantity;
    double target = 0.0;
    double tolerance = 0.0;
    Provenance provenance = Provenance::Derived;
    Comparison comparison = Comparison::Within;
};

bool satisfies(const Expectation& e, double measured);

struct ExperimentSpec {
    std::string name;
    std::string description;
    Params parameters;
    /// Expectations under the default parameters.
    std::vector<Expectation> expected;
    std::uint64_t seed_base = 1;
};

struct Outcome {
    std::string quantity;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::Within;
    bool pass = false;
};

struct ExperimentReport {
    std::string name;
    std::string started;
    std::string finished;
    std::uint64_t seed = 0;
    std::vector<Outcome> outcomes;
    /// Recorded but unchecked quantities.
    std::vector<std::pair<std::string, double>> notes;
    std::vector<std::filesystem::path> outputs;

    bool passed() const;
};

/// Report text: `# key value` header lines followed by one line per
/// expectation, `quantity measured target tolerance pass|fail comparison`.
std::string serialize_report(const ExperimentReport& report);
ExperimentReport parse_report(std::string_view text);

struct ExperimentInfo {
    std::string name;
    std::string description;
};

/// Registered experiments in alphabetical order.
std::vector<ExperimentInfo> list_experiments();

/// Throws LookupError for an unknown name.
const ExperimentSpec& find_experiment(std::string_view name);

/// Sets `dotted.path` in `params` from text, keeping the existing value's
/// type. Throws UsageError for unknown keys or unparseable values.
void apply_override(Params& params, std::string_view dotted_path, std::string_view text);

/// Recursively overlays `overlay` onto `params` with the same key and type checks.
void merge_params(Params& params, const Params& overlay);

struct RunOptions {
    Params overrides = Params::object();  ///< merged over the defaults
    std::optional<std::uint64_t> seed;
};

/// Runs the named experiment and writes its outputs and `report`.
/// Throws LookupError, UsageError, IoError; numerical failures propagate.
ExperimentReport run_experiment(std::string_view name, const RunOptions& options,
                                const std::filesystem::path& output_dir);

}  // namespace radar::experiments
