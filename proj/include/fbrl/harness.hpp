#pragma once

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fbrl {

using Json = nlohmann::ordered_json;

/// One experiment observation.
struct Record {
    std::uint64_t seed = 0;
    std::string phase;
    int step = 0;
    long samples = 0;
    std::string metric;
    double value = 0.0;
};

/// Records of one (algorithm, seed) run plus the key=value footer.
struct RunOutput {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::vector<Record> records;
    std::map<std::string, double> footer;
};

/// Schema:
///   # fbrl-records v1
///   seed,phase,step,samples,metric,value
///   ... rows ...
///   # key=value footer lines
void write_records(std::ostream& os, const RunOutput& run);
RunOutput read_records(std::istream& is);

struct SummaryRow {
    std::string phase;
    int step = 0;
    std::string metric;
    int n = 0;
    double median = 0.0, q25 = 0.0, q75 = 0.0;
};

/// Quantile with linear interpolation between order statistics: position q (n-1).
double quantile(std::vector<double> v, double q);

/// Median and quartiles per (phase, step, metric) across runs, plus per footer key under phase "final".
std::vector<SummaryRow> summarize(const std::vector<RunOutput>& runs);

/// Schema:
///   # fbrl-summary v1
///   phase,step,metric,n,median,q25,q75
void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Preset names: lock-admissible, lock-benign, lock-adversarial, hardness-tree, hardness-onestep, stationary-lock.
std::vector<std::string> preset_names();
Json default_config(const std::string& preset);

/// Overlays `patch` on `base`; keys absent from `base` are rejected with ConfigError naming the path.
void merge_config(Json& base, const Json& patch, const std::string& path = "");

/// Applies "a.b.c=value"; the value is parsed as JSON when possible, else taken as a string.
void apply_override(Json& cfg, const std::string& assignment);

/// Checks types and ranges; throws ConfigError.
void validate_config(const Json& cfg);

/// Runs one algorithm for one seed of a resolved config.
RunOutput run_single(const Json& cfg, const std::string& algorithm, std::uint64_t seed);

struct PresetResult {
    std::vector<RunOutput> runs;
    /// "algorithm seed: message" for each crashed run.
    std::vector<std::string> failures;
};

/// Every algorithm and seed of the config, on `jobs` worker threads (0 = hardware concurrency).
/// With a nonempty output directory, writes config.json, <algorithm>_seed<k>.csv and summary_<algorithm>.csv.
PresetResult run_experiment(const Json& cfg);

/// Default output root: $FBRL_OUTPUT_ROOT or "runs".
std::string default_output_root();

} // namespace fbrl
