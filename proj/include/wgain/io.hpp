#pragma once

#include "wgain/estimator.hpp"
#include "wgain/simulation.hpp"
#include "wgain/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace wgain {

// Exit codes shared by run() and the CLI wrapper.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitIo = 5;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

enum class Command { Estimate, Simulate, Tune, BiasBound };

struct RunConfig {
    Command command = Command::Estimate;
    std::optional<std::string> data_path;
    std::string spec_name;                       // preset name when inline_spec is absent
    std::optional<DictionarySpec> inline_spec;
    SmoothingConfig smoothing;
    bool auto_s = true;
    bool auto_c4 = true;
    EstimatorOptions estimator;                  // folds, seed, level, penalty scales, solver
    DgpConfig dgp;
    int reps = 200;
    int threads = 0;
    bool known_truth = true;                     // simulate only
    std::optional<std::string> out_path;
    std::optional<std::string> plot_path;
    bool no_margin = false;                      // bias-bound subcommand
    double bound_c4 = 1.0;
    double bound_alpha4 = 1.0;
    double bound_s = 1.0;

    DictionarySpec resolve_spec() const;
};

// Reads the header-first CSV layout: y, d, then covariate columns.  Strict
// about d being exactly 0 or 1 and about every cell parsing as a number;
// errors carry row and column coordinates.
Dataset read_csv(const std::string& path);

// Merges config-file JSON with flag-override JSON (flags win), rejecting
// unknown keys in either, and produces the resolved RunConfig.
RunConfig parse_run_config(const nlohmann::json& file, const nlohmann::json& overrides);

// Canonical resolved-config document and its FNV-1a hash; the pair is the
// provenance block every report embeds, and a run is replayable from it.
nlohmann::json resolved_config_json(const RunConfig& config);
std::uint64_t config_hash(const nlohmann::json& resolved);

nlohmann::json report_to_json(const EstimateReport& report, const RunConfig& config);
nlohmann::json report_to_json(const McResult& result, const RunConfig& config);

void write_report(const nlohmann::json& doc, const std::string& path);
nlohmann::json read_report(const std::string& path);
EstimateReport estimate_report_from_json(const nlohmann::json& doc);

// Default output path: timestamped, never clobbers an existing file.
std::string default_report_path(Command command, std::uint64_t seed);

// Dispatches to the estimate/simulate/tune/bias-bound pipelines and maps
// the error taxonomy onto exit codes.  Diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace wgain
