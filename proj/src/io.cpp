#include "wgain/io.hpp"

#include "wgain/bias.hpp"
#include "wgain/data_model.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace wgain {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, ',')) {
        // trim whitespace and stray carriage returns
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw data_error("read_csv: unparseable cell at line " + std::to_string(line_no) +
                         ", column " + column + ": '" + cell + "'");
    }
    return value;
}

}  // namespace

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error("read_csv: empty file " + path);
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "y" || header[1] != "d") {
        throw data_error("read_csv: header must be 'y,d,<covariates...>'");
    }
    const std::size_t q = header.size() - 2;

    std::vector<Observation> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw data_error("read_csv: line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        }
        Observation obs;
        obs.y = parse_cell(cells[0], line_no, "y");
        const double d = parse_cell(cells[1], line_no, "d");
        if (d != 0.0 && d != 1.0) {
            throw data_error("read_csv: treatment must be 0 or 1 at line " +
                             std::to_string(line_no));
        }
        obs.d = static_cast<int>(d);
        obs.z.resize(static_cast<Eigen::Index>(q));
        for (std::size_t j = 0; j < q; ++j) {
            obs.z[static_cast<Eigen::Index>(j)] = parse_cell(cells[j + 2], line_no, header[j + 2]);
        }
        rows.push_back(std::move(obs));
    }
    if (rows.empty()) throw data_error("read_csv: no data rows in " + path);
    return Dataset(rows);
}

namespace {

const json& config_defaults() {
    static const json defaults = {
        {"command", "estimate"},
        {"data", nullptr},
        {"spec", "sim1"},
        {"seed", 0},
        {"folds", 5},
        {"level", 0.95},
        {"out", nullptr},
        {"plot_data", nullptr},
        {"smoothing",
         {{"family", "sigmoid"},
          {"s", "auto"},
          {"alpha4", 1.0},
          {"c4", "auto"},
          {"c6", nullptr},
          {"c8", nullptr},
          {"margin_assumed", true}}},
        {"penalties", {{"lambda_scale", 1.0}, {"riesz_scale", 1.0}}},
        {"solver",
         {{"coef_tolerance", 1e-9}, {"kkt_tolerance", 1e-7}, {"max_sweeps", 100000}}},
        {"simulate",
         {{"n", 2000},
          {"reps", 200},
          {"p0", 6},
          {"extra_covariates", 0},
          {"noise_sd", 0.1},
          {"propensity", 0.5},
          {"threads", 0},
          {"known_truth", true}}},
        {"bias_bound", {{"c4", 1.0}, {"alpha4", 1.0}, {"s", 1.0}, {"no_margin", false}}},
    };
    return defaults;
}

// Unknown keys are hard errors so a typo never silently falls back to a
// default.
void merge_checked(json& base, const json& overlay, const std::string& scope) {
    if (!overlay.is_object()) throw config_error("config: expected an object at " + scope);
    for (const auto& [key, value] : overlay.items()) {
        if (!base.contains(key)) throw config_error("config: unknown key '" + scope + key + "'");
        if (base[key].is_object() && value.is_object()) {
            merge_checked(base[key], value, scope + key + ".");
        } else {
            base[key] = value;
        }
    }
}

Command command_from_string(const std::string& name) {
    if (name == "estimate") return Command::Estimate;
    if (name == "simulate") return Command::Simulate;
    if (name == "tune") return Command::Tune;
    if (name == "bias-bound") return Command::BiasBound;
    throw config_error("config: unknown command '" + name + "'");
}

std::string command_to_string(Command command) {
    switch (command) {
        case Command::Estimate: return "estimate";
        case Command::Simulate: return "simulate";
        case Command::Tune: return "tune";
        case Command::BiasBound: return "bias-bound";
    }
    return "estimate";
}

DictionarySpec spec_from_json(const json& node) {
    DictionarySpec spec;
    json base = {{"include_intercept", true},
                 {"power_terms", json::array()},
                 {"interactions", json::array()},
                 {"noise_columns", 0},
                 {"standardize", false},
                 {"log_covariates", false}};
    merge_checked(base, node, "spec.");
    spec.include_intercept = base["include_intercept"].get<bool>();
    for (const auto& term : base["power_terms"]) {
        if (!term.is_array() || term.size() != 2) {
            throw config_error("config: power_terms entries must be [index, degree]");
        }
        spec.power_terms.push_back({term[0].get<int>(), term[1].get<int>()});
    }
    for (const auto& pair : base["interactions"]) {
        if (!pair.is_array() || pair.size() != 2) {
            throw config_error("config: interactions entries must be [i, j]");
        }
        spec.interactions.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
    spec.noise_columns = base["noise_columns"].get<int>();
    spec.standardize = base["standardize"].get<bool>();
    spec.log_covariates = base["log_covariates"].get<bool>();
    return spec;
}

json spec_to_json(const DictionarySpec& spec) {
    json node;
    node["include_intercept"] = spec.include_intercept;
    node["power_terms"] = json::array();
    for (const auto& term : spec.power_terms) {
        node["power_terms"].push_back({term.index, term.max_degree});
    }
    node["interactions"] = json::array();
    for (const auto& [a, b] : spec.interactions) node["interactions"].push_back({a, b});
    node["noise_columns"] = spec.noise_columns;
    node["standardize"] = spec.standardize;
    node["log_covariates"] = spec.log_covariates;
    return node;
}

}  // namespace

DictionarySpec RunConfig::resolve_spec() const {
    if (inline_spec) return *inline_spec;
    return dictionary_preset(spec_name);
}

RunConfig parse_run_config(const json& file, const json& overrides) {
    json merged = config_defaults();
    // The dictionary may be a preset name or an inline object; move the slot
    // wholesale so both layers can set either form.
    auto apply_layer = [&merged](const json& layer) {
        if (layer.is_null() || (layer.is_object() && layer.empty())) return;
        json copy = layer;
        if (copy.contains("spec") && copy["spec"].is_object()) {
            merged["spec"] = copy["spec"];
            copy.erase("spec");
        }
        merge_checked(merged, copy, "");
    };
    apply_layer(file);
    apply_layer(overrides);

    RunConfig config;
    config.command = command_from_string(merged["command"].get<std::string>());
    if (!merged["data"].is_null()) config.data_path = merged["data"].get<std::string>();
    if (merged["spec"].is_object()) {
        config.inline_spec = spec_from_json(merged["spec"]);
    } else {
        config.spec_name = merged["spec"].get<std::string>();
        if (!is_dictionary_preset(config.spec_name)) {
            throw config_error("config: unknown dictionary preset '" + config.spec_name + "'");
        }
    }

    const json& smoothing = merged["smoothing"];
    config.smoothing.family = smoothing_family_from_string(smoothing["family"].get<std::string>());
    if (smoothing["s"].is_string()) {
        if (smoothing["s"].get<std::string>() != "auto") {
            throw config_error("config: smoothing.s must be a number or \"auto\"");
        }
        config.auto_s = true;
    } else {
        config.auto_s = false;
        config.smoothing.s = smoothing["s"].get<double>();
    }
    config.smoothing.alpha4 = smoothing["alpha4"].get<double>();
    if (smoothing["c4"].is_string()) {
        if (smoothing["c4"].get<std::string>() != "auto") {
            throw config_error("config: smoothing.c4 must be a number or \"auto\"");
        }
        config.auto_c4 = true;
    } else {
        config.auto_c4 = false;
        config.smoothing.c4 = smoothing["c4"].get<double>();
    }
    if (!smoothing["c6"].is_null()) config.smoothing.c6 = smoothing["c6"].get<double>();
    if (!smoothing["c8"].is_null()) config.smoothing.c8 = smoothing["c8"].get<double>();
    config.smoothing.margin_assumed = smoothing["margin_assumed"].get<bool>();

    config.estimator.folds = merged["folds"].get<int>();
    config.estimator.seed = merged["seed"].get<std::uint64_t>();
    config.estimator.level = merged["level"].get<double>();
    config.estimator.lambda_scale = merged["penalties"]["lambda_scale"].get<double>();
    config.estimator.riesz_scale = merged["penalties"]["riesz_scale"].get<double>();
    config.estimator.solver.coef_tolerance = merged["solver"]["coef_tolerance"].get<double>();
    config.estimator.solver.kkt_tolerance = merged["solver"]["kkt_tolerance"].get<double>();
    config.estimator.solver.max_sweeps = merged["solver"]["max_sweeps"].get<long>();
    config.estimator.auto_s = config.auto_s;
    config.estimator.auto_c4 = config.auto_c4;

    const json& sim = merged["simulate"];
    config.dgp.n = sim["n"].get<Eigen::Index>();
    config.dgp.p0 = sim["p0"].get<int>();
    config.dgp.extra_covariates = sim["extra_covariates"].get<int>();
    config.dgp.noise_sd = sim["noise_sd"].get<double>();
    config.dgp.propensity = sim["propensity"].get<double>();
    config.reps = sim["reps"].get<int>();
    config.threads = sim["threads"].get<int>();
    config.known_truth = sim["known_truth"].get<bool>();

    const json& bound = merged["bias_bound"];
    config.bound_c4 = bound["c4"].get<double>();
    config.bound_alpha4 = bound["alpha4"].get<double>();
    config.bound_s = bound["s"].get<double>();
    config.no_margin = bound["no_margin"].get<bool>();

    if (!merged["out"].is_null()) config.out_path = merged["out"].get<std::string>();
    if (!merged["plot_data"].is_null()) config.plot_path = merged["plot_data"].get<std::string>();

    if (config.command == Command::Estimate || config.command == Command::Tune) {
        if (!config.data_path) {
            throw config_error("config: '" + command_to_string(config.command) +
                               "' requires a data path");
        }
    }
    return config;
}

json resolved_config_json(const RunConfig& config) {
    json doc = config_defaults();
    doc["command"] = command_to_string(config.command);
    doc["data"] = config.data_path ? json(*config.data_path) : json(nullptr);
    doc["spec"] = config.inline_spec ? spec_to_json(*config.inline_spec) : json(config.spec_name);
    doc["seed"] = config.estimator.seed;
    doc["folds"] = config.estimator.folds;
    doc["level"] = config.estimator.level;
    doc["out"] = config.out_path ? json(*config.out_path) : json(nullptr);
    doc["plot_data"] = config.plot_path ? json(*config.plot_path) : json(nullptr);
    doc["smoothing"]["family"] = to_string(config.smoothing.family);
    doc["smoothing"]["s"] = config.auto_s ? json("auto") : json(config.smoothing.s);
    doc["smoothing"]["alpha4"] = config.smoothing.alpha4;
    doc["smoothing"]["c4"] = config.auto_c4 ? json("auto") : json(config.smoothing.c4);
    doc["smoothing"]["c6"] = config.smoothing.c6 ? json(*config.smoothing.c6) : json(nullptr);
    doc["smoothing"]["c8"] = config.smoothing.c8 ? json(*config.smoothing.c8) : json(nullptr);
    doc["smoothing"]["margin_assumed"] = config.smoothing.margin_assumed;
    doc["penalties"]["lambda_scale"] = config.estimator.lambda_scale;
    doc["penalties"]["riesz_scale"] = config.estimator.riesz_scale;
    doc["solver"]["coef_tolerance"] = config.estimator.solver.coef_tolerance;
    doc["solver"]["kkt_tolerance"] = config.estimator.solver.kkt_tolerance;
    doc["solver"]["max_sweeps"] = config.estimator.solver.max_sweeps;
    doc["simulate"]["n"] = config.dgp.n;
    doc["simulate"]["reps"] = config.reps;
    doc["simulate"]["p0"] = config.dgp.p0;
    doc["simulate"]["extra_covariates"] = config.dgp.extra_covariates;
    doc["simulate"]["noise_sd"] = config.dgp.noise_sd;
    doc["simulate"]["propensity"] = config.dgp.propensity;
    doc["simulate"]["threads"] = config.threads;
    doc["simulate"]["known_truth"] = config.known_truth;
    doc["bias_bound"]["c4"] = config.bound_c4;
    doc["bias_bound"]["alpha4"] = config.bound_alpha4;
    doc["bias_bound"]["s"] = config.bound_s;
    doc["bias_bound"]["no_margin"] = config.no_margin;
    return doc;
}

std::uint64_t config_hash(const json& resolved) {
    // Output routing does not affect any computed number, so it stays out of
    // the hash; a replay into a different file still matches.
    json canonical = resolved;
    canonical.erase("out");
    canonical.erase("plot_data");
    const std::string dump = canonical.dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : dump) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

namespace {

json provenance_block(const RunConfig& config) {
    const json resolved = resolved_config_json(config);
    return {{"schema_version", kReportSchemaVersion},
            {"artifact_version", kArtifactVersion},
            {"seed", config.estimator.seed},
            {"config_hash", config_hash(resolved)},
            {"config", resolved}};
}

json moments_to_json(const CateMoments& moments) {
    return {{"mu", moments.mu},
            {"sigma2", moments.sigma2},
            {"p_tau", moments.p_tau},
            {"var_tau_sq", moments.var_tau_sq},
            {"source", moments.source == MomentSource::KnownTruth ? "known_truth" : "rule_of_thumb"}};
}

}  // namespace

json report_to_json(const EstimateReport& report, const RunConfig& config) {
    json doc;
    doc["kind"] = "estimate_report";
    doc["theta_sig"] = report.theta_sig;
    doc["theta_naive"] = report.theta_naive;
    doc["theta_mbdml"] = report.theta_mbdml;
    doc["se_formula"] = report.se_formula;
    doc["se_empirical"] = report.se_empirical;
    doc["bias_bound"] = report.bias_bound;
    doc["bias_bound_lower"] =
        report.bias_bound_lower ? json(*report.bias_bound_lower) : json(nullptr);
    doc["ci_lo"] = report.ci.lo;
    doc["ci_hi"] = report.ci.hi;
    doc["ci_critical_value"] = report.ci.critical_value;
    doc["ci_level"] = report.ci.level;
    doc["share_positive"] = report.share_positive;
    doc["s_used"] = report.s_used;
    doc["smoothing_family"] = to_string(report.smoothing.family);
    doc["alpha4"] = report.smoothing.alpha4;
    doc["c4"] = report.smoothing.c4;
    doc["margin_assumed"] = report.smoothing.margin_assumed;
    doc["moments"] = moments_to_json(report.moments);
    doc["fold_count"] = report.fold_count;
    doc["lambda"] = report.lambda;
    doc["riesz_penalty"] = report.riesz_penalty;
    doc["max_abs_riesz_weight"] = report.max_abs_riesz_weight;
    doc["all_solves_converged"] = report.all_solves_converged;
    if (report.choice) {
        doc["smoothing_choice"] = {{"c2", report.choice->c2},
                                   {"rate_exponent", report.choice->rate_exponent},
                                   {"margin_assumed", report.choice->margin_assumed}};
    }
    doc["provenance"] = provenance_block(config);
    return doc;
}

json report_to_json(const McResult& result, const RunConfig& config) {
    json doc;
    doc["kind"] = "mc_report";
    doc["truth"] = result.truth;
    doc["reps"] = static_cast<int>(result.estimates.rows());
    doc["summaries"] = json::array();
    for (const auto& summary : result.summaries) {
        json row = {{"estimator", to_string(summary.kind)},
                    {"bias", summary.bias},
                    {"se", summary.se},
                    {"rmse", summary.rmse},
                    {"reps", summary.reps},
                    {"spec", summary.spec_name},
                    {"smoothing_family", to_string(summary.family)}};
        row["coverage"] = summary.coverage ? json(*summary.coverage) : json(nullptr);
        doc["summaries"].push_back(std::move(row));
    }
    doc["provenance"] = provenance_block(config);
    return doc;
}

void write_report(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_report: cannot open " + path);
    out << doc.dump(2) << '\n';
    if (!out.good()) throw io_error("write_report: write failed for " + path);
}

json read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read_report: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw data_error("read_report: invalid JSON in " + path + ": " + e.what());
    }
    return doc;
}

EstimateReport estimate_report_from_json(const json& doc) {
    EstimateReport report;
    report.theta_sig = doc.at("theta_sig").get<double>();
    report.theta_naive = doc.at("theta_naive").get<double>();
    report.theta_mbdml = doc.at("theta_mbdml").get<double>();
    report.se_formula = doc.at("se_formula").get<double>();
    report.se_empirical = doc.at("se_empirical").get<double>();
    report.bias_bound = doc.at("bias_bound").get<double>();
    if (!doc.at("bias_bound_lower").is_null()) {
        report.bias_bound_lower = doc.at("bias_bound_lower").get<double>();
    }
    report.ci.lo = doc.at("ci_lo").get<double>();
    report.ci.hi = doc.at("ci_hi").get<double>();
    report.ci.critical_value = doc.at("ci_critical_value").get<double>();
    report.ci.level = doc.at("ci_level").get<double>();
    report.ci.center = report.theta_sig;
    report.ci.se = report.se_formula;
    report.ci.bias_bound = report.bias_bound;
    report.share_positive = doc.at("share_positive").get<double>();
    report.s_used = doc.at("s_used").get<double>();
    report.smoothing.family = smoothing_family_from_string(doc.at("smoothing_family").get<std::string>());
    report.smoothing.s = report.s_used;
    report.smoothing.alpha4 = doc.at("alpha4").get<double>();
    report.smoothing.c4 = doc.at("c4").get<double>();
    report.smoothing.margin_assumed = doc.at("margin_assumed").get<bool>();
    report.moments.mu = doc.at("moments").at("mu").get<double>();
    report.moments.sigma2 = doc.at("moments").at("sigma2").get<double>();
    report.moments.p_tau = doc.at("moments").at("p_tau").get<double>();
    report.moments.var_tau_sq = doc.at("moments").at("var_tau_sq").get<double>();
    report.moments.source = doc.at("moments").at("source").get<std::string>() == "known_truth"
                                ? MomentSource::KnownTruth
                                : MomentSource::RuleOfThumb;
    report.fold_count = doc.at("fold_count").get<int>();
    report.lambda = doc.at("lambda").get<double>();
    report.riesz_penalty = doc.at("riesz_penalty").get<double>();
    report.max_abs_riesz_weight = doc.at("max_abs_riesz_weight").get<double>();
    report.all_solves_converged = doc.at("all_solves_converged").get<bool>();
    report.seed = doc.at("provenance").at("seed").get<std::uint64_t>();
    return report;
}

std::string default_report_path(Command command, std::uint64_t seed) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream name;
    name << "wgain-" << command_to_string(command) << '-' << std::put_time(&tm, "%Y%m%dT%H%M%S")
         << "-seed" << seed;
    std::string candidate = name.str() + ".json";
    int counter = 1;
    while (std::filesystem::exists(candidate)) {
        candidate = name.str() + "-" + std::to_string(counter++) + ".json";
    }
    return candidate;
}

namespace {

EstimatorOptions estimator_options(const RunConfig& config) {
    EstimatorOptions opts = config.estimator;
    opts.auto_s = config.auto_s;
    opts.auto_c4 = config.auto_c4;
    return opts;
}

int run_estimate(const RunConfig& config, std::ostream& out) {
    const Dataset ds = read_csv(*config.data_path);
    const DictionarySpec spec = config.resolve_spec();
    const EstimateReport report = estimate(ds, spec, config.smoothing, estimator_options(config));

    const std::string path =
        config.out_path ? *config.out_path
                        : default_report_path(config.command, config.estimator.seed);
    write_report(report_to_json(report, config), path);

    out << "theta_sig        " << report.theta_sig << '\n'
        << "theta_naive      " << report.theta_naive << '\n'
        << "theta_mbdml      " << report.theta_mbdml << '\n'
        << "se_formula       " << report.se_formula << '\n'
        << "se_empirical     " << report.se_empirical << '\n'
        << "bias_bound       " << report.bias_bound << '\n'
        << "ci               [" << report.ci.lo << ", " << report.ci.hi << "]\n"
        << "share_positive   " << report.share_positive << '\n'
        << "s_used           " << report.s_used << '\n'
        << "report written to " << path << '\n';
    return kExitOk;
}

int run_tune(const RunConfig& config, std::ostream& out) {
    const Dataset ds = read_csv(*config.data_path);
    const DictionarySpec spec = config.resolve_spec();
    CrossFitEngine engine(ds, spec, estimator_options(config));
    const CateMoments moments = estimate_cate_moments(engine.tau_plugins());
    const double c4 = config.auto_c4 ? moments.p_tau : config.smoothing.c4;
    const SmoothingChoice margin = c2_opt_margin(moments, config.smoothing.alpha4, c4);
    const SmoothingChoice no_margin = c2_opt_no_margin(moments);

    json doc;
    doc["kind"] = "tune_report";
    doc["moments"] = moments_to_json(moments);
    doc["c4"] = c4;
    doc["alpha4"] = config.smoothing.alpha4;
    doc["margin"] = {{"c2", margin.c2},
                     {"rate_exponent", margin.rate_exponent},
                     {"s_star", margin.s_star(ds.n())}};
    doc["no_margin"] = {{"c2", no_margin.c2},
                        {"rate_exponent", no_margin.rate_exponent},
                        {"s_star", no_margin.s_star(ds.n())}};
    doc["n"] = ds.n();
    doc["provenance"] = provenance_block(config);

    const std::string path =
        config.out_path ? *config.out_path
                        : default_report_path(config.command, config.estimator.seed);
    write_report(doc, path);

    out << "mu               " << moments.mu << '\n'
        << "sigma2           " << moments.sigma2 << '\n'
        << "p_tau            " << moments.p_tau << '\n'
        << "var_tau_sq       " << moments.var_tau_sq << '\n'
        << "c2 (margin)      " << margin.c2 << '\n'
        << "s* (margin)      " << margin.s_star(ds.n()) << '\n'
        << "c2 (no margin)   " << no_margin.c2 << '\n'
        << "s* (no margin)   " << no_margin.s_star(ds.n()) << '\n'
        << "report written to " << path << '\n';
    return kExitOk;
}

int run_simulate(const RunConfig& config, std::ostream& out) {
    const DictionarySpec spec = config.resolve_spec();
    SimulationOptions opts;
    opts.estimator = estimator_options(config);
    opts.threads = config.threads;
    opts.known_truth_moments = config.known_truth;
    opts.spec_name = config.inline_spec ? "inline" : config.spec_name;

    const McResult result = run_mc(config.dgp, spec, config.smoothing, config.reps,
                                   config.estimator.seed, opts);

    const std::string path =
        config.out_path ? *config.out_path
                        : default_report_path(config.command, config.estimator.seed);
    write_report(report_to_json(result, config), path);
    if (config.plot_path) emit_sampling_distribution(result, *config.plot_path);

    out << "truth " << result.truth << ", " << config.reps << " replications\n";
    for (const auto& summary : result.summaries) {
        out << to_string(summary.kind) << ": bias " << summary.bias << ", se " << summary.se
            << ", rmse " << summary.rmse;
        if (summary.coverage) out << ", coverage " << *summary.coverage;
        out << '\n';
    }
    out << "report written to " << path << '\n';
    if (config.plot_path) out << "plot data written to " << *config.plot_path << '\n';
    return kExitOk;
}

int run_bias_bound(const RunConfig& config, std::ostream& out) {
    out.precision(8);
    if (config.no_margin) {
        const BiasBound bound = bias_bound_no_margin(config.bound_s);
        out << "no-margin bound: " << bound.upper << '\n';
        return kExitOk;
    }
    const BiasBound quad = bias_bound_quadrature(config.bound_c4, config.bound_alpha4, config.bound_s);
    out << "quadrature:  " << quad.upper << '\n';
    const double m = config.bound_alpha4 + 1.0;
    const bool closed_valid =
        std::abs(m - std::lround(m)) <= 1e-12 && std::lround(m) % 2 == 0 && m >= 2.0;
    if (closed_valid) {
        const BiasBound closed = bias_bound_closed(config.bound_c4, config.bound_alpha4, config.bound_s);
        out << "closed-form: " << closed.upper << '\n';
    } else {
        out << "closed-form: n/a (alpha4+1 must be an even natural number)\n";
    }
    return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        switch (config.command) {
            case Command::Estimate: return run_estimate(config, out);
            case Command::Simulate: return run_simulate(config, out);
            case Command::Tune: return run_tune(config, out);
            case Command::BiasBound: return run_bias_bound(config, out);
        }
        return kExitConfig;
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const data_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const numeric_error& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const io_error& e) {
        err << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        err << "io error: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace wgain
