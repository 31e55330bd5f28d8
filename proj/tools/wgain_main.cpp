#include "wgain/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

using nlohmann::json;

// Flags collected into an override document; anything the user did not pass
// stays absent so the config file / defaults win.
struct CommonFlags {
    std::string config_path;
    std::string data;
    std::string spec;
    std::string s;
    std::string c4;
    std::string family;
    std::string out;
    double alpha4 = 1.0;
    double level = 0.95;
    double lambda_scale = 1.0;
    double riesz_scale = 1.0;
    int folds = 5;
    std::uint64_t seed = 0;
    bool margin = true;
    bool no_margin_flag = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override its values");
    cmd->add_option("--spec", flags.spec, "dictionary preset (sim1..sim3, emp1..emp4)");
    cmd->add_option("--s", flags.s, "smoothing parameter, or 'auto'");
    cmd->add_option("--c4", flags.c4, "margin constant c4, or 'auto'");
    cmd->add_option("--alpha4", flags.alpha4, "margin exponent alpha4");
    cmd->add_option("--family", flags.family, "smoothing family: sigmoid | lse | indicator");
    cmd->add_option("--margin", flags.margin, "assume the margin condition (true/false)");
    cmd->add_option("--folds", flags.folds, "number of cross-fitting folds");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--level", flags.level, "confidence level");
    cmd->add_option("--lambda-scale", flags.lambda_scale, "multiplier on sqrt(ln(p+1)/n)");
    cmd->add_option("--riesz-scale", flags.riesz_scale, "multiplier on n^(-1/4)");
    cmd->add_option("--out", flags.out, "report output path (default: timestamped file)");
}

json smoothing_value(const std::string& text) {
    if (text == "auto") return json("auto");
    try {
        return json(std::stod(text));
    } catch (const std::exception&) {
        throw wgain::config_error("expected a number or 'auto', got '" + text + "'");
    }
}

json overrides_from_flags(const CLI::App* cmd, const CommonFlags& flags) {
    json overrides = json::object();
    auto passed = [cmd](const std::string& name) { return cmd->count(name) > 0; };

    if (passed("--spec")) overrides["spec"] = flags.spec;
    if (passed("--folds")) overrides["folds"] = flags.folds;
    if (passed("--seed")) overrides["seed"] = flags.seed;
    if (passed("--level")) overrides["level"] = flags.level;
    if (passed("--out")) overrides["out"] = flags.out;
    if (passed("--lambda-scale")) overrides["penalties"]["lambda_scale"] = flags.lambda_scale;
    if (passed("--riesz-scale")) overrides["penalties"]["riesz_scale"] = flags.riesz_scale;
    if (passed("--s")) overrides["smoothing"]["s"] = smoothing_value(flags.s);
    if (passed("--c4")) overrides["smoothing"]["c4"] = smoothing_value(flags.c4);
    if (passed("--alpha4")) overrides["smoothing"]["alpha4"] = flags.alpha4;
    if (passed("--family")) overrides["smoothing"]["family"] = flags.family;
    if (passed("--margin")) overrides["smoothing"]["margin_assumed"] = flags.margin;
    return overrides;
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw wgain::io_error("cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw wgain::config_error("invalid JSON in " + path + ": " + e.what());
    }
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Debiased welfare-gain estimation with smoothed treatment rules"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* cmd_estimate = app.add_subcommand("estimate", "estimate the welfare gain from a CSV");
    add_common_flags(cmd_estimate, flags);
    std::string data_path;
    cmd_estimate->add_option("--data", data_path, "CSV with columns y,d,<covariates>")->required();

    auto* cmd_tune = app.add_subcommand("tune", "report CATE moments and smoothing choices");
    add_common_flags(cmd_tune, flags);
    std::string tune_data;
    cmd_tune->add_option("--data", tune_data, "CSV with columns y,d,<covariates>")->required();

    auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo study against the known truth");
    add_common_flags(cmd_simulate, flags);
    long long sim_n = 2000;
    int sim_reps = 200, sim_p0 = 6, sim_extra = 0, sim_threads = 0;
    double sim_noise = 0.1, sim_propensity = 0.5;
    bool sim_known_truth = true;
    std::string plot_path;
    cmd_simulate->add_option("--n", sim_n, "sample size per replication");
    cmd_simulate->add_option("--reps", sim_reps, "number of replications");
    cmd_simulate->add_option("--p0", sim_p0, "sparsity (even)");
    cmd_simulate->add_option("--extra-covariates", sim_extra, "unused covariates appended to z");
    cmd_simulate->add_option("--noise-sd", sim_noise, "outcome noise sd");
    cmd_simulate->add_option("--propensity", sim_propensity, "treatment probability");
    cmd_simulate->add_option("--threads", sim_threads, "replication worker threads (0 = auto)");
    cmd_simulate->add_option("--known-truth", sim_known_truth,
                             "use the DGP truth moments instead of the rule of thumb");
    cmd_simulate->add_option("--plot-data", plot_path, "write per-replication estimates and Q-Q data");

    auto* cmd_bound = app.add_subcommand("bias-bound", "print the worst-case smoothing bias bound");
    std::string bound_config;
    double bound_c4 = 1.0, bound_alpha4 = 1.0, bound_s = 1.0;
    bool bound_no_margin = false;
    cmd_bound->add_option("--config", bound_config, "JSON config file");
    cmd_bound->add_option("--c4", bound_c4, "upper margin constant");
    cmd_bound->add_option("--alpha4", bound_alpha4, "margin exponent");
    cmd_bound->add_option("--s", bound_s, "smoothing parameter");
    cmd_bound->add_flag("--no-margin", bound_no_margin, "use the 2 log2 / s bound instead");

    try {
        app.parse(argc, argv);

        const CLI::App* active = app.get_subcommands().front();
        json overrides = json::object();
        std::string config_path;

        if (active == cmd_bound) {
            config_path = bound_config;
            overrides["command"] = "bias-bound";
            if (cmd_bound->count("--c4")) overrides["bias_bound"]["c4"] = bound_c4;
            if (cmd_bound->count("--alpha4")) overrides["bias_bound"]["alpha4"] = bound_alpha4;
            if (cmd_bound->count("--s")) overrides["bias_bound"]["s"] = bound_s;
            if (cmd_bound->count("--no-margin")) overrides["bias_bound"]["no_margin"] = true;
        } else {
            config_path = flags.config_path;
            overrides = overrides_from_flags(active, flags);
            if (active == cmd_estimate) {
                overrides["command"] = "estimate";
                overrides["data"] = data_path;
            } else if (active == cmd_tune) {
                overrides["command"] = "tune";
                overrides["data"] = tune_data;
            } else {
                overrides["command"] = "simulate";
                if (active->count("--n")) overrides["simulate"]["n"] = sim_n;
                if (active->count("--reps")) overrides["simulate"]["reps"] = sim_reps;
                if (active->count("--p0")) overrides["simulate"]["p0"] = sim_p0;
                if (active->count("--extra-covariates"))
                    overrides["simulate"]["extra_covariates"] = sim_extra;
                if (active->count("--noise-sd")) overrides["simulate"]["noise_sd"] = sim_noise;
                if (active->count("--propensity"))
                    overrides["simulate"]["propensity"] = sim_propensity;
                if (active->count("--threads")) overrides["simulate"]["threads"] = sim_threads;
                if (active->count("--known-truth"))
                    overrides["simulate"]["known_truth"] = sim_known_truth;
                if (active->count("--plot-data")) overrides["plot_data"] = plot_path;
            }
        }

        const json file_config = load_config_file(config_path);
        const wgain::RunConfig config = wgain::parse_run_config(file_config, overrides);
        return wgain::run(config, std::cout, std::cerr);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : wgain::kExitConfig;
    } catch (const wgain::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return wgain::kExitConfig;
    } catch (const wgain::io_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return wgain::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
