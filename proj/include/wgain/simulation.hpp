#pragma once

#include "wgain/estimator.hpp"
#include "wgain/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wgain {

// Data-generating process: q = p0 + extra_covariates exponential covariates
// with rate 2/p0; the treated potential outcome is the log ratio of the two
// group minima plus noise, the control one is pure noise.  The implied CATE
// is Logistic(0,1) and the welfare target equals log 2.
struct DgpConfig {
    Eigen::Index n = 2000;
    int p0 = 6;
    int extra_covariates = 0;
    double noise_sd = 0.1;
    double propensity = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset draw_dataset(const DgpConfig& cfg);

// Known-truth CATE moments of the DGP: density maximum 1/4 and
// Var(tau^2) = 16 pi^4 / 45.
CateMoments dgp_truth_moments();

double dgp_truth();  // log 2

enum class EstimatorKind { Naive, Dml, MbDml };

std::string to_string(EstimatorKind kind);

struct McSummary {
    double bias = 0.0;
    double se = 0.0;    // population-convention sd across replications
    double rmse = 0.0;
    std::optional<double> coverage;  // bias-aware CI, DML only
    int reps = 0;
    EstimatorKind kind = EstimatorKind::Dml;
    std::string spec_name;
    SmoothingFamily family = SmoothingFamily::Sigmoid;
};

struct McResult {
    std::vector<McSummary> summaries;  // Naive, Dml, MbDml in that order
    MatrixXd estimates;                // reps x 3, columns in the same order
    VectorXd ci_lo;                    // DML bias-aware interval per replication
    VectorXd ci_hi;
    double truth = 0.0;

    const McSummary& summary(EstimatorKind kind) const;
};

struct SimulationOptions {
    EstimatorOptions estimator;      // per-replication seeds are derived internally
    int threads = 0;                 // 0 = hardware concurrency
    bool known_truth_moments = true; // feed the DGP truths instead of the rule of thumb
    std::string spec_name;           // label carried into the summaries
};

// Monte Carlo loop: replication r runs on seed stream (master_seed, r), so
// the result is independent of the thread count and deterministic given the
// master seed.
McResult run_mc(const DgpConfig& cfg, const DictionarySpec& spec, const SmoothingConfig& smoothing,
                int reps, std::uint64_t master_seed, const SimulationOptions& opts);

// Per-replication estimates plus normal Q-Q pairs as CSV, with the truth in
// every row; plotting-position convention (k - 0.5)/reps.
void emit_sampling_distribution(const McResult& result, const std::string& path);

}  // namespace wgain
