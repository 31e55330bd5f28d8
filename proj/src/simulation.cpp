#include "wgain/simulation.hpp"

#include "wgain/bias.hpp"
#include "wgain/rng.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace wgain {

void DgpConfig::validate() const {
    if (p0 < 2 || p0 % 2 != 0) throw config_error("DgpConfig: p0 must be even and >= 2");
    if (extra_covariates < 0) throw config_error("DgpConfig: negative extra covariate count");
    if (!(noise_sd >= 0.0)) throw config_error("DgpConfig: negative noise sd");
    if (!(propensity > 0.0 && propensity < 1.0)) {
        throw config_error("DgpConfig: propensity must be in (0,1)");
    }
    if (n < 4) throw config_error("DgpConfig: n too small");
}

Dataset draw_dataset(const DgpConfig& cfg) {
    cfg.validate();
    const Eigen::Index q = cfg.p0 + cfg.extra_covariates;
    const double rate = 2.0 / cfg.p0;
    const int half = cfg.p0 / 2;

    VectorXd y(cfg.n);
    VectorXi d(cfg.n);
    MatrixXd z(cfg.n, q);

    Rng rng(cfg.seed);
    for (Eigen::Index i = 0; i < cfg.n; ++i) {
        for (Eigen::Index j = 0; j < q; ++j) z(i, j) = rng.exponential(rate);
        double min_top = z(i, 0), min_bottom = z(i, half);
        for (int j = 1; j < half; ++j) min_top = std::min(min_top, z(i, j));
        for (int j = half + 1; j < cfg.p0; ++j) min_bottom = std::min(min_bottom, z(i, j));
        const double y1 = std::log(min_top / min_bottom) + rng.normal(0.0, cfg.noise_sd);
        const double y0 = rng.normal(0.0, cfg.noise_sd);
        d[i] = rng.bernoulli(cfg.propensity) ? 1 : 0;
        y[i] = d[i] == 1 ? y1 : y0;
    }
    return Dataset(std::move(y), std::move(d), std::move(z));
}

CateMoments dgp_truth_moments() {
    const double pi2 = M_PI * M_PI;
    return known_truth_moments(0.0, pi2 / 3.0, 0.25, 16.0 * pi2 * pi2 / 45.0);
}

double dgp_truth() { return std::log(2.0); }

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Naive: return "naive";
        case EstimatorKind::Dml: return "dml";
        case EstimatorKind::MbDml: return "mbdml";
    }
    return "dml";
}

const McSummary& McResult::summary(EstimatorKind kind) const {
    for (const auto& s : summaries) {
        if (s.kind == kind) return s;
    }
    throw std::logic_error("McResult: missing summary");
}

namespace {

McSummary summarize(const VectorXd& estimates, double truth, EstimatorKind kind,
                    const std::string& spec_name, SmoothingFamily family) {
    const int reps = static_cast<int>(estimates.size());
    McSummary s;
    s.kind = kind;
    s.reps = reps;
    s.spec_name = spec_name;
    s.family = family;
    const double mean = estimates.mean();
    s.bias = mean - truth;
    s.se = std::sqrt((estimates.array() - mean).square().sum() / reps);
    s.rmse = std::sqrt((estimates.array() - truth).square().sum() / reps);
    return s;
}

}  // namespace

McResult run_mc(const DgpConfig& cfg, const DictionarySpec& spec, const SmoothingConfig& smoothing,
                int reps, std::uint64_t master_seed, const SimulationOptions& opts) {
    if (reps < 2) throw std::invalid_argument("run_mc: need at least 2 replications");
    cfg.validate();

    McResult result;
    result.truth = dgp_truth();
    result.estimates.resize(reps, 3);
    result.ci_lo.resize(reps);
    result.ci_hi.resize(reps);

    auto run_one = [&](int rep) {
        const std::uint64_t rep_seed = derive_seed(master_seed, static_cast<std::uint64_t>(rep));
        DgpConfig draw_cfg = cfg;
        draw_cfg.seed = derive_seed(rep_seed, 1);
        const Dataset ds = draw_dataset(draw_cfg);

        EstimatorOptions est = opts.estimator;
        est.seed = derive_seed(rep_seed, 2);
        if (opts.known_truth_moments) est.moments_override = dgp_truth_moments();

        const EstimateReport report = estimate(ds, spec, smoothing, est);
        result.estimates(rep, 0) = report.theta_naive;
        result.estimates(rep, 1) = report.theta_sig;
        result.estimates(rep, 2) = report.theta_mbdml;
        result.ci_lo[rep] = report.ci.lo;
        result.ci_hi[rep] = report.ci.hi;
    };

    int threads = opts.threads > 0 ? opts.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, reps));
    if (threads == 1) {
        for (int rep = 0; rep < reps; ++rep) run_one(rep);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                while (true) {
                    const int rep = next.fetch_add(1);
                    if (rep >= reps) return;
                    try {
                        run_one(rep);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    int covered = 0;
    for (int rep = 0; rep < reps; ++rep) {
        covered += (result.ci_lo[rep] <= result.truth && result.truth <= result.ci_hi[rep]);
    }

    const std::array<EstimatorKind, 3> kinds{EstimatorKind::Naive, EstimatorKind::Dml,
                                             EstimatorKind::MbDml};
    for (int k = 0; k < 3; ++k) {
        McSummary s = summarize(result.estimates.col(k), result.truth, kinds[k], opts.spec_name,
                                smoothing.family);
        if (kinds[k] == EstimatorKind::Dml) s.coverage = static_cast<double>(covered) / reps;
        result.summaries.push_back(std::move(s));
    }
    return result;
}

void emit_sampling_distribution(const McResult& result, const std::string& path) {
    const int reps = static_cast<int>(result.estimates.rows());
    if (reps < 2) throw std::invalid_argument("emit_sampling_distribution: need at least 2 replications");

    std::ofstream out(path);
    if (!out) throw io_error("emit_sampling_distribution: cannot open " + path);
    out << "kind,rep,estimate,truth,qq_theoretical,qq_standardized\n";
    out.precision(17);

    // Per estimator: rows sorted by estimate so the Q-Q columns pair the
    // k-th order statistic with the (k - 0.5)/reps normal quantile.
    for (const auto& summary : result.summaries) {
        const int col = summary.kind == EstimatorKind::Naive ? 0
                        : summary.kind == EstimatorKind::Dml ? 1
                                                             : 2;
        const VectorXd estimates = result.estimates.col(col);
        const double mean = estimates.mean();
        const double sd = std::sqrt((estimates.array() - mean).square().sum() / reps);

        std::vector<int> order(static_cast<std::size_t>(reps));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return estimates[a] < estimates[b]; });

        for (int k = 0; k < reps; ++k) {
            const int rep = order[static_cast<std::size_t>(k)];
            const double quantile = normal_quantile((k + 0.5) / reps);
            const double standardized = sd > 0.0 ? (estimates[rep] - mean) / sd : 0.0;
            out << to_string(summary.kind) << ',' << rep << ',' << estimates[rep] << ','
                << result.truth << ',' << quantile << ',' << standardized << '\n';
        }
    }
    if (!out.good()) throw io_error("emit_sampling_distribution: write failed for " + path);
}

}  // namespace wgain
