// Acceptance suite: every release criterion in one binary, one printed
// PASS/FAIL line per criterion.  The Monte Carlo runs are desk scale
// (200 replications) with a fixed master seed.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wgain/bias.hpp"
#include "wgain/data_model.hpp"
#include "wgain/estimator.hpp"
#include "wgain/lasso.hpp"
#include "wgain/rng.hpp"
#include "wgain/simulation.hpp"
#include "wgain/smoothing.hpp"
#include "wgain/tuning.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

using namespace wgain;

namespace {

constexpr std::uint64_t kMasterSeed = 7;
constexpr int kReps = 200;

bool note(int criterion, const std::string& what, bool pass) {
    std::printf("[criterion %2d] %s: %s\n", criterion, pass ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    return pass;
}

SimulationOptions mc_options(const std::string& spec_name) {
    SimulationOptions opts;
    opts.spec_name = spec_name;
    opts.known_truth_moments = true;
    return opts;
}

const McResult& spec1_sigmoid() {
    static const McResult result = [] {
        DgpConfig cfg;
        cfg.n = 2000;
        return run_mc(cfg, dictionary_preset("sim1"), SmoothingConfig{}, kReps, kMasterSeed,
                      mc_options("sim1"));
    }();
    return result;
}

const McResult& spec_sigmoid(const char* name) {
    auto make = [](const char* spec_name) {
        DgpConfig cfg;
        cfg.n = 2000;
        return run_mc(cfg, dictionary_preset(spec_name), SmoothingConfig{}, kReps, kMasterSeed,
                      mc_options(spec_name));
    };
    static const McResult spec2 = make("sim2");
    static const McResult spec3 = make("sim3");
    return std::string(name) == "sim2" ? spec2 : spec3;
}

const McResult& spec1_lse() {
    static const McResult result = [] {
        DgpConfig cfg;
        cfg.n = 2000;
        SmoothingConfig smoothing;
        smoothing.family = SmoothingFamily::Lse;
        return run_mc(cfg, dictionary_preset("sim1"), smoothing, kReps, kMasterSeed,
                      mc_options("sim1"));
    }();
    return result;
}

}  // namespace

TEST_CASE("criterion 1: specification (1) Monte Carlo table") {
    const auto start = std::chrono::steady_clock::now();
    const McResult& result = spec1_sigmoid();
    const double minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;

    const McSummary& dml = result.summary(EstimatorKind::Dml);
    const McSummary& naive = result.summary(EstimatorKind::Naive);

    CHECK(note(1, "DML bias " + std::to_string(dml.bias) + " in [-0.06, 0.02]",
               dml.bias >= -0.06 && dml.bias <= 0.02));
    CHECK(note(1, "DML SE " + std::to_string(dml.se) + " in [0.03, 0.06]",
               dml.se >= 0.03 && dml.se <= 0.06));
    CHECK(note(1, "coverage " + std::to_string(*dml.coverage) + " >= 0.93",
               *dml.coverage >= 0.93));
    CHECK(note(1, "naive bias " + std::to_string(naive.bias) + " >= 1.5", naive.bias >= 1.5));
    note(1, "runtime " + std::to_string(minutes) + " min (informational, budget 15)",
         minutes <= 15.0);
}

TEST_CASE("criterion 2: standard errors grow across specifications") {
    const double se1 = spec1_sigmoid().summary(EstimatorKind::Dml).se;
    const double se2 = spec_sigmoid("sim2").summary(EstimatorKind::Dml).se;
    const double se3 = spec_sigmoid("sim3").summary(EstimatorKind::Dml).se;

    CHECK(note(2,
               "SE monotone: " + std::to_string(se1) + " < " + std::to_string(se2) + " < " +
                   std::to_string(se3),
               se1 < se2 && se2 < se3));
    CHECK(note(2, "spec (3) SE at least twice spec (1) SE", se3 >= 2.0 * se1));
}

TEST_CASE("criterion 3: smoothing family flips the bias sign") {
    const double sigmoid_bias = spec1_sigmoid().summary(EstimatorKind::Dml).bias;
    const double lse_bias = spec1_lse().summary(EstimatorKind::Dml).bias;
    CHECK(note(3, "sigmoid bias " + std::to_string(sigmoid_bias) + " < 0", sigmoid_bias < 0.0));
    CHECK(note(3, "LSE bias " + std::to_string(lse_bias) + " > 0", lse_bias > 0.0));
}

TEST_CASE("criterion 4: bias-bound closed form vs quadrature") {
    bool agree = true;
    for (double alpha4 : {1.0, 3.0}) {
        for (double s : {0.5, 1.0, 5.0, 20.0}) {
            const double closed = bias_bound_closed(1.0, alpha4, s).upper;
            const double quad = bias_bound_quadrature(1.0, alpha4, s).upper;
            agree = agree && std::abs(closed - quad) < 1e-7;
        }
    }
    CHECK(note(4, "closed form and quadrature agree to 1e-7 on the (alpha4, s) grid", agree));
    const double kernel = bias_bound_closed(1.0, 1.0, 1.0).upper;
    CHECK(note(4, "alpha4=1, c4=1, s=1 equals pi^2/3 to 1e-8",
               std::abs(kernel - M_PI * M_PI / 3.0) < 1e-8));
}

TEST_CASE("criterion 5: smoothing-bias oracle") {
    const TauDensity logistic = TauDensity::logistic(0.0, 1.0);
    bool in_band = true;
    for (double s : {1.0, 2.0, 5.0, 10.0, 100.0}) {
        const double bias = bias_oracle_prop2(logistic, s);
        const double upper = bias_bound_closed(0.25, 1.0, s).upper;
        in_band = in_band && bias < 0.0 && bias >= -upper;
    }
    CHECK(note(5, "logistic bias negative and within the c4 = 1/4 band", in_band));

    const double theta_sig = welfare_truth(logistic) + bias_oracle_prop2(logistic, 1e6);
    CHECK(note(5, "theta_sig at s = 1e6 equals log 2 within 1e-6",
               std::abs(theta_sig - std::log(2.0)) < 1e-6));

    const double z = 0.5;  // mu/sd for normal(1, 2)
    const double closed = 1.0 * (0.5 * std::erfc(-z / std::sqrt(2.0))) +
                          2.0 * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    const double quad = welfare_truth(TauDensity::normal(1.0, 2.0));
    CHECK(note(5, "normal(1,2) truncated mean matches quadrature to 1e-8",
               std::abs(closed - quad) < 1e-8));
}

TEST_CASE("criterion 6: optimal smoothing constants") {
    const CateMoments truth = dgp_truth_moments();
    const SmoothingChoice margin = c2_opt_margin(truth, 1.0, 0.25);
    const SmoothingChoice no_margin = c2_opt_no_margin(truth);
    CHECK(note(6, "c2 (margin) = " + std::to_string(margin.c2) + " vs 0.92467",
               std::abs(margin.c2 - 0.92467) < 1e-4));
    CHECK(note(6, "c2 (no margin) = " + std::to_string(no_margin.c2) + " vs 0.97068",
               std::abs(no_margin.c2 - 0.97068) < 1e-4));

    // grid-search oracle over the worst-case MSE bound
    const double n = 2000.0;
    const double s_star = margin.s_star(2000);
    const double c5 = 0.25 * M_PI * M_PI / 3.0;
    const double c7 = truth.var_tau_sq / 16.0;
    auto mse = [&](double s) { return c5 * c5 / std::pow(s, 4) + c7 * s * s / n; };
    double best_s = s_star / 4.0;
    for (int k = 0; k <= 4000; ++k) {
        const double s = s_star / 4.0 * std::pow(16.0, k / 4000.0);
        if (mse(s) < mse(best_s)) best_s = s;
    }
    CHECK(note(6, "grid minimizer within 1% of s*", std::abs(best_s - s_star) / s_star < 0.01));
}

TEST_CASE("criterion 7: folded-normal quantiles") {
    CHECK(note(7, "cv(0) = 1.959964 within 1e-5",
               std::abs(folded_normal_cv(0.0, 0.95) - 1.959964) < 1e-5));
    CHECK(note(7, "cv(1) = 2.6499 within 5e-4",
               std::abs(folded_normal_cv(1.0, 0.95) - 2.6499) < 5e-4));
    CHECK(note(7, "cv(20) = 21.6449 within 1e-3",
               std::abs(folded_normal_cv(20.0, 0.95) - 21.6449) < 1e-3));
    bool monotone = true;
    double previous = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double c = folded_normal_cv(0.2 * k, 0.95);
        monotone = monotone && c > previous;
        previous = c;
    }
    CHECK(note(7, "monotone in the bias ratio on a 50-point grid", monotone));
}

TEST_CASE("criterion 8: solver correctness") {
    Rng rng(801);
    MatrixXd X(40, 5);
    for (Eigen::Index i = 0; i < 40; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) X(i, j) = rng.normal();
    }
    VectorXd beta_true(5);
    beta_true << 1.0, -0.5, 0.0, 0.25, 2.0;
    VectorXd y = X * beta_true;
    for (Eigen::Index i = 0; i < 40; ++i) y[i] += 0.2 * rng.normal();

    const LassoFit ols = lasso_regression(X, y, 0.0);
    const VectorXd direct = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    CHECK(note(8, "lambda = 0 equals the normal-equation solution to 1e-6",
               (ols.coefficients - direct).cwiseAbs().maxCoeff() < 1e-6));

    const MatrixXd G = X.transpose() * X / 40.0;
    const VectorXd M = X.transpose() * y / 40.0;
    const LassoFit riesz = riesz_lasso(G, M, 0.07);
    CHECK(note(8, "riesz KKT violation " + std::to_string(riesz.max_kkt_violation) + " <= 1e-7",
               riesz.converged && riesz.max_kkt_violation <= 1e-7));

    SolverOptions tight;
    tight.coef_tolerance = 1e-13;
    tight.kkt_tolerance = 1e-11;
    const LassoFit a = lasso_regression(X, y, 0.07, tight);
    const LassoFit b = riesz_lasso(G, M, 0.07, tight);
    CHECK(note(8, "cross-solver coefficient agreement to 1e-8",
               (a.coefficients - b.coefficients).cwiseAbs().maxCoeff() < 1e-8));
}

TEST_CASE("criterion 9: half-ATE limit") {
    DgpConfig cfg;
    cfg.n = 5000;
    cfg.seed = derive_seed(kMasterSeed, 900);
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.seed = derive_seed(kMasterSeed, 901);
    opts.auto_s = false;
    opts.moments_override = dgp_truth_moments();
    SmoothingConfig smoothing;
    smoothing.s = 1e-8;
    const EstimateReport report = estimate(ds, dictionary_preset("sim1"), smoothing, opts);

    // AIPW comparison on the same folds, with the empirical treated share
    const CrossFitEngine engine(ds, dictionary_preset("sim1"), opts);
    const double share = static_cast<double>(ds.treated_count()) / static_cast<double>(ds.n());
    VectorXd ate_scores(ds.n());
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const int ell = engine.plan().assignments[static_cast<std::size_t>(i)];
        const VectorXd b = engine.fold_transform(ell).apply_row(engine.raw().row(i).transpose());
        const double g1 = b.dot(engine.fold_gamma(ell, 1).coefficients);
        const double g2 = b.dot(engine.fold_gamma(ell, 0).coefficients);
        double score = g1 - g2;
        if (ds.d()[i] == 1) {
            score += (ds.y()[i] - g1) / share;
        } else {
            score -= (ds.y()[i] - g2) / (1.0 - share);
        }
        ate_scores[i] = score;
    }
    const double half_ate = 0.5 * ate_scores.mean();

    // The s^2-scaled formula SE degenerates at s = 1e-8; the empirical score
    // SE is the meaningful statistical scale for this comparison.
    CHECK(note(9,
               "theta_sig(s=1e-8) = " + std::to_string(report.theta_sig) + " vs half ATE " +
                   std::to_string(half_ate) + " within 3 empirical SEs",
               std::abs(report.theta_sig - half_ate) <= 3.0 * report.se_empirical));

    const RieszMoments moments = engine.riesz_moments(0, SmoothingFamily::Sigmoid, 1e-12);
    const std::vector<int> rows = engine.plan().complement_indices(0);
    VectorXd half_means = VectorXd::Zero(engine.raw().cols());
    for (int i : rows) {
        half_means += engine.fold_transform(0).apply_row(engine.raw().row(i).transpose());
    }
    half_means *= 0.5 / static_cast<double>(rows.size());
    CHECK(note(9, "M1 in the vanishing-smoothing limit equals half the column means to 1e-9",
               (moments.M1 - half_means).cwiseAbs().maxCoeff() < 1e-9));
}

TEST_CASE("criterion 10: smoothing property suites") {
    Rng rng(1000);
    int sandwich_failures = 0;
    for (int k = 0; k < 10000; ++k) {
        const double t = (rng.uniform01() - 0.5) * 60.0;
        const double s = 0.01 + rng.uniform01() * 100.0;
        if (!(m_sig(t, s) <= m_indicator(t) && m_indicator(t) <= m_lse(t, s))) ++sandwich_failures;
    }
    CHECK(note(10, "sandwich inequality over 10^4 random points, zero failures",
               sandwich_failures == 0));

    int slope_failures = 0;
    const double eps = 1e-5;
    for (int k = 0; k < 10000; ++k) {
        const double h = (rng.uniform01() - 0.5) * 100.0;
        const double slope = (riesz_weight_h(h + eps) - riesz_weight_h(h - eps)) / (2.0 * eps);
        if (!(std::abs(slope) <= 0.5 + 1e-6)) ++slope_failures;
    }
    CHECK(note(10, "|dA1/dh| <= 1/2 over 10^4 grid points, zero failures", slope_failures == 0));

    int derivative_failures = 0;
    for (int k = 0; k < 10000; ++k) {
        const double t = (rng.uniform01() - 0.5) * 40.0;
        const double s = 0.05 + rng.uniform01() * 20.0;
        const double fd = (m_sig(t + 1e-6, s) - m_sig(t - 1e-6, s)) / 2e-6;
        if (!(std::abs(fd - riesz_weight(t, s)) < 1e-6)) ++derivative_failures;
    }
    CHECK(note(10, "finite differences match the riesz weight to 1e-6, zero failures",
               derivative_failures == 0));
}
