#include "wgain/estimator.hpp"

#include "wgain/data_model.hpp"
#include "wgain/rng.hpp"
#include "wgain/simulation.hpp"
#include "wgain/smoothing.hpp"

#include <doctest.h>

#include <cmath>

using namespace wgain;

namespace {

// Outcome depends on z only, never on d: the welfare gain is exactly zero.
Dataset null_effect_dataset(Eigen::Index n, std::uint64_t seed, double noise_sd = 0.5) {
    Rng rng(seed);
    VectorXd y(n);
    VectorXi d(n);
    MatrixXd z(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) z(i, j) = rng.normal();
        d[i] = rng.bernoulli(0.5) ? 1 : 0;
        y[i] = z(i, 0) + noise_sd * rng.normal();
    }
    return Dataset(std::move(y), std::move(d), std::move(z));
}

DictionarySpec linear_spec(int q) {
    DictionarySpec spec;
    spec.include_intercept = true;
    for (int j = 0; j < q; ++j) spec.power_terms.push_back({j, 1});
    return spec;
}

SmoothingConfig fixed_smoothing(double s) {
    SmoothingConfig smoothing;
    smoothing.family = SmoothingFamily::Sigmoid;
    smoothing.s = s;
    return smoothing;
}

}  // namespace

TEST_CASE("fit_fold recovers a shared linear outcome with no effect") {
    // y = z1 in both arms, tiny noise: both regressions find the z1 slope
    Rng rng(3);
    const Eigen::Index n = 400;
    VectorXd y(n);
    VectorXi d(n);
    MatrixXd z(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        z(i, 0) = rng.normal();
        z(i, 1) = rng.normal();
        d[i] = static_cast<int>(i % 2);
        y[i] = z(i, 0);
    }
    const Dataset ds(std::move(y), std::move(d), std::move(z));

    EstimatorOptions opts;
    opts.folds = 5;
    opts.seed = 1;
    opts.lambda_scale = 0.01;  // near-unpenalized
    const FoldPlan plan = make_fold_plan(ds.n(), opts.folds, 9);
    const FoldFit fit = fit_fold(ds, plan, 0, linear_spec(2), fixed_smoothing(2.0), opts);

    CHECK(fit.gamma1.coefficients[1] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.gamma2.coefficients[1] == doctest::Approx(1.0).epsilon(0.05));
    CHECK((fit.gamma1.coefficients - fit.gamma2.coefficients).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("smoke run on the simulated process") {
    DgpConfig cfg;
    cfg.n = 2000;
    cfg.seed = 4242;
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.seed = 7;
    opts.moments_override = dgp_truth_moments();
    const EstimateReport report =
        estimate(ds, dictionary_preset("sim1"), SmoothingConfig{}, opts);

    CHECK(report.all_solves_converged);
    CHECK(std::isfinite(report.theta_sig));
    CHECK(std::isfinite(report.theta_naive));
    CHECK(std::isfinite(report.se_formula));
    CHECK(report.se_formula > 0.0);
    CHECK(report.ci.lo < report.ci.hi);
    // The CATE is symmetric, so the positive share sits near one half.  At
    // finite s the sigmoid squashes negative plug-ins harder than positive
    // ones, so residual noise skews the share upward; the clean one-half
    // symmetry is recovered in the vanishing-smoothing limit below.
    CHECK(report.share_positive >= 0.45);
    CHECK(report.share_positive <= 0.70);
    {
        EstimatorOptions linear_opts = opts;
        linear_opts.auto_s = false;
        SmoothingConfig tiny;
        tiny.s = 1e-8;
        const EstimateReport half_ate =
            estimate(ds, dictionary_preset("sim1"), tiny, linear_opts);
        CHECK(std::abs(half_ate.share_positive - 0.5) <= 0.05);
    }
    // theta_mbdml = theta_sig + bias_bound exactly
    CHECK(report.theta_mbdml == report.theta_sig + report.bias_bound);
    // s* = c2 n^{1/6} with the known-truth constants
    REQUIRE(report.choice.has_value());
    CHECK(report.s_used ==
          doctest::Approx(report.choice->c2 * std::pow(2000.0, 1.0 / 6.0)).epsilon(1e-12));

    // cross-fitted CATE plug-ins track the logistic sd at this sample size
    const VectorXd& taus = report.tau_plugins;
    const double mean = taus.mean();
    const double sd = std::sqrt((taus.array() - mean).square().sum() / taus.size());
    CHECK(std::abs(sd - 1.8138) / 1.8138 < 0.15);
}

TEST_CASE("tall dictionaries still solve") {
    DgpConfig cfg;
    cfg.n = 60;
    cfg.seed = 5;
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.folds = 3;
    const FoldPlan plan = make_fold_plan(ds.n(), 3, 2);
    // p = 58 with ~20 observations per arm outside the fold
    CHECK_NOTHROW(fit_fold(ds, plan, 0, dictionary_preset("sim3"), fixed_smoothing(2.0), opts));
}

TEST_CASE("riesz moment matrices are symmetric PSD averages") {
    DgpConfig cfg;
    cfg.n = 300;
    cfg.seed = 6;
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.seed = 3;
    const CrossFitEngine engine(ds, dictionary_preset("sim1"), opts);
    const RieszMoments moments = engine.riesz_moments(0, SmoothingFamily::Sigmoid, 2.0);

    CHECK((moments.G1 - moments.G1.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eigs(moments.G1, Eigen::EigenvaluesOnly);
    CHECK(eigs.eigenvalues().minCoeff() > -1e-10);
    CHECK((moments.M2 + moments.M1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vanishing smoothing sends M1 to half the dictionary means") {
    DgpConfig cfg;
    cfg.n = 500;
    cfg.seed = 8;
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.seed = 11;
    const CrossFitEngine engine(ds, dictionary_preset("sim1"), opts);
    const RieszMoments moments = engine.riesz_moments(0, SmoothingFamily::Sigmoid, 1e-12);

    const std::vector<int> rows = engine.plan().complement_indices(0);
    VectorXd half_means = VectorXd::Zero(engine.raw().cols());
    for (int i : rows) {
        half_means += engine.fold_transform(0).apply_row(engine.raw().row(i).transpose());
    }
    half_means *= 0.5 / static_cast<double>(rows.size());
    CHECK((moments.M1 - half_means).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("one-cell dictionary reduces to inverse-propensity logic") {
    DgpConfig cfg;
    cfg.n = 400;
    cfg.seed = 9;
    const Dataset ds = draw_dataset(cfg);

    DictionarySpec intercept_only;
    intercept_only.include_intercept = true;

    EstimatorOptions opts;
    opts.seed = 2;
    opts.riesz_scale = 0.0;  // unpenalized
    const CrossFitEngine engine(ds, intercept_only, opts);
    const double s = 2.0;
    const RieszMoments moments = engine.riesz_moments(0, SmoothingFamily::Sigmoid, s);
    const FoldFit fit = engine.fit_fold(0, SmoothingFamily::Sigmoid, s);

    const std::vector<int> rows = engine.plan().complement_indices(0);
    double treated_share = 0.0;
    for (int i : rows) treated_share += ds.d()[i];
    treated_share /= static_cast<double>(rows.size());

    CHECK(moments.G1(0, 0) == doctest::Approx(treated_share).epsilon(1e-12));
    CHECK(fit.rho1.coefficients[0] ==
          doctest::Approx(moments.M1[0] / treated_share).epsilon(1e-7));
}

TEST_CASE("score decomposition is exact") {
    DgpConfig cfg;
    cfg.n = 300;
    cfg.seed = 10;
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.seed = 5;
    opts.moments_override = dgp_truth_moments();
    const EstimateReport report =
        estimate(ds, dictionary_preset("sim1"), SmoothingConfig{}, opts);

    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        CHECK(report.scores.psi[i] == report.scores.plugin[i] + report.scores.correction[i]);
    }
    CHECK(report.share_positive ==
          static_cast<double>((report.scores.psi.array() > 0.0).count()) / ds.n());
}

TEST_CASE("plug-ins respect the pointwise smoothing sandwich") {
    DgpConfig cfg;
    cfg.n = 300;
    cfg.seed = 12;
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.seed = 4;
    opts.moments_override = dgp_truth_moments();
    const EstimateReport report =
        estimate(ds, dictionary_preset("sim1"), SmoothingConfig{}, opts);

    const double s = report.s_used;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double tau = report.tau_plugins[i];
        CHECK(m_sig(tau, s) <= m_indicator(tau));
        CHECK(m_indicator(tau) <= m_lse(tau, s));
        CHECK(report.scores.plugin[i] == m_sig(tau, s));
    }
}

TEST_CASE("cate plug-ins are reproducible and fold-stable") {
    DgpConfig cfg;
    cfg.n = 250;
    cfg.seed = 13;
    const Dataset ds = draw_dataset(cfg);

    EstimatorOptions opts;
    opts.seed = 21;
    const VectorXd a = cate_plugins(ds, dictionary_preset("sim1"), opts);
    const VectorXd b = cate_plugins(ds, dictionary_preset("sim1"), opts);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

    // permuting two rows of the same fold leaves every plug-in unchanged
    FoldPlan plan = make_fold_plan(ds.n(), 5, derive_seed(21, 1));
    int first = -1, second = -1;
    for (Eigen::Index i = 0; i < ds.n() && second < 0; ++i) {
        if (plan.assignments[static_cast<std::size_t>(i)] != 0) continue;
        (first < 0 ? first : second) = static_cast<int>(i);
    }
    REQUIRE(second > 0);

    VectorXd y = ds.y();
    VectorXi d = ds.d();
    MatrixXd z = ds.z();
    std::swap(y[first], y[second]);
    std::swap(d[first], d[second]);
    z.row(first).swap(z.row(second));
    const Dataset swapped(std::move(y), std::move(d), std::move(z));

    const CrossFitEngine base(ds, dictionary_preset("sim1"), opts, plan);
    const CrossFitEngine permuted(swapped, dictionary_preset("sim1"), opts, plan);
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        Eigen::Index source = i;
        if (i == first) source = second;
        if (i == second) source = first;
        CHECK(permuted.tau_plugins()[source] ==
              doctest::Approx(base.tau_plugins()[i]).epsilon(1e-9));
    }
}

TEST_CASE("correction term is centered near zero on the simulated process") {
    // orthogonality signature across independent replications
    const int reps = 20;
    VectorXd correction_means(reps);
    for (int rep = 0; rep < reps; ++rep) {
        DgpConfig cfg;
        cfg.n = 1000;
        cfg.seed = derive_seed(888, static_cast<std::uint64_t>(rep));
        const Dataset ds = draw_dataset(cfg);
        EstimatorOptions opts;
        opts.seed = derive_seed(999, static_cast<std::uint64_t>(rep));
        opts.moments_override = dgp_truth_moments();
        const EstimateReport report =
            estimate(ds, dictionary_preset("sim1"), SmoothingConfig{}, opts);
        correction_means[rep] = report.scores.correction.mean();
    }
    const double mean = correction_means.mean();
    const double sd =
        std::sqrt((correction_means.array() - mean).square().sum() / (reps - 1.0));
    CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("zero-effect process: truth covered by the bias-aware interval") {
    const int reps = 50;
    int covered = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const Dataset ds = null_effect_dataset(600, derive_seed(31, static_cast<std::uint64_t>(rep)));
        EstimatorOptions opts;
        opts.seed = derive_seed(32, static_cast<std::uint64_t>(rep));
        const EstimateReport report = estimate(ds, linear_spec(3), SmoothingConfig{}, opts);
        covered += (report.ci.lo <= 0.0 && 0.0 <= report.ci.hi);
    }
    CHECK(static_cast<double>(covered) / reps >= 0.9);
}

TEST_CASE("degenerate folds raise data errors") {
    // all controls concentrated in fold 0: no control arm outside it... build
    // a plan by hand to force the situation
    Rng rng(55);
    const Eigen::Index n = 12;
    VectorXd y(n);
    VectorXi d(n);
    MatrixXd z(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = rng.normal();
        z(i, 0) = rng.normal();
        z(i, 1) = rng.normal();
        d[i] = i < 4 ? 0 : 1;  // controls are exactly rows 0..3
    }
    const Dataset ds(std::move(y), std::move(d), std::move(z));
    FoldPlan plan;
    plan.fold_count = 3;
    plan.seed = 0;
    plan.assignments = {0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};

    EstimatorOptions opts;
    opts.folds = 3;
    CHECK_THROWS_AS(fit_fold(ds, plan, 0, linear_spec(2), fixed_smoothing(1.0), opts),
                    data_error);
}

TEST_CASE("fewer than three folds cannot build riesz moments") {
    const Dataset ds = null_effect_dataset(40, 3);
    EstimatorOptions opts;
    opts.folds = 2;
    const FoldPlan plan = make_fold_plan(ds.n(), 2, 1);
    CHECK_THROWS_AS(
        build_riesz_moments(ds, plan, 0, linear_spec(3), fixed_smoothing(1.0), opts),
        config_error);
}
