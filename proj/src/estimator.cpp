#include "wgain/estimator.hpp"

#include "wgain/data_model.hpp"
#include "wgain/rng.hpp"
#include "wgain/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace wgain {
namespace {

constexpr std::uint64_t kFoldSalt = 1;
constexpr std::uint64_t kNoiseSalt = 2;

std::vector<int> arm_rows(const Dataset& ds, const std::vector<int>& rows, int arm) {
    std::vector<int> out;
    for (int i : rows) {
        if (ds.d()[i] == arm) out.push_back(i);
    }
    return out;
}

MatrixXd gather_rows(const MatrixXd& source, const std::vector<int>& rows) {
    MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = source.row(rows[k]);
    return out;
}

VectorXd gather(const VectorXd& source, const std::vector<int>& rows) {
    VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = source[rows[k]];
    return out;
}

// Outcome regression for one arm on the given rows, with the transform
// already applied to the features.
LassoFit fit_arm(const Dataset& ds, const MatrixXd& raw, const Standardizer& transform,
                 const std::vector<int>& rows, int arm, double lambda, int intercept_column,
                 const SolverOptions& solver) {
    const std::vector<int> selected = arm_rows(ds, rows, arm);
    if (selected.empty()) {
        throw data_error("fit_fold: treatment arm " + std::to_string(arm) +
                         " is empty on the fitting subsample");
    }
    const MatrixXd X = transform.apply(gather_rows(raw, selected));
    const VectorXd y = gather(ds.y(), selected);
    SolverOptions opts = solver;
    opts.unpenalized_index = intercept_column;
    return lasso_regression(X, y, lambda, opts);
}

}  // namespace

CrossFitEngine::CrossFitEngine(const Dataset& ds, const DictionarySpec& spec,
                               const EstimatorOptions& opts)
    : CrossFitEngine(ds, spec, opts,
                     make_fold_plan(ds.n(), opts.folds, derive_seed(opts.seed, kFoldSalt))) {}

CrossFitEngine::CrossFitEngine(const Dataset& ds, const DictionarySpec& spec,
                               const EstimatorOptions& opts, FoldPlan plan)
    : ds_(ds), spec_(spec), opts_(opts), plan_(std::move(plan)) {
    validate_dataset(ds_);
    raw_ = raw_features(ds_, spec_, derive_seed(opts_.seed, kNoiseSalt));
    const double n = static_cast<double>(ds_.n());
    const double p = static_cast<double>(spec_.dimension());
    lambda_ = opts_.lambda_scale * std::sqrt(std::log(p + 1.0) / n);
    riesz_penalty_ = opts_.riesz_scale * std::pow(n, -0.25);
    fit_all();
}

void CrossFitEngine::fit_all() {
    const int L = plan_.fold_count;
    const int intercept = spec_.include_intercept ? 0 : -1;
    fold_transforms_.resize(static_cast<std::size_t>(L));
    fold_gamma1_.resize(static_cast<std::size_t>(L));
    fold_gamma2_.resize(static_cast<std::size_t>(L));

    for (int ell = 0; ell < L; ++ell) {
        const std::vector<int> rows = plan_.complement_indices(ell);
        Standardizer transform = spec_.standardize ? fit_standardizer(raw_, rows, intercept)
                                                   : Standardizer::identity(raw_.cols());
        fold_gamma1_[ell] = fit_arm(ds_, raw_, transform, rows, 1, lambda_, intercept, opts_.solver);
        fold_gamma2_[ell] = fit_arm(ds_, raw_, transform, rows, 0, lambda_, intercept, opts_.solver);
        fold_transforms_[ell] = std::move(transform);
    }

    // Double hold-out fits exist only with three or more folds;
    // riesz_moments reports the configuration error in that case.
    for (int a = 0; a < L && L >= 3; ++a) {
        for (int b = a + 1; b < L; ++b) {
            const std::vector<int> rows = plan_.pair_complement_indices(a, b);
            PairFit pair;
            pair.transform = spec_.standardize ? fit_standardizer(raw_, rows, intercept)
                                               : Standardizer::identity(raw_.cols());
            pair.gamma1 =
                fit_arm(ds_, raw_, pair.transform, rows, 1, lambda_, intercept, opts_.solver)
                    .coefficients;
            pair.gamma2 =
                fit_arm(ds_, raw_, pair.transform, rows, 0, lambda_, intercept, opts_.solver)
                    .coefficients;
            pairs_.emplace(std::make_pair(a, b), std::move(pair));
        }
    }

    tau_plugins_.resize(ds_.n());
    for (Eigen::Index i = 0; i < ds_.n(); ++i) {
        const int ell = plan_.assignments[static_cast<std::size_t>(i)];
        const VectorXd b = fold_transforms_[ell].apply_row(raw_.row(i).transpose());
        tau_plugins_[i] =
            b.dot(fold_gamma1_[ell].coefficients) - b.dot(fold_gamma2_[ell].coefficients);
    }
}

const LassoFit& CrossFitEngine::fold_gamma(int ell, int arm) const {
    return arm == 1 ? fold_gamma1_[static_cast<std::size_t>(ell)]
                    : fold_gamma2_[static_cast<std::size_t>(ell)];
}

const CrossFitEngine::PairFit& CrossFitEngine::pair_fit(int a, int b) const {
    return pairs_.at(std::make_pair(std::min(a, b), std::max(a, b)));
}

RieszMoments CrossFitEngine::riesz_moments(int ell, SmoothingFamily family, double s) const {
    if (plan_.fold_count < 3) {
        throw config_error("build_riesz_moments: need at least 3 folds for double hold-out fits");
    }
    const Eigen::Index p = raw_.cols();
    const std::vector<int> rows = plan_.complement_indices(ell);
    const double denom = static_cast<double>(rows.size());
    const Standardizer& transform = fold_transforms_[static_cast<std::size_t>(ell)];

    RieszMoments out;
    out.G1 = MatrixXd::Zero(p, p);
    out.G2 = MatrixXd::Zero(p, p);
    out.M1 = VectorXd::Zero(p);

    for (int i : rows) {
        const VectorXd b = transform.apply_row(raw_.row(i).transpose());
        MatrixXd& G = ds_.d()[i] == 1 ? out.G1 : out.G2;
        G.selfadjointView<Eigen::Lower>().rankUpdate(b, 1.0 / denom);
    }
    out.G1 = out.G1.selfadjointView<Eigen::Lower>();
    out.G2 = out.G2.selfadjointView<Eigen::Lower>();

    // Derivative directions are averaged over every fold other than ell,
    // scoring each observation with the fit that held out both its own fold
    // and ell.
    for (int other = 0; other < plan_.fold_count; ++other) {
        if (other == ell) continue;
        const PairFit& pair = pair_fit(ell, other);
        for (int i : plan_.fold_indices(other)) {
            const VectorXd b_pair = pair.transform.apply_row(raw_.row(i).transpose());
            const double tau = b_pair.dot(pair.gamma1) - b_pair.dot(pair.gamma2);
            const MomentEval eval = evaluate_moment(family, tau, s);
            const VectorXd b = transform.apply_row(raw_.row(i).transpose());
            out.M1 += b * (eval.weight_treated / denom);
        }
    }
    out.M2 = -out.M1;
    return out;
}

FoldFit CrossFitEngine::fit_fold(int ell, SmoothingFamily family, double s) const {
    FoldFit fit;
    fit.transform = fold_transforms_[static_cast<std::size_t>(ell)];
    fit.gamma1 = fold_gamma1_[static_cast<std::size_t>(ell)];
    fit.gamma2 = fold_gamma2_[static_cast<std::size_t>(ell)];
    const RieszMoments moments = riesz_moments(ell, family, s);
    fit.rho1 = riesz_lasso(moments.G1, moments.M1, riesz_penalty_, opts_.solver);
    fit.rho2 = riesz_lasso(moments.G2, moments.M2, riesz_penalty_, opts_.solver);
    return fit;
}

ScoreSet CrossFitEngine::score(const std::vector<FoldFit>& fits, SmoothingFamily family, double s,
                               double* max_abs_weight) const {
    const Eigen::Index n = ds_.n();
    ScoreSet scores;
    scores.psi.resize(n);
    scores.plugin.resize(n);
    scores.correction.resize(n);
    double worst_weight = 0.0;

    for (Eigen::Index i = 0; i < n; ++i) {
        const int ell = plan_.assignments[static_cast<std::size_t>(i)];
        const FoldFit& fit = fits[static_cast<std::size_t>(ell)];
        const VectorXd b = fit.transform.apply_row(raw_.row(i).transpose());
        const double tau = b.dot(fit.gamma1.coefficients) - b.dot(fit.gamma2.coefficients);
        const MomentEval eval = evaluate_moment(family, tau, s);

        const bool treated = ds_.d()[i] == 1;
        const double alpha = treated ? b.dot(fit.rho1.coefficients) : b.dot(fit.rho2.coefficients);
        const double fitted = treated ? b.dot(fit.gamma1.coefficients) : b.dot(fit.gamma2.coefficients);

        scores.plugin[i] = eval.value;
        scores.correction[i] = alpha * (ds_.y()[i] - fitted);
        scores.psi[i] = scores.plugin[i] + scores.correction[i];
        worst_weight = std::max(worst_weight, std::abs(alpha));
    }
    if (max_abs_weight != nullptr) *max_abs_weight = worst_weight;
    return scores;
}

FoldFit fit_fold(const Dataset& ds, const FoldPlan& plan, int ell, const DictionarySpec& spec,
                 const SmoothingConfig& smoothing, const EstimatorOptions& opts) {
    CrossFitEngine engine(ds, spec, opts, plan);
    return engine.fit_fold(ell, smoothing.family, smoothing.s);
}

RieszMoments build_riesz_moments(const Dataset& ds, const FoldPlan& plan, int ell,
                                 const DictionarySpec& spec, const SmoothingConfig& smoothing,
                                 const EstimatorOptions& opts) {
    CrossFitEngine engine(ds, spec, opts, plan);
    return engine.riesz_moments(ell, smoothing.family, smoothing.s);
}

VectorXd cate_plugins(const Dataset& ds, const DictionarySpec& spec, const EstimatorOptions& opts) {
    CrossFitEngine engine(ds, spec, opts);
    return engine.tau_plugins();
}

double naive_estimate(const Dataset& ds, const DictionarySpec& spec, const EstimatorOptions& opts) {
    validate_dataset(ds);
    const MatrixXd raw = raw_features(ds, spec, derive_seed(opts.seed, kNoiseSalt));
    const int intercept = spec.include_intercept ? 0 : -1;
    std::vector<int> all(static_cast<std::size_t>(ds.n()));
    for (Eigen::Index i = 0; i < ds.n(); ++i) all[static_cast<std::size_t>(i)] = static_cast<int>(i);

    const Standardizer transform =
        spec.standardize ? fit_standardizer(raw, all, intercept) : Standardizer::identity(raw.cols());
    const double n = static_cast<double>(ds.n());
    const double lambda =
        opts.lambda_scale * std::sqrt(std::log(static_cast<double>(spec.dimension()) + 1.0) / n);

    const LassoFit gamma1 = fit_arm(ds, raw, transform, all, 1, lambda, intercept, opts.solver);
    const LassoFit gamma2 = fit_arm(ds, raw, transform, all, 0, lambda, intercept, opts.solver);

    double total = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const VectorXd b = transform.apply_row(raw.row(i).transpose());
        const double tau = b.dot(gamma1.coefficients) - b.dot(gamma2.coefficients);
        total += m_indicator(tau);
    }
    return total / n;
}

EstimateReport estimate(const Dataset& ds, const DictionarySpec& spec,
                        const SmoothingConfig& smoothing, const EstimatorOptions& opts) {
    CrossFitEngine engine(ds, spec, opts);
    const Eigen::Index n = ds.n();

    EstimateReport report;
    report.fold_count = opts.folds;
    report.seed = opts.seed;
    report.lambda = engine.lambda();
    report.riesz_penalty = engine.riesz_penalty();
    report.tau_plugins = engine.tau_plugins();

    report.moments = opts.moments_override ? *opts.moments_override
                                           : estimate_cate_moments(engine.tau_plugins());

    SmoothingConfig resolved = smoothing;
    if (opts.auto_c4) resolved.c4 = report.moments.p_tau;
    if (opts.auto_s && resolved.family != SmoothingFamily::Indicator) {
        const SmoothingChoice choice = resolved.margin_assumed
                                           ? c2_opt_margin(report.moments, resolved.alpha4, resolved.c4)
                                           : c2_opt_no_margin(report.moments);
        resolved.s = choice.s_star(n);
        report.choice = choice;
    }
    resolved.validate();
    report.smoothing = resolved;
    report.s_used = resolved.s;

    std::vector<FoldFit> fits;
    fits.reserve(static_cast<std::size_t>(opts.folds));
    bool all_converged = true;
    for (int ell = 0; ell < opts.folds; ++ell) {
        fits.push_back(engine.fit_fold(ell, resolved.family, resolved.s));
        all_converged = all_converged && fits.back().all_converged();
    }
    report.all_solves_converged = all_converged;

    report.scores = engine.score(fits, resolved.family, resolved.s, &report.max_abs_riesz_weight);
    report.theta_sig = report.scores.psi.mean();
    report.share_positive =
        static_cast<double>((report.scores.psi.array() > 0.0).count()) / static_cast<double>(n);

    const double psi_mean = report.theta_sig;
    const double psi_var =
        (report.scores.psi.array() - psi_mean).square().sum() / static_cast<double>(n);
    report.se_empirical = std::sqrt(psi_var / static_cast<double>(n));

    if (resolved.family == SmoothingFamily::Indicator) {
        // No smoothing, hence no smoothing bias and no s-driven variance
        // formula; fall back to a Wald interval on the empirical scores.
        report.bias_bound = 0.0;
        report.se_formula = report.se_empirical;
    } else {
        const BiasBound bound =
            resolved.margin_assumed
                ? bias_bound(resolved.c4, resolved.alpha4, resolved.s, resolved.c6, resolved.c8)
                : bias_bound_no_margin(resolved.s);
        report.bias_bound = bound.upper;
        report.bias_bound_lower = bound.lower;
        report.se_formula =
            std::sqrt(resolved.s * resolved.s / static_cast<double>(n) * report.moments.var_tau_sq / 16.0);
    }

    // The s^2-scaled variance formula degenerates when the CATE distribution
    // is (near) degenerate, while the empirical score variance stays honest;
    // the interval uses whichever is larger.
    report.ci.center = report.theta_sig;
    report.ci.se = std::max(report.se_formula, report.se_empirical);
    report.ci.bias_bound = report.bias_bound;
    report.ci.level = opts.level;
    report.ci.critical_value =
        folded_normal_cv(report.ci.se > 0.0 ? report.bias_bound / report.ci.se : 0.0, opts.level);
    report.ci.lo = report.theta_sig - report.ci.critical_value * report.ci.se;
    report.ci.hi = report.theta_sig + report.ci.critical_value * report.ci.se;

    report.theta_mbdml = report.theta_sig + report.bias_bound;
    report.theta_naive = naive_estimate(ds, spec, opts);
    return report;
}

}  // namespace wgain
