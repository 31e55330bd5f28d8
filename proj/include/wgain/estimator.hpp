#pragma once

#include "wgain/bias.hpp"
#include "wgain/features.hpp"
#include "wgain/lasso.hpp"
#include "wgain/tuning.hpp"
#include "wgain/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace wgain {

// Everything fitted on the data outside one fold: outcome regressions per
// arm, Riesz coefficients per arm, and the frozen standardization of the
// fitting subsample.
struct FoldFit {
    LassoFit gamma1;  // treated-arm outcome regression on b(z)
    LassoFit gamma2;  // control-arm outcome regression on b(z)
    LassoFit rho1;    // treated-arm Riesz coefficients
    LassoFit rho2;    // control-arm Riesz coefficients
    Standardizer transform;

    bool all_converged() const {
        return gamma1.converged && gamma2.converged && rho1.converged && rho2.converged;
    }
};

// Riesz program inputs for one fold: second-moment matrices restricted to
// each arm and derivative-direction averages over the held-out pairs.
struct RieszMoments {
    MatrixXd G1;
    MatrixXd G2;
    VectorXd M1;
    VectorXd M2;
};

// Debiased scores and their exact decomposition psi = plugin + correction.
struct ScoreSet {
    VectorXd psi;
    VectorXd plugin;
    VectorXd correction;
};

struct EstimatorOptions {
    int folds = 5;
    std::uint64_t seed = 0;
    double level = 0.95;
    double lambda_scale = 1.0;  // multiplies sqrt(ln(p+1)/n)
    double riesz_scale = 1.0;   // multiplies n^{-1/4}
    bool auto_s = true;         // pick s* from the tuned rate, else use smoothing.s
    bool auto_c4 = true;        // c4 = p_tau from the moments, else smoothing.c4
    std::optional<CateMoments> moments_override;  // known-truth moments (simulation)
    SolverOptions solver;
};

struct EstimateReport {
    double theta_sig = 0.0;
    double theta_naive = 0.0;
    double theta_mbdml = 0.0;
    double se_formula = 0.0;
    double se_empirical = 0.0;
    double bias_bound = 0.0;
    std::optional<double> bias_bound_lower;  // present when c6, c8 were supplied
    BiasAwareCI ci;
    double share_positive = 0.0;
    double s_used = 0.0;
    SmoothingConfig smoothing;  // with the resolved s and c4
    CateMoments moments;
    int fold_count = 0;
    std::uint64_t seed = 0;

    // Diagnostics.
    double lambda = 0.0;
    double riesz_penalty = 0.0;
    double max_abs_riesz_weight = 0.0;
    bool all_solves_converged = true;
    std::optional<SmoothingChoice> choice;  // present when s was auto-tuned
    ScoreSet scores;
    VectorXd tau_plugins;
};

// Shared cross-fitting state: the raw dictionary, per-fold and per-fold-pair
// outcome regressions, and the cross-fitted CATE plug-ins.  Fold and pair
// jobs are independent; reductions always run in ascending index order.
class CrossFitEngine {
public:
    CrossFitEngine(const Dataset& ds, const DictionarySpec& spec, const EstimatorOptions& opts);
    CrossFitEngine(const Dataset& ds, const DictionarySpec& spec, const EstimatorOptions& opts,
                   FoldPlan plan);

    const FoldPlan& plan() const { return plan_; }
    const MatrixXd& raw() const { return raw_; }
    double lambda() const { return lambda_; }
    double riesz_penalty() const { return riesz_penalty_; }
    const Standardizer& fold_transform(int ell) const { return fold_transforms_[ell]; }
    const LassoFit& fold_gamma(int ell, int arm) const;

    // tau_hat(z_i) = gamma1 - gamma2 under observation i's own held-out fold fit.
    const VectorXd& tau_plugins() const { return tau_plugins_; }

    RieszMoments riesz_moments(int ell, SmoothingFamily family, double s) const;
    FoldFit fit_fold(int ell, SmoothingFamily family, double s) const;

    ScoreSet score(const std::vector<FoldFit>& fits, SmoothingFamily family, double s,
                   double* max_abs_weight = nullptr) const;

private:
    void fit_all();
    struct PairFit {
        Standardizer transform;
        VectorXd gamma1;
        VectorXd gamma2;
    };
    const PairFit& pair_fit(int a, int b) const;

    const Dataset& ds_;
    DictionarySpec spec_;
    EstimatorOptions opts_;
    FoldPlan plan_;
    MatrixXd raw_;
    double lambda_ = 0.0;
    double riesz_penalty_ = 0.0;
    std::vector<Standardizer> fold_transforms_;
    std::vector<LassoFit> fold_gamma1_, fold_gamma2_;
    std::map<std::pair<int, int>, PairFit> pairs_;
    VectorXd tau_plugins_;
};

// Spec-level operations.
FoldFit fit_fold(const Dataset& ds, const FoldPlan& plan, int ell, const DictionarySpec& spec,
                 const SmoothingConfig& smoothing, const EstimatorOptions& opts);

RieszMoments build_riesz_moments(const Dataset& ds, const FoldPlan& plan, int ell,
                                 const DictionarySpec& spec, const SmoothingConfig& smoothing,
                                 const EstimatorOptions& opts);

VectorXd cate_plugins(const Dataset& ds, const DictionarySpec& spec, const EstimatorOptions& opts);

// Full pipeline: nuisance fits, smoothing-parameter resolution, Riesz
// corrections, naive and maximum-bias comparators, and the bias-aware CI.
EstimateReport estimate(const Dataset& ds, const DictionarySpec& spec,
                        const SmoothingConfig& smoothing, const EstimatorOptions& opts);

// Full-sample plug-in of the unsmoothed moment with neither debiasing nor
// cross-fitting; the comparator the DML estimator is judged against.
double naive_estimate(const Dataset& ds, const DictionarySpec& spec, const EstimatorOptions& opts);

}  // namespace wgain
