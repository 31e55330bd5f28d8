#pragma once

#include "wgain/types.hpp"

#include <cmath>

namespace wgain {

enum class MomentSource { RuleOfThumb, KnownTruth };

// First/second moments of the CATE distribution plus the derived
// normal-reference quantities: density maximum p_tau and Var(tau^2).
struct CateMoments {
    double mu = 0.0;
    double sigma2 = 0.0;
    double p_tau = 0.0;
    double var_tau_sq = 0.0;
    MomentSource source = MomentSource::RuleOfThumb;
};

// Normal-reference moments from cross-fitted CATE estimates:
//   mu     = mean(tau_hat)
//   sigma2 = mean(tau_hat^2) - mu^2          (population convention)
//   p_tau  = 1 / sqrt(2 pi sigma2)
//   Var(tau^2) = 2 sigma2 (2 mu^2 + sigma2)
CateMoments estimate_cate_moments(const VectorXd& tau_hats);

CateMoments known_truth_moments(double mu, double sigma2, double p_tau, double var_tau_sq);

// Optimal smoothing constant and rate.  s* = c2 * n^{rate_exponent}.
struct SmoothingChoice {
    double c2 = 0.0;
    double rate_exponent = 0.0;
    bool margin_assumed = true;

    double s_star(Eigen::Index n) const { return c2 * std::pow(static_cast<double>(n), rate_exponent); }
};

// Under the margin assumption with exponent alpha4 (alpha4+1 even natural):
//   c2 = { (alpha4+1) [c4 pi^{a+1} (2^{a+1}-2) |B_{a+1}|]^2 / (Var(tau^2)/16) }^{1/(2(a+2))}
// and rate_exponent 1/(2(alpha4+2)).
SmoothingChoice c2_opt_margin(const CateMoments& moments, double alpha4, double c4);

// Without the margin assumption:
//   c2 = ( (2 log 2)^2 / (Var(tau^2)/16) )^{1/4},  rate exponent 1/4.
SmoothingChoice c2_opt_no_margin(const CateMoments& moments);

}  // namespace wgain
