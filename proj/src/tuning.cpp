#include "wgain/tuning.hpp"

#include "wgain/bias.hpp"

#include <cmath>
#include <stdexcept>

namespace wgain {

CateMoments estimate_cate_moments(const VectorXd& tau_hats) {
    const Eigen::Index n = tau_hats.size();
    if (n < 2) throw std::invalid_argument("estimate_cate_moments: need at least 2 estimates");
    if (!tau_hats.allFinite()) throw data_error("estimate_cate_moments: non-finite CATE estimate");

    CateMoments m;
    m.source = MomentSource::RuleOfThumb;
    m.mu = tau_hats.mean();
    m.sigma2 = tau_hats.squaredNorm() / static_cast<double>(n) - m.mu * m.mu;
    if (!(m.sigma2 > 0.0)) {
        throw numeric_error("estimate_cate_moments: degenerate (zero-variance) CATE estimates");
    }
    m.p_tau = 1.0 / std::sqrt(2.0 * M_PI * m.sigma2);
    m.var_tau_sq = 2.0 * m.sigma2 * (2.0 * m.mu * m.mu + m.sigma2);
    return m;
}

CateMoments known_truth_moments(double mu, double sigma2, double p_tau, double var_tau_sq) {
    if (!(sigma2 > 0.0) || !(p_tau > 0.0) || !(var_tau_sq > 0.0)) {
        throw std::invalid_argument("known_truth_moments: positive sigma2, p_tau, var_tau_sq required");
    }
    return CateMoments{mu, sigma2, p_tau, var_tau_sq, MomentSource::KnownTruth};
}

SmoothingChoice c2_opt_margin(const CateMoments& moments, double alpha4, double c4) {
    if (!(c4 > 0.0)) throw std::invalid_argument("c2_opt_margin: c4 must be positive");
    if (!(moments.var_tau_sq > 0.0)) throw numeric_error("c2_opt_margin: degenerate Var(tau^2)");

    // The closed-form kernel needs alpha4+1 even so the Bernoulli factor is
    // nonzero; bias_bound_closed performs that check.
    const double kernel = bias_bound_closed(1.0, alpha4, 1.0).upper;
    const double c5 = c4 * kernel;
    const double c7 = moments.var_tau_sq / 16.0;

    SmoothingChoice choice;
    choice.margin_assumed = true;
    choice.rate_exponent = 1.0 / (2.0 * (alpha4 + 2.0));
    choice.c2 = std::pow((alpha4 + 1.0) * c5 * c5 / c7, choice.rate_exponent);
    return choice;
}

SmoothingChoice c2_opt_no_margin(const CateMoments& moments) {
    if (!(moments.var_tau_sq > 0.0)) throw numeric_error("c2_opt_no_margin: degenerate Var(tau^2)");
    const double two_log2 = 2.0 * std::log(2.0);
    SmoothingChoice choice;
    choice.margin_assumed = false;
    choice.rate_exponent = 0.25;
    choice.c2 = std::pow(two_log2 * two_log2 / (moments.var_tau_sq / 16.0), 0.25);
    return choice;
}

}  // namespace wgain
