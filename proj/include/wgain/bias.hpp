#pragma once

#include "wgain/tuning.hpp"
#include "wgain/types.hpp"

#include <optional>

namespace wgain {

double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

// Bernoulli numbers B_0 .. B_20 (B_1 = -1/2 convention) via the recurrence
// sum_{k=0}^{m} C(m+1,k) B_k = 0.
double bernoulli_number(int m);

enum class BiasBoundMethod { ClosedForm, Quadrature };

// Worst-case magnitude of the smoothing bias.  `upper` scales as
// s^{-(alpha4+1)}; `lower` is populated only when both lower margin
// constants are supplied.
struct BiasBound {
    double upper = 0.0;
    std::optional<double> lower;
    double alpha4 = 1.0;
    double s = 1.0;
    BiasBoundMethod method = BiasBoundMethod::ClosedForm;
};

// Closed-form bound c4 * s^{-(a+1)} * pi^{a+1} (2^{a+1}-2) |B_{a+1}| with
// a = alpha4.  Valid only when alpha4+1 is an even natural number; for odd
// alpha4+1 the Bernoulli factor vanishes and the closed form degenerates,
// so callers must use bias_bound_quadrature instead.
BiasBound bias_bound_closed(double c4, double alpha4, double s,
                            std::optional<double> c6 = std::nullopt,
                            std::optional<double> c8 = std::nullopt);

// Same bound with the kernel 2*int_{1/2}^{1} [ln(p/(1-p))]^{alpha4+1} dp
// evaluated by adaptive quadrature.  Works for any real alpha4 >= 0;
// alpha4 = 0 reproduces the no-margin kernel 2 log 2.
BiasBound bias_bound_quadrature(double c4, double alpha4, double s,
                                std::optional<double> c6 = std::nullopt,
                                std::optional<double> c8 = std::nullopt);

// Dispatches to the closed form when it is valid, quadrature otherwise.
BiasBound bias_bound(double c4, double alpha4, double s,
                     std::optional<double> c6 = std::nullopt,
                     std::optional<double> c8 = std::nullopt);

// Bound used when no margin assumption is imposed: 2 log 2 / s.
BiasBound bias_bound_no_margin(double s);

// Analytic CATE densities accepted by the bias oracle.
struct TauDensity {
    enum class Kind { Logistic, Normal };
    Kind kind = Kind::Logistic;
    double location = 0.0;
    double scale = 1.0;

    static TauDensity logistic(double location, double scale);
    static TauDensity normal(double location, double sd);

    double pdf(double t) const;
};

// E[tau 1{tau > 0}] for the given density, by adaptive quadrature.
double welfare_truth(const TauDensity& density, double abs_tol = 1e-9);

// Smoothing bias E[m_sig(tau, s)] - E[max(tau, 0)], computed as a single
// integral of the pointwise-nonpositive difference so the sign is preserved
// even when the magnitude is far below the quadrature tolerance.
double bias_oracle_prop2(const TauDensity& density, double s, double abs_tol = 1e-9);

// 1-alpha quantile of |N(A, 1)|: the c solving cdf(c-A) - cdf(-c-A) = level,
// by bisection to 1e-10.  Always at least the two-sided normal quantile.
double folded_normal_cv(double bias_ratio, double level);

struct BiasAwareCI {
    double center = 0.0;
    double se = 0.0;
    double bias_bound = 0.0;
    double critical_value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
};

// Interval center +/- cv(bias/se) * se with se = sqrt((s^2/n) Var(tau^2)/16).
BiasAwareCI build_ci(double theta_hat, double s, Eigen::Index n, const CateMoments& moments,
                     const BiasBound& bound, double level);

}  // namespace wgain
