#include "wgain/bias.hpp"

#include "wgain/quadrature.hpp"
#include "wgain/smoothing.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace wgain {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

namespace {

constexpr int kMaxBernoulli = 20;

const std::array<double, kMaxBernoulli + 1>& bernoulli_table() {
    static const std::array<double, kMaxBernoulli + 1> table = [] {
        std::array<double, kMaxBernoulli + 1> b{};
        b[0] = 1.0;
        for (int m = 1; m <= kMaxBernoulli; ++m) {
            // B_m = -1/(m+1) * sum_{k<m} C(m+1, k) B_k
            double sum = 0.0;
            double binom = 1.0;  // C(m+1, 0)
            for (int k = 0; k < m; ++k) {
                sum += binom * b[k];
                binom = binom * (m + 1 - k) / (k + 1);
            }
            b[m] = -sum / (m + 1.0);
        }
        return b;
    }();
    return table;
}

// pi^{a+1} (2^{a+1} - 2) |B_{a+1}| for even natural a+1.
double closed_kernel(double alpha4) {
    const double m_real = alpha4 + 1.0;
    const int m = static_cast<int>(std::lround(m_real));
    if (std::abs(m_real - m) > 1e-12 || m < 2 || m % 2 != 0) {
        throw std::invalid_argument(
            "bias_bound_closed: alpha4+1 must be an even natural number (use quadrature otherwise)");
    }
    return std::pow(M_PI, m) * (std::pow(2.0, m) - 2.0) * std::abs(bernoulli_number(m));
}

// 2 * int_{1/2}^{1} [ln(p/(1-p))]^{alpha4+1} dp, via u = ln(p/(1-p)):
// 2 * int_0^inf u^{alpha4+1} e^{-u} / (1+e^{-u})^2 du.
double quadrature_kernel(double alpha4) {
    const double power = alpha4 + 1.0;
    auto integrand = [power](double u) {
        const double e = std::exp(-u);
        const double denom = 1.0 + e;
        return std::pow(u, power) * e / (denom * denom);
    };
    return 2.0 * integrate(integrand, 0.0, 160.0, 1e-11).value;
}

BiasBound assemble(double c4, double alpha4, double s, double kernel, BiasBoundMethod method,
                   std::optional<double> c6, std::optional<double> c8) {
    if (!(c4 > 0.0)) throw std::invalid_argument("bias bound: c4 must be positive");
    if (!(s > 0.0)) throw std::invalid_argument("bias bound: s must be positive");
    BiasBound bound;
    bound.alpha4 = alpha4;
    bound.s = s;
    bound.method = method;
    const double scale = std::pow(1.0 / s, alpha4 + 1.0) * kernel;
    bound.upper = c4 * scale;
    if (c6 && c8) {
        if (!(*c6 > 0.0) || !(*c8 > 0.0)) {
            throw std::invalid_argument("bias bound: c6, c8 must be positive when supplied");
        }
        if (*c6 * *c8 > c4) {
            throw std::invalid_argument("bias bound: c6*c8 cannot exceed c4");
        }
        bound.lower = *c6 * *c8 * scale;
    }
    return bound;
}

}  // namespace

double bernoulli_number(int m) {
    if (m < 0 || m > kMaxBernoulli) {
        throw std::invalid_argument("bernoulli_number: only m in [0, 20] supported");
    }
    return bernoulli_table()[static_cast<std::size_t>(m)];
}

BiasBound bias_bound_closed(double c4, double alpha4, double s, std::optional<double> c6,
                            std::optional<double> c8) {
    return assemble(c4, alpha4, s, closed_kernel(alpha4), BiasBoundMethod::ClosedForm, c6, c8);
}

BiasBound bias_bound_quadrature(double c4, double alpha4, double s, std::optional<double> c6,
                                std::optional<double> c8) {
    if (alpha4 < 0.0) throw std::invalid_argument("bias_bound_quadrature: alpha4 must be >= 0");
    return assemble(c4, alpha4, s, quadrature_kernel(alpha4), BiasBoundMethod::Quadrature, c6, c8);
}

BiasBound bias_bound(double c4, double alpha4, double s, std::optional<double> c6,
                     std::optional<double> c8) {
    const double m_real = alpha4 + 1.0;
    const int m = static_cast<int>(std::lround(m_real));
    const bool closed_valid = std::abs(m_real - m) <= 1e-12 && m >= 2 && m % 2 == 0;
    return closed_valid ? bias_bound_closed(c4, alpha4, s, c6, c8)
                        : bias_bound_quadrature(c4, alpha4, s, c6, c8);
}

BiasBound bias_bound_no_margin(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("bias_bound_no_margin: s must be positive");
    BiasBound bound;
    bound.alpha4 = 0.0;
    bound.s = s;
    bound.method = BiasBoundMethod::ClosedForm;
    bound.upper = 2.0 * std::log(2.0) / s;
    return bound;
}

TauDensity TauDensity::logistic(double location, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("TauDensity: scale must be positive");
    return TauDensity{Kind::Logistic, location, scale};
}

TauDensity TauDensity::normal(double location, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("TauDensity: sd must be positive");
    return TauDensity{Kind::Normal, location, sd};
}

double TauDensity::pdf(double t) const {
    const double z = (t - location) / scale;
    switch (kind) {
        case Kind::Logistic: {
            const double e = std::exp(-std::abs(z));
            const double denom = 1.0 + e;
            return e / (scale * denom * denom);
        }
        case Kind::Normal:
            return normal_pdf(z) / scale;
    }
    return 0.0;
}

namespace {

// Integration window wide enough that both densities have negligible mass
// outside it.
std::pair<double, double> support_window(const TauDensity& density) {
    const double half_width = 60.0 * density.scale;
    return {density.location - half_width, density.location + half_width};
}

}  // namespace

double welfare_truth(const TauDensity& density, double abs_tol) {
    auto [lo, hi] = support_window(density);
    if (hi <= 0.0) return 0.0;
    lo = std::max(lo, 0.0);
    auto integrand = [&density](double t) { return t * density.pdf(t); };
    return integrate(integrand, lo, hi, abs_tol, {density.location}).value;
}

double bias_oracle_prop2(const TauDensity& density, double s, double abs_tol) {
    if (!(s > 0.0)) throw std::invalid_argument("bias_oracle_prop2: s must be positive");
    auto [lo, hi] = support_window(density);
    auto integrand = [&density, s](double t) {
        return (m_sig(t, s) - m_indicator(t)) * density.pdf(t);
    };
    // The integrand is nonpositive everywhere but concentrated in a 1/s-wide
    // window around zero; seed subdivisions there so it is not stepped over.
    const double w = 50.0 / s;
    const QuadratureResult res =
        integrate(integrand, lo, hi, abs_tol, {-w, 0.0, w, density.location});
    return res.value;
}

double folded_normal_cv(double bias_ratio, double level) {
    if (bias_ratio < 0.0) throw std::invalid_argument("folded_normal_cv: bias ratio must be >= 0");
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("folded_normal_cv: level must be in (0,1)");
    }
    auto coverage = [bias_ratio](double c) {
        return normal_cdf(c - bias_ratio) - normal_cdf(-c - bias_ratio);
    };
    double lo = 0.0;
    double hi = bias_ratio + normal_quantile(0.5 * (1.0 + level)) + 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (coverage(mid) < level ? lo : hi) = mid;
        if (hi - lo < 1e-10) break;
    }
    return 0.5 * (lo + hi);
}

BiasAwareCI build_ci(double theta_hat, double s, Eigen::Index n, const CateMoments& moments,
                     const BiasBound& bound, double level) {
    if (!std::isfinite(theta_hat)) throw numeric_error("build_ci: non-finite estimate");
    if (!(moments.var_tau_sq > 0.0)) throw numeric_error("build_ci: zero Var(tau^2)");
    if (!(s > 0.0) || n <= 0) throw std::invalid_argument("build_ci: require s > 0 and n > 0");

    BiasAwareCI ci;
    ci.center = theta_hat;
    ci.level = level;
    ci.bias_bound = bound.upper;
    ci.se = std::sqrt(s * s / static_cast<double>(n) * moments.var_tau_sq / 16.0);
    ci.critical_value = folded_normal_cv(bound.upper / ci.se, level);
    ci.lo = theta_hat - ci.critical_value * ci.se;
    ci.hi = theta_hat + ci.critical_value * ci.se;
    return ci;
}

}  // namespace wgain
