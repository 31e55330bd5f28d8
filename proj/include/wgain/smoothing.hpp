#pragma once

#include "wgain/types.hpp"

#include <cmath>

namespace wgain {

// Scalar smoothing kernels.  Templated on scalar so they can be dropped into
// Eigen array expressions via unaryExpr.  All of them are total functions:
// branches at |argument| = 40 switch to asymptotic forms so double precision
// never produces Inf/NaN.

template <class Scalar>
Scalar sigmoid(Scalar x) {
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}

// Sigmoid-smoothed positive part: t * sigmoid(s*t).
template <class Scalar>
Scalar m_sig(Scalar t, Scalar s) {
    const Scalar h = s * t;
    if (h >= Scalar(40)) return t;
    if (h <= Scalar(-40)) return t * std::exp(h);
    return t * sigmoid(h);
}

// Log-sum-exp smoothed positive part: log(1 + exp(h*t)) / h.
// Upper counterpart of m_sig: m_sig(t,h) <= max(t,0) <= m_lse(t,h) pointwise.
// For t > 0 the value is computed as t plus a nonnegative remainder so the
// sandwich holds exactly in floating point as well.
template <class Scalar>
Scalar m_lse(Scalar t, Scalar h) {
    const Scalar x = h * t;
    if (x >= Scalar(0)) return t + std::log1p(std::exp(-x)) / h;
    return std::log1p(std::exp(x)) / h;
}

// Unsmoothed positive part, open inequality at zero.
template <class Scalar>
Scalar m_indicator(Scalar t) {
    return t > Scalar(0) ? t : Scalar(0);
}

// Treated-arm weight function of the sigmoid moment, as a function of h = s*t:
//   [1 + (1+h) e^{-h}] / (1 + e^{-h})^2.
// Equals d m_sig(t, s) / dt evaluated at h = s*t.  The control-arm weight is
// its negative.  |d/dh| <= 1/2 everywhere.
template <class Scalar>
Scalar riesz_weight_h(Scalar h) {
    if (h >= Scalar(745)) return Scalar(1);  // (h-1)e^{-h} underflows
    if (h <= Scalar(-745)) return Scalar(0);
    if (h >= Scalar(40)) return Scalar(1) + (h - Scalar(1)) * std::exp(-h);
    if (h <= Scalar(-40)) return (Scalar(1) + h) * std::exp(h);
    const Scalar em = std::exp(-h);
    const Scalar denom = Scalar(1) + em;
    return (Scalar(1) + (Scalar(1) + h) * em) / (denom * denom);
}

template <class Scalar>
Scalar riesz_weight(Scalar t, Scalar s) {
    return riesz_weight_h(s * t);
}

// m_sig(t, s) - t/2: vanishes as s -> 0, where the estimand collapses to
// half of the average treatment effect.
template <class Scalar>
Scalar half_ate_limit_check(Scalar t, Scalar s) {
    return m_sig(t, s) - t / Scalar(2);
}

// Moment value and analytic arm weights at one CATE value, dispatched on the
// smoothing family.  weight_control == -weight_treated by construction.
struct MomentEval {
    double value = 0.0;
    double weight_treated = 0.0;
    double weight_control = 0.0;
};

inline MomentEval evaluate_moment(SmoothingFamily family, double t, double s) {
    MomentEval out;
    switch (family) {
        case SmoothingFamily::Sigmoid:
            out.value = m_sig(t, s);
            out.weight_treated = riesz_weight(t, s);
            break;
        case SmoothingFamily::Lse:
            out.value = m_lse(t, s);
            out.weight_treated = sigmoid(s * t);
            break;
        case SmoothingFamily::Indicator:
            // Almost-everywhere derivative of the unsmoothed moment.
            out.value = m_indicator(t);
            out.weight_treated = t > 0.0 ? 1.0 : 0.0;
            break;
    }
    out.weight_control = -out.weight_treated;
    return out;
}

}  // namespace wgain
