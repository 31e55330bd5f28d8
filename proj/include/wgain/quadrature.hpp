#pragma once

#include <functional>
#include <vector>

namespace wgain {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
};

// Adaptive quadrature with an embedded Gauss 7/15 pair and interval
// bisection.  Nodes and weights are computed once at startup by Newton
// iteration on the Legendre polynomials, to machine precision.
//
// `breakpoints` forces initial subdivisions; use it when the integrand has
// narrow features the first panels would otherwise step over.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           double abs_tol = 1e-9, const std::vector<double>& breakpoints = {});

}  // namespace wgain
