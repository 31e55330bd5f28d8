#include "wgain/quadrature.hpp"

#include "wgain/types.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace wgain {
namespace {

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Gauss-Legendre nodes as roots of P_k, found by Newton from the Chebyshev
// initial guess; weights via w = 2 / ((1 - x^2) P_k'(x)^2).
GaussRule gauss_rule(int k) {
    GaussRule rule;
    rule.nodes.resize(k);
    rule.weights.resize(k);
    for (int i = 0; i < k; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= k; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = k * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

const GaussRule& rule7() {
    static const GaussRule r = gauss_rule(7);
    return r;
}

const GaussRule& rule15() {
    static const GaussRule r = gauss_rule(15);
    return r;
}

double apply(const GaussRule& rule, const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

struct Worker {
    const std::function<double(double)>& f;
    int subdivisions = 0;
    double error = 0.0;
    int max_depth = 60;

    double recurse(double a, double b, double tol, int depth) {
        const double coarse = apply(rule7(), f, a, b);
        const double fine = apply(rule15(), f, a, b);
        const double err = std::abs(fine - coarse);
        if (err <= tol || depth >= max_depth) {
            if (depth >= max_depth && err > tol) error = std::max(error, err);
            return fine;
        }
        ++subdivisions;
        const double mid = 0.5 * (a + b);
        return recurse(a, mid, 0.5 * tol, depth + 1) + recurse(mid, b, 0.5 * tol, depth + 1);
    }
};

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           double abs_tol, const std::vector<double>& breakpoints) {
    if (!(lo < hi)) throw std::invalid_argument("integrate: require lo < hi");

    std::vector<double> edges{lo, hi};
    for (double b : breakpoints) {
        if (b > lo && b < hi) edges.push_back(b);
    }
    std::sort(edges.begin(), edges.end());

    Worker worker{f};
    QuadratureResult result;
    const int panels = static_cast<int>(edges.size()) - 1;
    for (int i = 0; i < panels; ++i) {
        result.value += worker.recurse(edges[i], edges[i + 1], abs_tol / panels, 0);
    }
    result.subdivisions = worker.subdivisions;
    result.error_estimate = worker.error;
    if (worker.error > abs_tol) {
        throw numeric_error("integrate: tolerance " + std::to_string(abs_tol) +
                            " not reached, achieved " + std::to_string(worker.error));
    }
    return result;
}

}  // namespace wgain
