#pragma once

#include "wgain/types.hpp"

#include <optional>
#include <vector>

namespace wgain {

struct SolverOptions {
    double coef_tolerance = 1e-9;
    double kkt_tolerance = 1e-7;
    long max_sweeps = 100000;
    int unpenalized_index = -1;              // lasso_regression only; -1 penalizes all
    std::optional<VectorXd> warm_start;
    bool record_objective_trace = false;
};

struct LassoFit {
    VectorXd coefficients;
    double penalty = 0.0;
    long iterations = 0;
    bool converged = false;
    double max_kkt_violation = 0.0;
    double objective = 0.0;
    std::vector<double> objective_trace;     // one entry per sweep when recorded
};

// Cyclic coordinate descent with covariance updates for
//   min_beta (1/n) ||y - X beta||^2 + 2 lambda sum_{j != unpenalized} |beta_j|.
// KKT violations are measured on the soft-threshold scale: |X_j'(y-X beta)/n|
// against lambda.  Hitting the sweep cap is not an error; the fit comes back
// with converged = false.
LassoFit lasso_regression(const MatrixXd& X, const VectorXd& y, double penalty,
                          const SolverOptions& opts = {});

// Coordinate descent for the Riesz quadratic program
//   min_rho  -2 M' rho + rho' G rho + 2 r sum_j |rho_j|
// with G symmetric positive semidefinite (checked to 1e-8) and every
// coordinate penalized.  KKT scale: |(G rho - M)_j| against r.
LassoFit riesz_lasso(const MatrixXd& G, const VectorXd& M, double penalty,
                     const SolverOptions& opts = {});

}  // namespace wgain
