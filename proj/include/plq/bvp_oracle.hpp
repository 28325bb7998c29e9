#pragma once

#include <Eigen/Core>

#include "plq/config.hpp"
#include "plq/turnpike.hpp"

namespace plq {

// Multiple-shooting configuration for the Pontryagin two-point BVP.
struct ShootingConfig {
    int max_iterations = 30;
    double newton_tolerance = 1e-9;
    int segments = 0;  // 0 = automatic (about one per unit time, at least 2)
    double finite_difference_step = 1e-7;
    bool riccati_initial_guess = false;  // warm start from the Riccati synthesis
};

struct ShootingDiagnostics {
    std::vector<double> residual_history;  // after each accepted Newton step
    int iterations = 0;
};

// Riccati-free oracle: solves the coupled extremal system
//   y' = A y - B Q^{-1} B^T lambda,
//   lambda' = -C^T C y - A^T lambda + C^T C y_d,
// with y(0) = y0, lambda(T) = 0, by damped Newton multiple shooting with
// finite-difference Jacobians. The control is recovered from lambda.
OptimalTriple solve_extremal_bvp(const PeriodicLQProblem& problem, const Eigen::VectorXd& y0,
                                 double T, const ShootingConfig& config = {},
                                 const SolveConfig& numerics = {},
                                 ShootingDiagnostics* diagnostics = nullptr);

// Same system over one period with y(0) = y(theta), lambda(0) = lambda(theta).
OptimalTriple solve_periodic_bvp(const PeriodicLQProblem& problem,
                                 const ShootingConfig& config = {},
                                 const SolveConfig& numerics = {},
                                 ShootingDiagnostics* diagnostics = nullptr);

}  // namespace plq
