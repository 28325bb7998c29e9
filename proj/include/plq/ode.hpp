#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace plq {

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
using StateHook = std::function<void(Eigen::VectorXd&)>;
using MatrixFn = std::function<Eigen::MatrixXd(double)>;
using VectorFn = std::function<Eigen::VectorXd(double)>;

struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double initial_step = 0.0;  // 0 = automatic
    double max_step = 0.0;      // 0 = unrestricted
    long max_steps = 50'000'000;
};

struct OdeSolution {
    std::vector<Eigen::VectorXd> values;       // one per requested grid point
    std::vector<Eigen::VectorXd> derivatives;  // f(t, x) at the grid points
    long steps_accepted = 0;
    long steps_rejected = 0;
};

// Adaptive Dormand-Prince 5(4). Integrates from grid.front() to grid.back(),
// landing exactly on every grid point, and records state and derivative
// there. `post_step`, when given, is applied to the live state after each
// accepted step (used to re-symmetrize matrix states).
//
// Throws StiffnessError when the step size collapses or the step budget is
// exhausted, with the time at which it happened.
OdeSolution integrate_rk45(const OdeRhs& f, const std::vector<double>& grid,
                           const Eigen::VectorXd& x0, const OdeOptions& opts,
                           const StateHook& post_step = {});

// Fixed-step implicit midpoint rule specialized to linear systems
// x' = F(t) x + g(t): each step is one dense solve with I - h/2 F(t_mid).
// Steps through every grid interval, `substeps` solves per interval.
// A-stable, second order; the stiff fallback for PDE discretizations.
OdeSolution integrate_implicit_midpoint_linear(const MatrixFn& F, const VectorFn* g,
                                               const std::vector<double>& grid,
                                               const Eigen::VectorXd& x0, int substeps = 1);

}  // namespace plq
