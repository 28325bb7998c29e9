#pragma once

#include <Eigen/Core>

#include <optional>

#include "plq/config.hpp"
#include "plq/evolution.hpp"
#include "plq/grid_path.hpp"
#include "plq/lq_problem.hpp"
#include "plq/riccati.hpp"

namespace plq {

struct Horizon {
    bool periodic = false;
    double length = 0.0;  // T for finite horizons, theta for periodic orbits
};

// State, control and adjoint of one optimal solution, with
// u = -Q^{-1} B^T lambda and lambda = P y + r holding at the grid points.
struct OptimalTriple {
    VectorPath y;
    VectorPath u;
    VectorPath lambda;
    double cost = 0.0;
    Horizon horizon;
};

// Fitted constants of the two-boundary-layer envelope C (e^{-nu t} + e^{-nu (T-t)}).
struct TurnpikeFit {
    double C_fit = 0.0;
    double nu_fit = 0.0;
    double residual = 0.0;  // max log-envelope misfit over the fitted windows
    double initial_window[2] = {0.0, 0.0};
    double final_window[2] = {0.0, 0.0};
    double slope_initial = 0.0;  // decay rate fitted on the initial window
    double slope_final = 0.0;    // decay rate fitted on the final window
};

struct DissipationReport {
    double t0 = 0.0, t1 = 0.0;
    double storage_start = 0.0;
    double storage_end = 0.0;
    double supply_integral = 0.0;
    double slack = 0.0;  // storage_start + supply - storage_end
    double tolerance = 0.0;
    bool passed = false;
};

struct FiniteHorizonSolution {
    OptimalTriple triple;
    MatrixPath P;  // Riccati solution with P(T) = 0
    VectorPath r;  // offset with r(T) = 0
};

struct PeriodicOrbitSolution {
    OptimalTriple triple;
    MatrixPath P_theta;
    VectorPath r_theta;
    MonodromyReport closed_loop;
    int riccati_sweeps = 0;
    int offset_sweeps = 0;
};

// Finite-horizon synthesis: Riccati sweep, offset sweep, closed-loop state
// propagation, lambda = P y + r, u = -Q^{-1} B^T lambda.
FiniteHorizonSolution solve_finite_horizon(const PeriodicLQProblem& problem,
                                           const Eigen::VectorXd& y0, double T,
                                           const SolveConfig& cfg = {});

// Periodic orbit: periodic Riccati and offset, then the periodic solution of
// the exponentially stable closed loop driven by -B Q^{-1} B^T r_theta.
PeriodicOrbitSolution solve_periodic_orbit(const PeriodicLQProblem& problem,
                                           const SolveConfig& cfg = {});

// e(t) = ||y^T - y_per|| + ||u^T - u_per|| + ||lambda^T - lambda_per|| on the
// finite triple's grid, the periodic triple extended by wraparound.
VectorPath deviation(const OptimalTriple& finite, const OptimalTriple& periodic);

// Least-squares fit of ln e against t on the initial window and against T-t
// on the final window; points at or below `floor` are excluded. When
// `period` is positive the window length is rounded up to a whole number of
// periods (capped at T/4) so that periodic modulation of the deviation does
// not bias the fitted rate.
TurnpikeFit fit_envelope(const VectorPath& e, double T, double floor, double period = 0.0);

// Fit of ln ||P_theta - P^T|| against T-t on the window above `floor`
// (C_fit = M, nu_fit = mu of the gap estimate).
TurnpikeFit riccati_gap_profile(const MatrixPath& P_T, const MatrixPath& P_theta, double T,
                                double floor);

// Dissipation inequality S(t0, y(t0)) + int omega dt >= S(t1, y(t1)) with
// storage S(t,y) = -<y - y_theta(t), P_theta(t) y_theta(t) + r_theta(t)> and
// supply omega = l(t,y,u) - l(t,y_theta,u_theta); (y, u) must solve the state
// equation within cfg.dynamics_residual_tol.
DissipationReport check_dissipation(const PeriodicLQProblem& problem, const VectorPath& y,
                                    const VectorPath& u, const OptimalTriple& periodic,
                                    const MatrixPath& P_theta, const VectorPath& r_theta,
                                    double t0, double t1, const SolveConfig& cfg = {});

// --- diagnostics used by tests and reports --------------------------------

// max over the grid of ||u + Q^{-1} B^T lambda||.
double control_consistency_defect(const PeriodicLQProblem& problem, const OptimalTriple& triple);
// max over the grid of ||lambda - P y - r|| for the synthesizing P, r.
double synthesis_defect(const OptimalTriple& triple, const MatrixPath& P, const VectorPath& r,
                        bool periodic);
// max finite-difference residual of the extremal (Hamiltonian) system,
// relative to 1 + trajectory magnitude.
double extremal_residual(const PeriodicLQProblem& problem, const OptimalTriple& triple);

}  // namespace plq
