#pragma once

#include <Eigen/Core>

#include "plq/config.hpp"
#include "plq/errors.hpp"
#include "plq/grid_path.hpp"
#include "plq/lq_problem.hpp"

namespace plq {

// Backward sweep over successive periods failed to reach a fixed point;
// carries the last two period restrictions and their sup-norm gap. Usually
// means the stabilizability/detectability hypotheses fail.
class NonStabilizableError : public Error {
public:
    NonStabilizableError(const std::string& what, MatrixPath last, MatrixPath previous,
                         double gap)
        : Error(what), last_(std::move(last)), previous_(std::move(previous)), gap_(gap) {}
    const MatrixPath& last() const { return last_; }
    const MatrixPath& previous() const { return previous_; }
    double gap() const { return gap_; }

private:
    MatrixPath last_;
    MatrixPath previous_;
    double gap_;
};

struct PeriodicRiccatiResult {
    MatrixPath path;  // on [0, theta], ||P(0) - P(theta)|| <= tol
    int sweeps = 0;
    double gap = 0.0;
};

struct PeriodicOffsetResult {
    VectorPath path;  // r on [0, theta]
    int sweeps = 0;
    double gap = 0.0;
};

// Solution of  P' + A^T P + P A - P B Q^{-1} B^T P + C^T C = 0,  P(T) = P_T,
// integrated backward on [0, T]. Stored matrices are symmetrized each
// accepted step; derivatives hold dP/dt.
MatrixPath solve_riccati_terminal(const PeriodicLQProblem& problem, double T,
                                  const Eigen::MatrixXd& P_T, const std::vector<double>& grid,
                                  const SolveConfig& cfg = {});
MatrixPath solve_riccati_terminal(const PeriodicLQProblem& problem, double T,
                                  const Eigen::MatrixXd& P_T, const SolveConfig& cfg = {});

// Theta-periodic solution, found by integrating backward over successive
// periods from P = 0 until two consecutive period restrictions agree within
// tol in the sup spectral norm.
PeriodicRiccatiResult solve_periodic_riccati(const PeriodicLQProblem& problem, double tol,
                                             int max_periods, const SolveConfig& cfg = {});

// Offset equation r' = -(A - B Q^{-1} B^T P)^T r + C^T C y_d, r(T) = 0,
// for the finite-horizon P path.
VectorPath solve_r_terminal(const PeriodicLQProblem& problem, const MatrixPath& P_path,
                            double T, const SolveConfig& cfg = {});

// Theta-periodic offset for P_theta, via the same period-map fixed point
// iteration (converges at the closed-loop decay rate). The closed loop must
// be exponentially stable; a precomputed monodromy report can be supplied to
// skip recomputing it.
PeriodicOffsetResult solve_periodic_r(const PeriodicLQProblem& problem,
                                      const MatrixPath& P_theta, double tol, int max_periods,
                                      const SolveConfig& cfg = {},
                                      const MonodromyReport* closed_loop = nullptr);

// Max over interior grid points of the Frobenius norm of the Riccati defect,
// with dP/dt replaced by centered finite differences of the stored values.
double riccati_residual(const PeriodicLQProblem& problem, const MatrixPath& P_path);

// Closed-loop generator A(t) - B(t) Q^{-1}(t) B(t)^T P(t) with P interpolated
// (periodically when `periodic` is set).
MatrixFn closed_loop_generator(const PeriodicLQProblem& problem, const MatrixPath& P,
                               bool periodic);

}  // namespace plq
