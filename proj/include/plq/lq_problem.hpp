#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "plq/grid_path.hpp"

namespace plq {

// Time-periodic linear-quadratic tracking problem
//
//   minimize  1/2 int ( ||C(t)(y - y_d(t))||^2 + <Q(t) u, u> ) dt
//   s.t.      y' = A(t) y + B(t) u
//
// with theta-periodic coefficient maps. Coefficients are supplied as
// callables and sampled on demand; instances are immutable after
// construction and safe to share across threads.
struct PeriodicLQProblem {
    int state_dim = 0;
    int control_dim = 0;
    double period = 0.0;
    std::function<Eigen::MatrixXd(double)> A;    // state_dim x state_dim
    std::function<Eigen::MatrixXd(double)> B;    // state_dim x control_dim
    std::function<Eigen::MatrixXd(double)> C;    // state_dim x state_dim, symmetric PSD
    std::function<Eigen::MatrixXd(double)> Q;    // control_dim x control_dim, symmetric PD
    std::function<Eigen::VectorXd(double)> y_d;  // state_dim
    double q_floor = 0.0;                        // epsilon with Q(t) >= epsilon I

    // Q(t)^{-1} B(t)^T, via Cholesky (Q >= q_floor I keeps this well posed).
    Eigen::MatrixXd qinv_Bt(double t) const;
    // B(t) Q(t)^{-1} B(t)^T.
    Eigen::MatrixXd control_quadratic(double t) const;
    // C(t)^T C(t).
    Eigen::MatrixXd ctc(double t) const;
    // Running cost 1/2 (||C(y - y_d)||^2 + <Qu, u>).
    double running_cost(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u) const;
};

struct CoefficientCheck {
    std::string name;
    double periodicity_defect = 0.0;  // sup over samples of ||F(t+theta) - F(t)||_F
    double scale = 0.0;               // sup over samples of ||F(t)||_F
};

struct ValidationReport {
    std::vector<CoefficientCheck> coefficients;  // A, B, C, Q, y_d
    double min_eig_Q = 0.0;              // min over samples of lambda_min(Q(t))
    double min_eig_Q_minus_floor = 0.0;  // min over samples of lambda_min(Q(t) - q_floor I)
    double min_eig_C = 0.0;
    double max_asymmetry_C = 0.0;
    double max_asymmetry_Q = 0.0;
    double tolerance = 0.0;  // relative periodicity tolerance applied
    bool passed = false;
};

// Samples every coefficient at n_samples points across one period and checks
// periodicity, symmetry, Q >= q_floor I and C >= 0.
ValidationReport validate(const PeriodicLQProblem& problem, int n_samples,
                          double rel_tol = 1e-10);

// 1/2 int_{t0}^{t1} (||C(y - y_d)||^2 + <Qu, u>) dt by composite trapezoid on
// the trajectory's own grid (partial end cells use interpolated samples).
double evaluate_cost(const PeriodicLQProblem& problem, const VectorPath& y, const VectorPath& u,
                     double t0, double t1);

}  // namespace plq
