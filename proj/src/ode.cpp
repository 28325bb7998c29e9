#include "plq/ode.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "plq/errors.hpp"

namespace plq {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - bhat, including the FSAL stage evaluated at the new point.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_error(const Eigen::VectorXd& err, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& x1, const OdeOptions& opts) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(x0[i]), std::abs(x1[i]));
        const double q = err[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step_guess(const OdeRhs& f, double t0, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& f0, double span) {
    const double d0 = x0.norm();
    const double d1 = f0.norm();
    double h = (d1 > 1e-12 * std::max(1.0, d0)) ? 0.01 * std::max(1.0, d0) / d1 : 1e-4 * span;
    h = std::min(h, 0.1 * span);
    // One Euler probe to bound the second derivative.
    Eigen::VectorXd x1 = x0 + h * f0;
    Eigen::VectorXd f1(x0.size());
    f(t0 + h, x1, f1);
    const double d2 = (f1 - f0).norm() / h;
    if (d2 > 1e-15) {
        const double h1 = std::pow(0.01 / d2, 0.5);
        h = std::min(h, h1);
    }
    return std::max(h, 1e-10 * span);
}

}  // namespace

OdeSolution integrate_rk45(const OdeRhs& f, const std::vector<double>& grid,
                           const Eigen::VectorXd& x0, const OdeOptions& opts,
                           const StateHook& post_step) {
    if (grid.size() < 1) throw Error("integrate_rk45: empty grid");
    const Eigen::Index n = x0.size();
    OdeSolution sol;
    sol.values.reserve(grid.size());
    sol.derivatives.reserve(grid.size());

    Eigen::VectorXd x = x0;
    double t = grid.front();
    const double span = std::max(grid.back() - grid.front(),
                                 std::numeric_limits<double>::min());

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xs(n), xnew(n), err(n);
    f(t, x, k1);
    sol.values.push_back(x);
    sol.derivatives.push_back(k1);
    if (grid.size() == 1) return sol;

    double h = opts.initial_step > 0 ? opts.initial_step
                                     : initial_step_guess(f, t, x, k1, span);
    if (opts.max_step > 0) h = std::min(h, opts.max_step);

    std::size_t next = 1;
    long steps = 0;
    while (next < grid.size()) {
        const double target = grid[next];
        bool hit_target = false;
        if (t + h >= target - 1e-14 * std::max(1.0, std::abs(target))) {
            h = target - t;
            hit_target = true;
        }
        const double hmin = 1e-13 * std::max(1.0, std::abs(t));
        if (h <= hmin)
            throw StiffnessError("integrate_rk45: step size underflow at t=" + std::to_string(t),
                                 t);
        if (++steps > opts.max_steps)
            throw StiffnessError("integrate_rk45: step budget exhausted at t=" + std::to_string(t),
                                 t);

        xs = x + h * (a21 * k1);
        f(t + c2 * h, xs, k2);
        xs = x + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, xs, k3);
        xs = x + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, xs, k4);
        xs = x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, xs, k5);
        xs = x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, xs, k6);
        xnew = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, xnew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double enorm = scaled_error(err, x, xnew, opts);
        if (enorm <= 1.0) {
            t = hit_target ? target : t + h;
            x = xnew;
            if (post_step) {
                post_step(x);
                f(t, x, k1);
            } else {
                k1 = k7;
            }
            ++sol.steps_accepted;
            if (hit_target) {
                sol.values.push_back(x);
                sol.derivatives.push_back(k1);
                ++next;
            }
            const double factor =
                std::clamp(0.9 * std::pow(std::max(enorm, 1e-10), -0.2), 0.2, 5.0);
            h *= factor;
        } else {
            ++sol.steps_rejected;
            h *= std::clamp(0.9 * std::pow(enorm, -0.2), 0.1, 0.9);
        }
        if (opts.max_step > 0) h = std::min(h, opts.max_step);
    }
    return sol;
}

OdeSolution integrate_implicit_midpoint_linear(const MatrixFn& F, const VectorFn* g,
                                               const std::vector<double>& grid,
                                               const Eigen::VectorXd& x0, int substeps) {
    if (grid.size() < 1) throw Error("implicit midpoint: empty grid");
    if (substeps < 1) throw Error("implicit midpoint: substeps must be >= 1");
    const Eigen::Index n = x0.size();
    OdeSolution sol;
    sol.values.reserve(grid.size());
    sol.derivatives.reserve(grid.size());

    auto derivative_at = [&](double t, const Eigen::VectorXd& x) {
        Eigen::VectorXd d = F(t) * x;
        if (g) d += (*g)(t);
        return d;
    };

    Eigen::VectorXd x = x0;
    sol.values.push_back(x);
    sol.derivatives.push_back(derivative_at(grid.front(), x));

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double h = (grid[k + 1] - grid[k]) / substeps;
        double t = grid[k];
        for (int s = 0; s < substeps; ++s) {
            const double tm = t + 0.5 * h;
            const Eigen::MatrixXd Fm = F(tm);
            Eigen::VectorXd rhs = (id + 0.5 * h * Fm) * x;
            if (g) rhs += h * (*g)(tm);
            x = (id - 0.5 * h * Fm).partialPivLu().solve(rhs);
            t += h;
            ++sol.steps_accepted;
        }
        sol.values.push_back(x);
        sol.derivatives.push_back(derivative_at(grid[k + 1], x));
    }
    return sol;
}

}  // namespace plq
