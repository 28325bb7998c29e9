#include "plq/evolution.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>

#include "plq/errors.hpp"

namespace plq {

VectorPath propagate(const MatrixFn& generator, const VectorFn* forcing,
                     const std::vector<double>& grid, const Eigen::VectorXd& x0,
                     const PropagationOptions& opts) {
    if (grid.empty()) throw Error("propagate: empty grid");
    VectorPath path;
    path.grid = grid;
    if (grid.size() == 1) {
        path.values.push_back(x0);
        Eigen::VectorXd d = generator(grid[0]) * x0;
        if (forcing) d += (*forcing)(grid[0]);
        path.derivatives.push_back(d);
        return path;
    }

    OdeSolution sol;
    if (opts.stiff) {
        sol = integrate_implicit_midpoint_linear(generator, forcing, grid, x0, opts.substeps);
    } else {
        OdeRhs rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
            dx.noalias() = generator(t) * x;
            if (forcing) dx += (*forcing)(t);
        };
        sol = integrate_rk45(rhs, grid, x0, opts.ode);
    }
    path.values = std::move(sol.values);
    path.derivatives = std::move(sol.derivatives);
    return path;
}

VectorPath propagate(const MatrixFn& generator, const VectorFn* forcing, double t0, double t1,
                     const Eigen::VectorXd& x0, std::size_t points,
                     const PropagationOptions& opts) {
    if (t1 == t0) return propagate(generator, forcing, std::vector<double>{t0}, x0, opts);
    if (t1 < t0) throw Error("propagate: t1 < t0");
    return propagate(generator, forcing, uniform_grid(t0, t1, points), x0, opts);
}

MonodromyReport monodromy(const MatrixFn& generator, double period, Eigen::Index dim,
                          std::size_t points_per_period, const PropagationOptions& opts) {
    if (!(period > 0)) throw Error("monodromy: period must be positive");
    const auto grid = uniform_grid(0.0, period, points_per_period);
    Eigen::MatrixXd map(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e(j) = 1.0;
        map.col(j) = propagate(generator, nullptr, grid, e, opts).values.back();
    }

    MonodromyReport report;
    report.period_map = map;
    report.period = period;
    Eigen::EigenSolver<Eigen::MatrixXd> es(map, /*computeEigenvectors=*/false);
    const Eigen::VectorXcd lam = es.eigenvalues();
    report.spectral_radius = lam.cwiseAbs().maxCoeff();
    report.decay_rate = -std::log(report.spectral_radius) / period;
    report.min_distance_to_one =
        (lam.array() - std::complex<double>(1.0, 0.0)).abs().minCoeff();
    report.one_in_resolvent = report.min_distance_to_one > 1e-8;
    return report;
}

VectorPath periodic_solution_linear(const MatrixFn& generator, const VectorFn& forcing,
                                    double period, Eigen::Index dim, std::size_t points,
                                    const PropagationOptions& opts, double defect_tol) {
    const MonodromyReport mono = monodromy(generator, period, dim, points, opts);
    if (!mono.one_in_resolvent)
        throw ResolventViolationError(
            "periodic_solution_linear: 1 is within 1e-8 of a Floquet multiplier "
            "(|lambda - 1| = " +
            std::to_string(mono.min_distance_to_one) + ")");

    const auto grid = uniform_grid(0.0, period, points);
    const VectorFn* g = &forcing;
    // Particular solution from zero initial state: x_p(theta) = int U(theta,s) g(s) ds.
    const VectorPath particular =
        propagate(generator, g, grid, Eigen::VectorXd::Zero(dim), opts);
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(dim, dim) - mono.period_map;
    const Eigen::VectorXd x0 = lhs.partialPivLu().solve(particular.values.back());

    VectorPath path = propagate(generator, g, grid, x0, opts);
    double scale = 0.0;
    for (const auto& v : path.values) scale = std::max(scale, v.norm());
    const double defect = (path.values.front() - path.values.back()).norm();
    if (defect > defect_tol * (1.0 + scale))
        throw Error("periodic_solution_linear: periodicity defect " + std::to_string(defect) +
                    " exceeds tolerance");
    return path;
}

}  // namespace plq
