#include "plq/turnpike.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace plq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.points = x.size();
    if (x.size() < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) return f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy * sxx - sx * sxy) / det;
    return f;
}

}  // namespace

FiniteHorizonSolution solve_finite_horizon(const PeriodicLQProblem& problem,
                                           const Eigen::VectorXd& y0, double T,
                                           const SolveConfig& cfg) {
    if (!(T > 0)) throw InvalidProblemError("solve_finite_horizon: T must be positive");
    if (y0.size() != problem.state_dim)
        throw DimensionMismatchError("solve_finite_horizon: y0 dimension");

    FiniteHorizonSolution out;
    const MatrixXd P_T = MatrixXd::Zero(problem.state_dim, problem.state_dim);
    out.P = solve_riccati_terminal(problem, T, P_T, cfg);
    out.r = solve_r_terminal(problem, out.P, T, cfg);

    const MatrixFn F = closed_loop_generator(problem, out.P, /*periodic=*/false);
    const VectorPath& r_path = out.r;
    VectorFn force = [&problem, &r_path](double t) -> VectorXd {
        return VectorXd(-problem.control_quadratic(t) * r_path.eval(t));
    };
    out.triple.y = propagate(F, &force, out.P.grid, y0, cfg.propagation());

    const std::size_t N = out.P.size();
    out.triple.lambda.grid = out.P.grid;
    out.triple.u.grid = out.P.grid;
    out.triple.lambda.values.resize(N);
    out.triple.u.values.resize(N);
    out.triple.lambda.derivatives.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = out.P.grid[i];
        const VectorXd& yi = out.triple.y.values[i];
        out.triple.lambda.values[i] = out.P.values[i] * yi + out.r.values[i];
        // d/dt (P y + r) from the stored derivatives.
        out.triple.lambda.derivatives[i] = out.P.derivatives[i] * yi +
                                           out.P.values[i] * out.triple.y.derivatives[i] +
                                           out.r.derivatives[i];
        out.triple.u.values[i] = -problem.qinv_Bt(t) * out.triple.lambda.values[i];
    }
    out.triple.cost = evaluate_cost(problem, out.triple.y, out.triple.u, 0.0, T);
    out.triple.horizon = Horizon{false, T};
    return out;
}

PeriodicOrbitSolution solve_periodic_orbit(const PeriodicLQProblem& problem,
                                           const SolveConfig& cfg) {
    PeriodicOrbitSolution out;
    const double theta = problem.period;

    PeriodicRiccatiResult ric = solve_periodic_riccati(problem, cfg.riccati_tol,
                                                       cfg.max_periods, cfg);
    out.P_theta = std::move(ric.path);
    out.riccati_sweeps = ric.sweeps;

    const MatrixFn F = closed_loop_generator(problem, out.P_theta, /*periodic=*/true);
    out.closed_loop = monodromy(F, theta, problem.state_dim, cfg.grid_points_per_period + 1,
                                cfg.propagation());

    PeriodicOffsetResult off = solve_periodic_r(problem, out.P_theta, cfg.riccati_tol,
                                                cfg.max_periods, cfg, &out.closed_loop);
    out.r_theta = std::move(off.path);
    out.offset_sweeps = off.sweeps;

    const VectorPath& r_path = out.r_theta;
    VectorFn force = [&problem, &r_path, theta](double t) -> VectorXd {
        return VectorXd(-problem.control_quadratic(t) * r_path.eval_periodic(t, theta));
    };
    out.triple.y = periodic_solution_linear(F, force, theta, problem.state_dim,
                                            cfg.grid_points_per_period + 1, cfg.propagation(),
                                            cfg.periodic_defect_tol);

    const std::size_t N = out.triple.y.size();
    out.triple.lambda.grid = out.triple.y.grid;
    out.triple.u.grid = out.triple.y.grid;
    out.triple.lambda.values.resize(N);
    out.triple.lambda.derivatives.resize(N);
    out.triple.u.values.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = out.triple.y.grid[i];
        const VectorXd& yi = out.triple.y.values[i];
        out.triple.lambda.values[i] = out.P_theta.values[i] * yi + out.r_theta.values[i];
        out.triple.lambda.derivatives[i] = out.P_theta.derivatives[i] * yi +
                                           out.P_theta.values[i] * out.triple.y.derivatives[i] +
                                           out.r_theta.derivatives[i];
        out.triple.u.values[i] = -problem.qinv_Bt(t) * out.triple.lambda.values[i];
    }
    out.triple.cost = evaluate_cost(problem, out.triple.y, out.triple.u, 0.0, theta);
    out.triple.horizon = Horizon{true, theta};
    return out;
}

VectorPath deviation(const OptimalTriple& finite, const OptimalTriple& periodic) {
    if (!periodic.horizon.periodic) throw Error("deviation: second argument must be periodic");
    if (finite.y.values.front().size() != periodic.y.values.front().size() ||
        finite.u.values.front().size() != periodic.u.values.front().size())
        throw DimensionMismatchError("deviation: triple dimensions differ");
    const double theta = periodic.horizon.length;
    VectorPath e;
    e.grid = finite.y.grid;
    e.values.reserve(e.grid.size());
    for (std::size_t i = 0; i < e.grid.size(); ++i) {
        const double t = e.grid[i];
        Eigen::VectorXd v(1);
        v(0) = (finite.y.values[i] - periodic.y.eval_periodic(t, theta)).norm() +
               (finite.u.values[i] - periodic.u.eval_periodic(t, theta)).norm() +
               (finite.lambda.values[i] - periodic.lambda.eval_periodic(t, theta)).norm();
        e.values.push_back(std::move(v));
    }
    return e;
}

TurnpikeFit fit_envelope(const VectorPath& e, double T, double floor, double period) {
    if (e.empty() || e.values.front().size() != 1)
        throw Error("fit_envelope: expected a scalar path");
    if (!(floor > 0)) throw Error("fit_envelope: floor must be positive");
    for (const auto& v : e.values)
        if (v(0) < -1e-12) throw Error("fit_envelope: deviation must be nonnegative");

    auto collect = [&](double lo, double hi, bool from_end) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double t = e.grid[i];
            if (t < lo || t > hi) continue;
            const double val = e.values[i](0);
            if (val <= floor) continue;
            xs.push_back(from_end ? (T - t) : t);
            ys.push_back(std::log(val));
        }
        return std::make_pair(xs, ys);
    };

    // First pass over the leading quarter to size the boundary-layer window.
    auto [x0, y0] = collect(0.0, T / 4.0, false);
    if (x0.size() < 2)
        throw DegenerateFitError("fit_envelope: no points above floor in the initial quarter");
    const LineFit pass1 = fit_line(x0, y0);
    double window = T / 4.0;
    if (-pass1.slope > 0) {
        double layer = 3.0 / (-pass1.slope);
        // Whole periods average out the periodic modulation of e(t).
        if (period > 0) layer = period * std::ceil(layer / period);
        window = std::min(window, layer);
    }

    auto [xi, yi] = collect(0.0, window, false);
    auto [xf, yf] = collect(T - window, T, true);
    if (xi.size() < 2 || xf.size() < 2)
        throw DegenerateFitError("fit_envelope: a fit window has fewer than 2 usable points");
    const LineFit init = fit_line(xi, yi);
    const LineFit fin = fit_line(xf, yf);

    TurnpikeFit fit;
    fit.slope_initial = -init.slope;
    fit.slope_final = -fin.slope;
    fit.nu_fit = 0.5 * (fit.slope_initial + fit.slope_final);
    fit.C_fit = std::exp(0.5 * (init.intercept + fin.intercept));
    fit.initial_window[0] = 0.0;
    fit.initial_window[1] = window;
    fit.final_window[0] = T - window;
    fit.final_window[1] = T;
    if (!(fit.nu_fit > 0))
        throw DegenerateFitError("fit_envelope: fitted decay rate is not positive");

    auto model = [&](double t) {
        return fit.C_fit * (std::exp(-fit.nu_fit * t) + std::exp(-fit.nu_fit * (T - t)));
    };
    double residual = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double t = e.grid[i];
        const bool in_window = (t >= 0.0 && t <= window) || (t >= T - window && t <= T);
        if (!in_window) continue;
        const double val = e.values[i](0);
        if (val <= floor) continue;
        residual = std::max(residual, std::abs(std::log(val) - std::log(model(t))));
    }
    fit.residual = residual;
    return fit;
}

TurnpikeFit riccati_gap_profile(const MatrixPath& P_T, const MatrixPath& P_theta, double T,
                                double floor) {
    if (!(floor > 0)) throw Error("riccati_gap_profile: floor must be positive");
    const double theta = P_theta.span();
    std::vector<double> xs, ys;
    double t_lo = T, t_hi = 0.0;
    for (std::size_t i = 0; i < P_T.size(); ++i) {
        const double t = P_T.grid[i];
        if (t > T) break;
        Eigen::MatrixXd d = P_theta.eval_periodic(t, theta) - P_T.values[i];
        d = 0.5 * (d + d.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
        const double gap = es.eigenvalues().cwiseAbs().maxCoeff();
        if (gap <= floor) continue;
        xs.push_back(T - t);
        ys.push_back(std::log(gap));
        t_lo = std::min(t_lo, t);
        t_hi = std::max(t_hi, t);
    }
    if (xs.size() < 2)
        throw DegenerateFitError("riccati_gap_profile: gap is below floor everywhere");
    const LineFit line = fit_line(xs, ys);

    TurnpikeFit fit;
    fit.nu_fit = -line.slope;  // mu
    fit.C_fit = std::exp(line.intercept);
    fit.slope_initial = fit.nu_fit;
    fit.slope_final = fit.nu_fit;
    fit.initial_window[0] = t_lo;
    fit.initial_window[1] = t_hi;
    fit.final_window[0] = t_lo;
    fit.final_window[1] = t_hi;
    if (!(fit.nu_fit > 0))
        throw DegenerateFitError("riccati_gap_profile: fitted rate is not positive");
    double residual = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        residual = std::max(residual,
                            std::abs(ys[i] - (line.intercept + line.slope * xs[i])));
    fit.residual = residual;
    return fit;
}

DissipationReport check_dissipation(const PeriodicLQProblem& problem, const VectorPath& y,
                                    const VectorPath& u, const OptimalTriple& periodic,
                                    const MatrixPath& P_theta, const VectorPath& r_theta,
                                    double t0, double t1, const SolveConfig& cfg) {
    if (y.size() != u.size()) throw GridMismatchError("check_dissipation: y/u grid mismatch");
    if (!(t1 > t0)) throw Error("check_dissipation: need t1 > t0");
    const double slop = 1e-9 * (1.0 + y.span());
    if (t0 < y.t_begin() - slop || t1 > y.t_end() + slop)
        throw Error("check_dissipation: [t0, t1] outside the trajectory");
    const double theta = problem.period;

    // The inequality only holds along solutions of the state equation, so
    // reject inconsistent inputs outright.
    double scale = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Eigen::VectorXd d =
            y.has_derivatives() ? y.derivatives[i] : y.eval_derivative(y.grid[i]);
        scale = std::max(scale, d.norm());
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = y.grid[i];
        if (t < t0 - slop || t > t1 + slop) continue;
        const Eigen::VectorXd d = y.has_derivatives() ? y.derivatives[i] : y.eval_derivative(t);
        const Eigen::VectorXd res = d - problem.A(t) * y.values[i] - problem.B(t) * u.values[i];
        worst = std::max(worst, res.norm());
    }
    const double fd_allowance = y.has_derivatives() ? 1.0 : 100.0;
    if (worst > fd_allowance * cfg.dynamics_residual_tol * scale)
        throw InvalidTrajectoryError("check_dissipation: trajectory does not solve the state "
                                     "equation (residual " + std::to_string(worst) + ")");

    auto storage = [&](double t, const Eigen::VectorXd& yt) {
        const Eigen::VectorXd lam = P_theta.eval_periodic(t, theta) *
                                        periodic.y.eval_periodic(t, theta) +
                                    r_theta.eval_periodic(t, theta);
        return -(yt - periodic.y.eval_periodic(t, theta)).dot(lam);
    };
    auto supply_rate = [&](double t, const Eigen::VectorXd& yt, const Eigen::VectorXd& ut) {
        return problem.running_cost(t, yt, ut) -
               problem.running_cost(t, periodic.y.eval_periodic(t, theta),
                                    periodic.u.eval_periodic(t, theta));
    };

    std::vector<double> ts;
    ts.push_back(t0);
    for (double tg : y.grid)
        if (tg > t0 + slop && tg < t1 - slop) ts.push_back(tg);
    ts.push_back(t1);

    double supply = 0.0;
    double prev_t = ts.front();
    double prev_w = supply_rate(prev_t, y.eval(prev_t), u.eval(prev_t));
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double t = ts[i];
        const double w = supply_rate(t, y.eval(t), u.eval(t));
        supply += 0.5 * (prev_w + w) * (t - prev_t);
        prev_t = t;
        prev_w = w;
    }

    DissipationReport rep;
    rep.t0 = t0;
    rep.t1 = t1;
    rep.storage_start = storage(t0, y.eval(t0));
    rep.storage_end = storage(t1, y.eval(t1));
    rep.supply_integral = supply;
    rep.slack = rep.storage_start + supply - rep.storage_end;
    rep.tolerance = 1e-7 * (1.0 + std::abs(rep.storage_start) + std::abs(rep.storage_end) +
                            std::abs(supply));
    rep.passed = rep.slack >= -rep.tolerance;
    return rep;
}

double control_consistency_defect(const PeriodicLQProblem& problem,
                                  const OptimalTriple& triple) {
    double worst = 0.0;
    for (std::size_t i = 0; i < triple.u.size(); ++i) {
        const double t = triple.u.grid[i];
        worst = std::max(worst, (triple.u.values[i] +
                                 problem.qinv_Bt(t) * triple.lambda.values[i]).norm());
    }
    return worst;
}

double synthesis_defect(const OptimalTriple& triple, const MatrixPath& P, const VectorPath& r,
                        bool periodic) {
    const double theta = triple.horizon.length;
    double worst = 0.0;
    for (std::size_t i = 0; i < triple.y.size(); ++i) {
        const double t = triple.y.grid[i];
        const Eigen::MatrixXd Pt = periodic ? P.eval_periodic(t, theta) : P.eval(t);
        const Eigen::VectorXd rt = periodic ? r.eval_periodic(t, theta) : r.eval(t);
        worst = std::max(
            worst, (triple.lambda.values[i] - Pt * triple.y.values[i] - rt).norm());
    }
    return worst;
}

double extremal_residual(const PeriodicLQProblem& problem, const OptimalTriple& triple) {
    const auto& grid = triple.y.grid;
    if (grid.size() < 5) throw Error("extremal_residual: need at least 5 grid points");
    double magnitude = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        magnitude = std::max(magnitude,
                             triple.y.values[i].norm() + triple.lambda.values[i].norm());

    const double h = grid[1] - grid[0];
    bool uniform = true;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i)
        if (std::abs((grid[i + 1] - grid[i]) - h) > 1e-9 * h) uniform = false;

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        // Fourth-order five-point stencils on uniform grids (centered where
        // available, offset next to the ends); second-order fallback else.
        auto fd = [&](const VectorPath& p) -> Eigen::VectorXd {
            const auto& v = p.values;
            const std::size_t N = grid.size();
            if (uniform && N >= 5) {
                if (i >= 2 && i + 2 < N)
                    return (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
                if (i == 1)
                    return (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) /
                           (12.0 * h);
                // i == N - 2, mirrored offset stencil
                return (3.0 * v[N - 1] + 10.0 * v[N - 2] - 18.0 * v[N - 3] + 6.0 * v[N - 4] -
                        v[N - 5]) /
                       (12.0 * h);
            }
            const double hl = grid[i] - grid[i - 1];
            const double hr = grid[i + 1] - grid[i];
            return (-hr / (hl * (hl + hr))) * v[i - 1] + ((hr - hl) / (hl * hr)) * v[i] +
                   (hl / (hr * (hl + hr))) * v[i + 1];
        };
        const double t = grid[i];
        const Eigen::MatrixXd At = problem.A(t);
        const Eigen::MatrixXd CCt = problem.ctc(t);
        const Eigen::VectorXd ydot = fd(triple.y);
        const Eigen::VectorXd ldot = fd(triple.lambda);
        const Eigen::VectorXd res_y = ydot - At * triple.y.values[i] -
                                      problem.B(t) * triple.u.values[i];
        const Eigen::VectorXd res_l = ldot + CCt * triple.y.values[i] +
                                      At.transpose() * triple.lambda.values[i] -
                                      CCt * problem.y_d(t);
        worst = std::max(worst, std::max(res_y.norm(), res_l.norm()));
    }
    return worst / (1.0 + magnitude);
}

}  // namespace plq
