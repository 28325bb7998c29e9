#include "plq/bvp_oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace plq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// z = (y; lambda) stacked Hamiltonian state.
OdeRhs hamiltonian_rhs(const PeriodicLQProblem& pb) {
    const Eigen::Index n = pb.state_dim;
    return [&pb, n](double t, const VectorXd& z, VectorXd& dz) {
        const auto y = z.head(n);
        const auto lam = z.tail(n);
        const MatrixXd At = pb.A(t);
        const MatrixXd CCt = pb.ctc(t);
        dz.resize(2 * n);
        dz.head(n) = At * y - pb.control_quadratic(t) * lam;
        dz.tail(n) = -CCt * y - At.transpose() * lam + CCt * pb.y_d(t);
    };
}

VectorXd integrate_segment(const OdeRhs& rhs, double t0, double t1, const VectorXd& z0,
                           const OdeOptions& ode) {
    const std::vector<double> grid{t0, t1};
    return integrate_rk45(rhs, grid, z0, ode).values.back();
}

int pick_segments(const ShootingConfig& cfg, double T) {
    if (cfg.segments > 0) return cfg.segments;
    return std::clamp(static_cast<int>(std::ceil(T)), 2, 64);
}

struct ShootingProblem {
    // Maps the unknown vector to segment start states; computes the residual
    // from the segment endpoint flows.
    std::vector<double> nodes;                       // segment boundaries
    std::function<VectorXd(const VectorXd&, int)> segment_start;
    std::function<VectorXd(const std::vector<VectorXd>&, const VectorXd&)> residual;
};

// Shared damped-Newton loop over segment flows. `flows[j]` caches the
// endpoint of segment j for the current iterate; a finite-difference column
// only re-integrates the one segment its unknown feeds.
VectorXd damped_newton(const OdeRhs& rhs, const ShootingProblem& sp, VectorXd X,
                       const ShootingConfig& cfg, const OdeOptions& ode, bool periodic,
                       ShootingDiagnostics* diag) {
    const int m = static_cast<int>(sp.nodes.size()) - 1;
    const Eigen::Index dim = X.size();

    auto flow_all = [&](const VectorXd& Xv) {
        std::vector<VectorXd> flows(m);
        for (int j = 0; j < m; ++j)
            flows[j] = integrate_segment(rhs, sp.nodes[j], sp.nodes[j + 1],
                                         sp.segment_start(Xv, j), ode);
        return flows;
    };

    std::vector<VectorXd> flows = flow_all(X);
    VectorXd G = sp.residual(flows, X);
    double gnorm = G.lpNorm<Eigen::Infinity>();
    if (diag) diag->residual_history.push_back(gnorm);

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (gnorm <= cfg.newton_tolerance) {
            if (diag) diag->iterations = iter;
            return X;
        }
        // Finite-difference Jacobian, one column at a time. Each unknown
        // belongs to exactly one segment's start state.
        MatrixXd J(G.size(), dim);
        const int block = static_cast<int>(X.size()) / m;  // unknowns per segment
        for (Eigen::Index c = 0; c < dim; ++c) {
            const int seg = std::min<int>(static_cast<int>(c) / block, m - 1);
            VectorXd Xp = X;
            const double h = cfg.finite_difference_step * (1.0 + std::abs(X(c)));
            Xp(c) += h;
            std::vector<VectorXd> flows_p = flows;
            flows_p[seg] = integrate_segment(rhs, sp.nodes[seg], sp.nodes[seg + 1],
                                             sp.segment_start(Xp, seg), ode);
            J.col(c) = (sp.residual(flows_p, Xp) - G) / h;
        }

        Eigen::FullPivLU<MatrixXd> lu(J);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) {
            if (periodic)
                throw DegeneratePeriodicityError(
                    "solve_periodic_bvp: singular shooting matrix (1 is a Floquet multiplier "
                    "of the Hamiltonian period map)");
            throw OracleFailureError("shooting: singular Jacobian", gnorm);
        }
        const VectorXd step = lu.solve(-G);

        // Damping: halve until the residual actually decreases.
        double alpha = 1.0;
        bool accepted = false;
        for (int half = 0; half < 10; ++half) {
            VectorXd Xt = X + alpha * step;
            std::vector<VectorXd> flows_t = flow_all(Xt);
            VectorXd Gt = sp.residual(flows_t, Xt);
            const double gt = Gt.lpNorm<Eigen::Infinity>();
            if (gt < gnorm * (1.0 - 0.25 * alpha) || gt <= cfg.newton_tolerance) {
                X = std::move(Xt);
                flows = std::move(flows_t);
                G = std::move(Gt);
                gnorm = gt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (diag) diag->residual_history.push_back(gnorm);
        if (!accepted)
            throw OracleFailureError("shooting: damped step could not reduce the defect",
                                     gnorm);
    }
    if (gnorm <= cfg.newton_tolerance) {
        if (diag) diag->iterations = cfg.max_iterations;
        return X;
    }
    throw OracleFailureError("shooting: Newton did not converge within " +
                                 std::to_string(cfg.max_iterations) + " iterations",
                             gnorm);
}

// Rebuilds the full triple on the numerics grid from converged segment
// starts, re-integrating each segment across its slice of the grid.
OptimalTriple assemble_triple(const PeriodicLQProblem& pb, const OdeRhs& rhs,
                              const std::vector<double>& nodes,
                              const std::vector<VectorXd>& starts, double T,
                              const SolveConfig& numerics, bool periodic) {
    const Eigen::Index n = pb.state_dim;
    const auto grid = numerics.horizon_grid(T, pb.period);
    OptimalTriple triple;
    triple.y.grid = grid;
    triple.u.grid = grid;
    triple.lambda.grid = grid;

    std::size_t gi = 0;
    const int m = static_cast<int>(nodes.size()) - 1;
    for (int j = 0; j < m; ++j) {
        std::vector<double> local{nodes[j]};
        std::vector<std::size_t> emit;  // local indices that are global nodes
        while (gi < grid.size() && grid[gi] <= nodes[j + 1] + 1e-12 * (1.0 + T)) {
            if (grid[gi] > local.back() + 1e-13 * (1.0 + T)) local.push_back(grid[gi]);
            emit.push_back(local.size() - 1);
            ++gi;
        }
        if (local.back() < nodes[j + 1] - 1e-13 * (1.0 + T)) local.push_back(nodes[j + 1]);
        const OdeSolution sol = integrate_rk45(rhs, local, starts[j], numerics.ode);
        for (std::size_t k = 0; k < emit.size(); ++k) {
            const VectorXd& z = sol.values[emit[k]];
            triple.y.values.push_back(z.head(n));
            triple.lambda.values.push_back(z.tail(n));
            const VectorXd& dz = sol.derivatives[emit[k]];
            triple.y.derivatives.push_back(dz.head(n));
            triple.lambda.derivatives.push_back(dz.tail(n));
        }
    }
    if (triple.y.values.size() != grid.size())
        throw Error("shooting: assembled grid is incomplete");

    for (std::size_t i = 0; i < grid.size(); ++i)
        triple.u.values.push_back(-pb.qinv_Bt(grid[i]) * triple.lambda.values[i]);
    triple.cost = evaluate_cost(pb, triple.y, triple.u, 0.0, T);
    triple.horizon = Horizon{periodic, T};
    return triple;
}

}  // namespace

OptimalTriple solve_extremal_bvp(const PeriodicLQProblem& problem, const Eigen::VectorXd& y0,
                                 double T, const ShootingConfig& config,
                                 const SolveConfig& numerics,
                                 ShootingDiagnostics* diagnostics) {
    if (!(T > 0)) throw InvalidProblemError("solve_extremal_bvp: T must be positive");
    if (y0.size() != problem.state_dim)
        throw DimensionMismatchError("solve_extremal_bvp: y0 dimension");
    const Eigen::Index n = problem.state_dim;
    const int m = pick_segments(config, T);
    const OdeRhs rhs = hamiltonian_rhs(problem);

    ShootingProblem sp;
    sp.nodes.resize(m + 1);
    for (int j = 0; j <= m; ++j) sp.nodes[j] = T * static_cast<double>(j) / m;

    // Unknowns: lambda(0) then the interior segment start states. For the
    // block-per-segment Jacobian bookkeeping the lambda(0) block is padded to
    // the same width as a full state by including y(0) as (fixed) unknowns.
    // Simpler: unknowns are the m segment start states, with segment 0's
    // y-part pinned to y0 inside segment_start and its columns still finite-
    // differenced (they produce near-zero residual derivatives y0-independent
    // rows are excluded by construction below).
    //
    // Layout: X = [z_0; z_1; ...; z_{m-1}], z_j in R^{2n}; residuals are
    //   y-part of z_0 minus y0, continuity, and lambda(T).
    VectorXd X = VectorXd::Zero(2 * n * m);
    if (config.riccati_initial_guess) {
        const FiniteHorizonSolution warm = solve_finite_horizon(problem, y0, T, numerics);
        for (int j = 0; j < m; ++j) {
            X.segment(2 * n * j, n) = warm.triple.y.eval(sp.nodes[j]);
            X.segment(2 * n * j + n, n) = warm.triple.lambda.eval(sp.nodes[j]);
        }
    } else {
        X.head(n) = y0;
    }

    sp.segment_start = [n](const VectorXd& Xv, int j) {
        return VectorXd(Xv.segment(2 * n * j, 2 * n));
    };
    sp.residual = [n, m, y0](const std::vector<VectorXd>& flows, const VectorXd& Xv) {
        VectorXd G(2 * n * m);
        G.head(n) = Xv.head(n) - y0;  // pin y(0)
        for (int j = 0; j + 1 < m; ++j)
            G.segment(n + 2 * n * j, 2 * n) = flows[j] - Xv.segment(2 * n * (j + 1), 2 * n);
        G.tail(n) = flows[m - 1].tail(n);  // lambda(T) = 0
        return G;
    };

    ShootingDiagnostics local;
    ShootingDiagnostics* diag = diagnostics ? diagnostics : &local;
    X = damped_newton(rhs, sp, std::move(X), config, numerics.ode, /*periodic=*/false, diag);

    std::vector<VectorXd> starts(m);
    for (int j = 0; j < m; ++j) starts[j] = X.segment(2 * n * j, 2 * n);
    starts[0].head(n) = y0;
    return assemble_triple(problem, rhs, sp.nodes, starts, T, numerics, /*periodic=*/false);
}

OptimalTriple solve_periodic_bvp(const PeriodicLQProblem& problem, const ShootingConfig& config,
                                 const SolveConfig& numerics,
                                 ShootingDiagnostics* diagnostics) {
    const Eigen::Index n = problem.state_dim;
    const double theta = problem.period;
    const int m = pick_segments(config, theta);
    const OdeRhs rhs = hamiltonian_rhs(problem);

    ShootingProblem sp;
    sp.nodes.resize(m + 1);
    for (int j = 0; j <= m; ++j) sp.nodes[j] = theta * static_cast<double>(j) / m;

    VectorXd X = VectorXd::Zero(2 * n * m);
    if (config.riccati_initial_guess) {
        const PeriodicOrbitSolution warm = solve_periodic_orbit(problem, numerics);
        for (int j = 0; j < m; ++j) {
            X.segment(2 * n * j, n) = warm.triple.y.eval(sp.nodes[j]);
            X.segment(2 * n * j + n, n) = warm.triple.lambda.eval(sp.nodes[j]);
        }
    }

    sp.segment_start = [n](const VectorXd& Xv, int j) {
        return VectorXd(Xv.segment(2 * n * j, 2 * n));
    };
    sp.residual = [n, m](const std::vector<VectorXd>& flows, const VectorXd& Xv) {
        VectorXd G(2 * n * m);
        for (int j = 0; j + 1 < m; ++j)
            G.segment(2 * n * j, 2 * n) = flows[j] - Xv.segment(2 * n * (j + 1), 2 * n);
        G.tail(2 * n) = flows[m - 1] - Xv.head(2 * n);  // z(theta) = z(0)
        return G;
    };

    ShootingDiagnostics local;
    ShootingDiagnostics* diag = diagnostics ? diagnostics : &local;
    X = damped_newton(rhs, sp, std::move(X), config, numerics.ode, /*periodic=*/true, diag);

    std::vector<VectorXd> starts(m);
    for (int j = 0; j < m; ++j) starts[j] = X.segment(2 * n * j, 2 * n);
    OptimalTriple triple =
        assemble_triple(problem, rhs, sp.nodes, starts, theta, numerics, /*periodic=*/true);
    return triple;
}

}  // namespace plq
