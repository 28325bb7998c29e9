#include "plq/riccati.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

namespace plq {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

MatrixXd symmetrized(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

// Riccati right-hand side in reversed time s = t_hi - t:
//   dP/ds = A^T(t) P + P A(t) - P S(t) P + C^T C(t).
struct BackwardRhs {
    const PeriodicLQProblem& pb;
    double t_hi;

    double time(double s) const { return t_hi - s; }

    MatrixXd operator()(double s, const MatrixXd& P) const {
        const double t = time(s);
        const MatrixXd At = pb.A(t);
        const MatrixXd St = pb.control_quadratic(t);
        return At.transpose() * P + P * At - P * St * P + pb.ctc(t);
    }
};

// Solve T^H Y + Y T = R column by column; T upper triangular (complex Schur
// factor), so T^H + T_jj I is lower triangular.
MatrixXcd solve_triangular_sylvester(const MatrixXcd& T, const MatrixXcd& R) {
    const Eigen::Index n = T.rows();
    MatrixXcd Y(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        VectorXcd rhs = R.col(j);
        if (j > 0) rhs -= Y.leftCols(j) * T.block(0, j, j, 1);
        const std::complex<double> shift = T(j, j);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::complex<double> acc = rhs(i);
            for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(T(k, i)) * Y(k, j);
            const std::complex<double> den = std::conj(T(i, i)) + shift;
            if (std::abs(den) < 1e-300)
                throw Error("implicit Riccati step: singular Sylvester operator");
            Y(i, j) = acc / den;
        }
    }
    return Y;
}

// Solve M^T D + D M = R for symmetric R, via complex Schur of M.
MatrixXd solve_sylvester(const MatrixXd& M, const MatrixXd& R) {
    Eigen::ComplexSchur<MatrixXcd> schur(M.cast<std::complex<double>>());
    if (schur.info() != Eigen::Success)
        throw Error("implicit Riccati step: Schur decomposition failed");
    const MatrixXcd& U = schur.matrixU();
    const MatrixXcd& T = schur.matrixT();
    const MatrixXcd Rt = U.adjoint() * R.cast<std::complex<double>>() * U;
    const MatrixXcd Y = solve_triangular_sylvester(T, Rt);
    return symmetrized((U * Y * U.adjoint()).real());
}

// One implicit midpoint step of dP/ds = G(s, P) using Newton on the midpoint
// equation X = P + (h/2) G(s_mid, X); the Newton system is the Lyapunov-type
// operator M^T D + D M with M = I/2 - (h/2)(A - S X).
MatrixXd implicit_midpoint_riccati_step(const BackwardRhs& rhs, double s, double h,
                                        const MatrixXd& P) {
    const double s_mid = s + 0.5 * h;
    const double t = rhs.time(s_mid);
    const MatrixXd At = rhs.pb.A(t);
    const MatrixXd St = rhs.pb.control_quadratic(t);
    const MatrixXd CCt = rhs.pb.ctc(t);
    const Eigen::Index n = P.rows();
    const MatrixXd id = MatrixXd::Identity(n, n);

    auto G = [&](const MatrixXd& X) -> MatrixXd {
        return At.transpose() * X + X * At - X * St * X + CCt;
    };

    MatrixXd X = symmetrized(P + 0.5 * h * G(P));
    for (int iter = 0; iter < 12; ++iter) {
        const MatrixXd phi = X - P - 0.5 * h * G(X);
        const double tol = 1e-13 * (1.0 + X.norm());
        if (phi.norm() <= tol) break;
        // Note the sign convention: dP/ds has +A^T X + X A, so the linearized
        // operator is D - (h/2)((A - S X)^T D + D (A - S X)) = M^T D + D M.
        const MatrixXd M = 0.5 * id - 0.5 * h * (At - St * X);
        X = symmetrized(X + solve_sylvester(M, -phi));
        if (iter == 11 && phi.norm() > 1e4 * tol)
            throw Error("implicit Riccati step: Newton did not converge");
    }
    return symmetrized(2.0 * X - P);
}

// Integrates the Riccati equation backward from t_hi with terminal value
// P_end, landing on `grid` (ascending, grid.back() == t_hi). Derivatives
// stored are dP/dt.
MatrixPath integrate_riccati_backward(const PeriodicLQProblem& pb,
                                      const std::vector<double>& grid, const MatrixXd& P_end,
                                      const SolveConfig& cfg) {
    const Eigen::Index n = pb.state_dim;
    const double t_hi = grid.back();
    BackwardRhs rhs{pb, t_hi};

    // Reversed grid in s.
    std::vector<double> sgrid(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sgrid[i] = t_hi - grid[grid.size() - 1 - i];
    sgrid.front() = 0.0;

    std::vector<MatrixXd> values(grid.size());
    std::vector<MatrixXd> dvalues(grid.size());

    if (cfg.stiff) {
        MatrixXd P = symmetrized(P_end);
        values[grid.size() - 1] = P;
        dvalues[grid.size() - 1] = -rhs(0.0, P);
        for (std::size_t k = 0; k + 1 < sgrid.size(); ++k) {
            const double h_total = sgrid[k + 1] - sgrid[k];
            const double h = h_total / cfg.substeps;
            double s = sgrid[k];
            for (int sub = 0; sub < cfg.substeps; ++sub) {
                P = implicit_midpoint_riccati_step(rhs, s, h, P);
                s += h;
            }
            const std::size_t i = grid.size() - 2 - k;
            values[i] = P;
            dvalues[i] = -rhs(sgrid[k + 1], P);
        }
    } else {
        OdeRhs flat = [&](double s, const VectorXd& x, VectorXd& dx) {
            Eigen::Map<const MatrixXd> P(x.data(), n, n);
            const MatrixXd g = rhs(s, P);
            Eigen::Map<MatrixXd>(dx.data(), n, n) = g;
        };
        StateHook symmetrize = [n](VectorXd& x) {
            Eigen::Map<MatrixXd> P(x.data(), n, n);
            P = symmetrized(P);
        };
        VectorXd x0(n * n);
        Eigen::Map<MatrixXd>(x0.data(), n, n) = symmetrized(P_end);
        OdeSolution sol;
        try {
            sol = integrate_rk45(flat, sgrid, x0, cfg.ode, symmetrize);
        } catch (const StiffnessError& e) {
            // The backward flow stays bounded for PSD terminal data, so a
            // collapsed step is an integration failure, not a model one.
            throw Error(std::string("riccati sweep: integrator failed (") + e.what() + ")");
        }
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const std::size_t i = grid.size() - 1 - j;
            values[i] = Eigen::Map<const MatrixXd>(sol.values[j].data(), n, n);
            dvalues[i] = -Eigen::Map<const MatrixXd>(sol.derivatives[j].data(), n, n);
        }
    }

    MatrixPath path;
    path.grid = grid;
    path.values = std::move(values);
    path.derivatives = std::move(dvalues);
    return path;
}

void require_symmetric_psd(const MatrixXd& P, const char* who) {
    const double scale = 1.0 + P.norm();
    if ((P - P.transpose()).norm() > 1e-9 * scale)
        throw InvalidProblemError(std::string(who) + ": terminal matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(P), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * scale)
        throw InvalidProblemError(std::string(who) + ": terminal matrix not PSD");
}

}  // namespace

MatrixPath solve_riccati_terminal(const PeriodicLQProblem& problem, double T,
                                  const Eigen::MatrixXd& P_T, const std::vector<double>& grid,
                                  const SolveConfig& cfg) {
    if (!(T > 0)) throw InvalidProblemError("solve_riccati_terminal: T must be positive");
    if (P_T.rows() != problem.state_dim || P_T.cols() != problem.state_dim)
        throw DimensionMismatchError("solve_riccati_terminal: terminal matrix dimension");
    require_symmetric_psd(P_T, "solve_riccati_terminal");
    if (grid.size() < 2 || std::abs(grid.back() - T) > 1e-9 * (1.0 + T))
        throw Error("solve_riccati_terminal: grid must end at T");
    MatrixPath path = integrate_riccati_backward(problem, grid, P_T, cfg);
    path.values.back() = symmetrized(P_T);  // terminal condition holds exactly
    return path;
}

MatrixPath solve_riccati_terminal(const PeriodicLQProblem& problem, double T,
                                  const Eigen::MatrixXd& P_T, const SolveConfig& cfg) {
    return solve_riccati_terminal(problem, T, P_T, cfg.horizon_grid(T, problem.period), cfg);
}

PeriodicRiccatiResult solve_periodic_riccati(const PeriodicLQProblem& problem, double tol,
                                             int max_periods, const SolveConfig& cfg) {
    if (!(tol > 0)) throw Error("solve_periodic_riccati: tol must be positive");
    if (max_periods < 2) throw Error("solve_periodic_riccati: max_periods must be >= 2");
    const double theta = problem.period;
    const auto grid = uniform_grid(0.0, theta, cfg.grid_points_per_period + 1);

    MatrixXd P_term = MatrixXd::Zero(problem.state_dim, problem.state_dim);
    MatrixPath prev;
    double gap = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= max_periods; ++sweep) {
        MatrixPath path = integrate_riccati_backward(problem, grid, P_term, cfg);
        if (sweep >= 2) {
            gap = sup_spectral_gap(path, prev);
            if (gap <= tol) return PeriodicRiccatiResult{std::move(path), sweep, gap};
        }
        P_term = path.values.front();
        prev = std::move(path);
    }
    // Keep the last two restrictions for diagnosis.
    MatrixPath last = integrate_riccati_backward(problem, grid, P_term, cfg);
    gap = sup_spectral_gap(last, prev);
    throw NonStabilizableError(
        "solve_periodic_riccati: no fixed point within " + std::to_string(max_periods) +
            " sweeps (gap " + std::to_string(gap) + "); stabilizability/detectability suspect",
        std::move(last), std::move(prev), gap);
}

VectorPath solve_r_terminal(const PeriodicLQProblem& problem, const MatrixPath& P_path, double T,
                            const SolveConfig& cfg) {
    const double slop = 1e-9 * (1.0 + T);
    if (P_path.t_begin() > slop || P_path.t_end() < T - slop)
        throw Error("solve_r_terminal: P path does not cover [0, T]");

    const std::vector<double>& grid = P_path.grid;
    std::vector<double> sgrid(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sgrid[i] = T - grid[grid.size() - 1 - i];
    sgrid.front() = 0.0;

    MatrixFn gen = [&problem, &P_path, T](double s) -> MatrixXd {
        const double t = std::clamp(T - s, P_path.t_begin(), P_path.t_end());
        const MatrixXd F = problem.A(t) - problem.control_quadratic(t) * P_path.eval(t);
        return F.transpose();
    };
    VectorFn force = [&problem, T](double s) -> VectorXd {
        const double t = T - s;
        return VectorXd(-problem.ctc(t) * problem.y_d(t));
    };

    VectorPath back = propagate(gen, &force, sgrid, VectorXd::Zero(problem.state_dim),
                                cfg.propagation());
    VectorPath path;
    path.grid = grid;
    path.values.resize(grid.size());
    path.derivatives.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const std::size_t i = grid.size() - 1 - j;
        path.values[i] = back.values[j];
        path.derivatives[i] = -back.derivatives[j];
    }
    path.values.back().setZero();  // r(T) = 0 exactly
    return path;
}

PeriodicOffsetResult solve_periodic_r(const PeriodicLQProblem& problem,
                                      const MatrixPath& P_theta, double tol, int max_periods,
                                      const SolveConfig& cfg,
                                      const MonodromyReport* closed_loop) {
    const double theta = problem.period;
    if (P_theta.span() < theta * (1.0 - 1e-9))
        throw Error("solve_periodic_r: P_theta does not cover one period");
    if (!(tol > 0)) throw Error("solve_periodic_r: tol must be positive");
    if (max_periods < 2) throw Error("solve_periodic_r: max_periods must be >= 2");

    MatrixFn F = closed_loop_generator(problem, P_theta, /*periodic=*/true);
    MonodromyReport mono;
    if (closed_loop) {
        mono = *closed_loop;
    } else {
        mono = monodromy(F, theta, problem.state_dim, cfg.grid_points_per_period + 1,
                         cfg.propagation());
    }
    if (mono.spectral_radius >= 1.0 - 1e-10)
        throw StabilityViolationError(
            "solve_periodic_r: closed loop is not exponentially stable (spectral radius " +
            std::to_string(mono.spectral_radius) + ")");

    const auto grid = uniform_grid(0.0, theta, cfg.grid_points_per_period + 1);
    std::vector<double> sgrid(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sgrid[i] = theta - grid[grid.size() - 1 - i];
    sgrid.front() = 0.0;

    MatrixFn gen = [&](double s) -> MatrixXd { return F(theta - s).transpose().eval(); };
    VectorFn force = [&problem, theta](double s) -> VectorXd {
        const double t = theta - s;
        return VectorXd(-problem.ctc(t) * problem.y_d(t));
    };

    VectorXd r_term = VectorXd::Zero(problem.state_dim);
    VectorPath prev;
    double gap = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= max_periods; ++sweep) {
        VectorPath back = propagate(gen, &force, sgrid, r_term, cfg.propagation());
        VectorPath path;
        path.grid = grid;
        path.values.resize(grid.size());
        path.derivatives.resize(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const std::size_t i = grid.size() - 1 - j;
            path.values[i] = back.values[j];
            path.derivatives[i] = -back.derivatives[j];
        }
        if (sweep >= 2) {
            gap = sup_norm_gap(path, prev);
            if (gap <= tol) return PeriodicOffsetResult{std::move(path), sweep, gap};
        }
        r_term = path.values.front();
        prev = std::move(path);
    }
    throw StabilityViolationError("solve_periodic_r: no fixed point within " +
                                  std::to_string(max_periods) + " sweeps (gap " +
                                  std::to_string(gap) + ")");
}

double riccati_residual(const PeriodicLQProblem& problem, const MatrixPath& P_path) {
    if (P_path.size() < 3) throw Error("riccati_residual: need at least 3 grid points");
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < P_path.size(); ++i) {
        const double hl = P_path.grid[i] - P_path.grid[i - 1];
        const double hr = P_path.grid[i + 1] - P_path.grid[i];
        const MatrixXd dP = (-hr / (hl * (hl + hr))) * P_path.values[i - 1] +
                            ((hr - hl) / (hl * hr)) * P_path.values[i] +
                            (hl / (hr * (hl + hr))) * P_path.values[i + 1];
        const double t = P_path.grid[i];
        const MatrixXd At = problem.A(t);
        const MatrixXd& P = P_path.values[i];
        const MatrixXd defect = dP + At.transpose() * P + P * At -
                                P * problem.control_quadratic(t) * P + problem.ctc(t);
        worst = std::max(worst, defect.norm());
    }
    return worst;
}

MatrixFn closed_loop_generator(const PeriodicLQProblem& problem, const MatrixPath& P,
                               bool periodic) {
    const double theta = problem.period;
    // Capture a copy so the generator cannot dangle.
    return [problem, P, periodic, theta](double t) -> MatrixXd {
        const MatrixXd Pt = periodic ? P.eval_periodic(t, theta) : P.eval(t);
        return problem.A(t) - problem.control_quadratic(t) * Pt;
    };
}

}  // namespace plq
