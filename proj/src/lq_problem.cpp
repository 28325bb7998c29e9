#include "plq/lq_problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "plq/errors.hpp"

namespace plq {

Eigen::MatrixXd PeriodicLQProblem::qinv_Bt(double t) const {
    return Q(t).llt().solve(B(t).transpose());
}

Eigen::MatrixXd PeriodicLQProblem::control_quadratic(double t) const {
    return B(t) * qinv_Bt(t);
}

Eigen::MatrixXd PeriodicLQProblem::ctc(double t) const {
    const Eigen::MatrixXd Ct = C(t);
    return Ct.transpose() * Ct;
}

double PeriodicLQProblem::running_cost(double t, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& u) const {
    const Eigen::VectorXd w = C(t) * (y - y_d(t));
    return 0.5 * (w.squaredNorm() + u.dot(Q(t) * u));
}

namespace {

double min_eig(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

ValidationReport validate(const PeriodicLQProblem& problem, int n_samples, double rel_tol) {
    if (problem.state_dim <= 0 || problem.control_dim <= 0)
        throw InvalidProblemError("validate: nonpositive dimension");
    if (!(problem.period > 0)) throw InvalidProblemError("validate: nonpositive period");
    if (n_samples < 2) throw InvalidProblemError("validate: need n_samples >= 2");
    if (!(problem.q_floor > 0)) throw InvalidProblemError("validate: q_floor must be positive");

    ValidationReport report;
    report.tolerance = rel_tol;
    report.min_eig_Q = std::numeric_limits<double>::infinity();
    report.min_eig_Q_minus_floor = std::numeric_limits<double>::infinity();
    report.min_eig_C = std::numeric_limits<double>::infinity();

    const double theta = problem.period;
    auto check_matrix = [&](const std::string& name,
                            const std::function<Eigen::MatrixXd(double)>& F) {
        CoefficientCheck c;
        c.name = name;
        for (int j = 0; j < n_samples; ++j) {
            const double t = theta * static_cast<double>(j) / static_cast<double>(n_samples);
            const Eigen::MatrixXd now = F(t);
            c.periodicity_defect = std::max(c.periodicity_defect, (F(t + theta) - now).norm());
            c.scale = std::max(c.scale, now.norm());
        }
        report.coefficients.push_back(c);
    };

    check_matrix("A", problem.A);
    check_matrix("B", problem.B);
    check_matrix("C", problem.C);
    check_matrix("Q", problem.Q);
    {
        CoefficientCheck c;
        c.name = "y_d";
        for (int j = 0; j < n_samples; ++j) {
            const double t = theta * static_cast<double>(j) / static_cast<double>(n_samples);
            const Eigen::VectorXd now = problem.y_d(t);
            c.periodicity_defect = std::max(c.periodicity_defect, (problem.y_d(t + theta) - now).norm());
            c.scale = std::max(c.scale, now.norm());
        }
        report.coefficients.push_back(c);
    }

    const Eigen::MatrixXd floor_shift =
        problem.q_floor * Eigen::MatrixXd::Identity(problem.control_dim, problem.control_dim);
    for (int j = 0; j < n_samples; ++j) {
        const double t = theta * static_cast<double>(j) / static_cast<double>(n_samples);
        const Eigen::MatrixXd Qt = problem.Q(t);
        const Eigen::MatrixXd Ct = problem.C(t);
        report.min_eig_Q = std::min(report.min_eig_Q, min_eig(Qt));
        report.min_eig_Q_minus_floor = std::min(report.min_eig_Q_minus_floor, min_eig(Qt - floor_shift));
        report.min_eig_C = std::min(report.min_eig_C, min_eig(Ct));
        report.max_asymmetry_Q = std::max(report.max_asymmetry_Q, (Qt - Qt.transpose()).norm());
        report.max_asymmetry_C = std::max(report.max_asymmetry_C, (Ct - Ct.transpose()).norm());
    }

    bool ok = true;
    for (const auto& c : report.coefficients)
        if (c.periodicity_defect > rel_tol * (1.0 + c.scale)) ok = false;
    const double eig_slack = 1e-10;
    if (report.min_eig_Q_minus_floor < -eig_slack * (1.0 + std::abs(report.min_eig_Q))) ok = false;
    if (report.min_eig_C < -eig_slack) ok = false;
    if (report.max_asymmetry_C > 1e-10 || report.max_asymmetry_Q > 1e-10) ok = false;
    report.passed = ok;
    return report;
}

double evaluate_cost(const PeriodicLQProblem& problem, const VectorPath& y, const VectorPath& u,
                     double t0, double t1) {
    if (y.empty() || u.empty()) throw GridMismatchError("evaluate_cost: empty trajectory");
    if (y.size() != u.size()) throw GridMismatchError("evaluate_cost: y/u grid size mismatch");
    const double slop = 1e-9 * (1.0 + y.span());
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::abs(y.grid[i] - u.grid[i]) > slop)
            throw GridMismatchError("evaluate_cost: y/u grids differ");
    if (y.values.front().size() != problem.state_dim ||
        u.values.front().size() != problem.control_dim)
        throw DimensionMismatchError("evaluate_cost: dimension mismatch");
    if (t1 < t0) throw Error("evaluate_cost: t1 < t0");
    if (t0 < y.t_begin() - slop || t1 > y.t_end() + slop)
        throw GridMismatchError("evaluate_cost: [t0, t1] outside the trajectory");
    if (t1 - t0 <= slop) return 0.0;

    // Sample points: t0, interior grid nodes, t1.
    std::vector<double> ts;
    ts.push_back(t0);
    for (double tg : y.grid)
        if (tg > t0 + slop && tg < t1 - slop) ts.push_back(tg);
    ts.push_back(t1);

    std::vector<double> integrand(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        integrand[i] = problem.running_cost(ts[i], y.eval(ts[i]), u.eval(ts[i]));

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        acc += 0.5 * (integrand[i] + integrand[i + 1]) * (ts[i + 1] - ts[i]);
    return acc;
}

}  // namespace plq
