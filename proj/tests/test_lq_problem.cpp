#include <doctest.h>

#include <cmath>

#include "plq/lq_problem.hpp"
#include "plq/scenarios.hpp"
#include "plq/turnpike.hpp"

using namespace plq;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorPath constant_path(const std::vector<double>& grid, double value, int dim = 1) {
    VectorPath p;
    p.grid = grid;
    for (std::size_t i = 0; i < grid.size(); ++i)
        p.values.push_back(VectorXd::Constant(dim, value));
    return p;
}

}  // namespace

TEST_CASE("validate accepts the scalar benchmark with q_floor 1") {
    auto [pb, y0] = scalar_example();
    (void)y0;
    const ValidationReport rep = validate(pb, 256);
    CHECK(rep.passed);
    CHECK(rep.min_eig_Q_minus_floor >= -1e-12);
    // C^T C = 4 - sin^2 t - cos t >= 2, so C >= sqrt(2) > 0
    CHECK(rep.min_eig_C > 1.0);
    for (const auto& c : rep.coefficients) CHECK(c.periodicity_defect <= 1e-10 * (1 + c.scale));
}

TEST_CASE("validate: constant problem has exactly zero periodicity defects") {
    PeriodicLQProblem pb = constant_test(0.0);
    const ValidationReport rep = validate(pb, 64);
    CHECK(rep.passed);
    for (const auto& c : rep.coefficients) CHECK(c.periodicity_defect == 0.0);
}

TEST_CASE("validate flags an indefinite Q") {
    auto [pb, y0] = scalar_example();
    (void)y0;
    pb.Q = [](double t) { return MatrixXd::Constant(1, 1, std::sin(t)); };
    const ValidationReport rep = validate(pb, 1024);
    CHECK_FALSE(rep.passed);
    // min over samples of Q at t = 3*pi/2 is -1
    CHECK(rep.min_eig_Q == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(rep.min_eig_Q_minus_floor < -1.5);
}

TEST_CASE("validate rejects nonpositive period, dimensions, sample counts") {
    PeriodicLQProblem pb = constant_test();
    pb.period = 0.0;
    CHECK_THROWS_AS(validate(pb, 16), InvalidProblemError);
    pb = constant_test();
    pb.state_dim = 0;
    CHECK_THROWS_AS(validate(pb, 16), InvalidProblemError);
    pb = constant_test();
    CHECK_THROWS_AS(validate(pb, 1), InvalidProblemError);
}

TEST_CASE("cost vanishes on the target with zero control") {
    auto [pb, y0] = scalar_example();
    (void)y0;
    VectorPath y;
    y.grid = uniform_grid(0.0, 2 * M_PI, 257);
    for (double t : y.grid) y.values.push_back(VectorXd::Constant(1, std::cos(t)));
    const VectorPath u = constant_path(y.grid, 0.0);
    CHECK(evaluate_cost(pb, y, u, 0.0, 2 * M_PI) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("cost of the constant problem with y=1, u=0 over [0,1] is 1/2") {
    PeriodicLQProblem pb = constant_test(0.0);
    const auto grid = uniform_grid(0.0, 1.0, 33);
    const VectorPath y = constant_path(grid, 1.0);
    const VectorPath u = constant_path(grid, 0.0);
    CHECK(evaluate_cost(pb, y, u, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("optimal control beats the zero control on the scalar benchmark") {
    Scenario sc = make_scenario("scalar_example");
    const double T = 10.0;
    const FiniteHorizonSolution opt = solve_finite_horizon(sc.problem, sc.y0, T, sc.numerics);

    const auto grid = opt.triple.y.grid;
    const VectorPath u0 = constant_path(grid, 0.0);
    const VectorPath y_free =
        propagate(sc.problem.A, nullptr, grid, sc.y0, sc.numerics.propagation());
    const double cost_free = evaluate_cost(sc.problem, y_free, u0, 0.0, T);
    CHECK(opt.triple.cost <= cost_free);
    CHECK(opt.triple.cost < cost_free - 1.0);  // far from degenerate here
}

TEST_CASE("mismatched trajectory grids are rejected") {
    PeriodicLQProblem pb = constant_test();
    const VectorPath y = constant_path(uniform_grid(0.0, 1.0, 11), 1.0);
    const VectorPath u = constant_path(uniform_grid(0.0, 1.0, 12), 0.0);
    CHECK_THROWS_AS(evaluate_cost(pb, y, u, 0.0, 1.0), GridMismatchError);
    const VectorPath u2 = constant_path(uniform_grid(0.1, 1.1, 11), 0.0);
    CHECK_THROWS_AS(evaluate_cost(pb, y, u2, 0.0, 1.0), GridMismatchError);
}

TEST_CASE("cost is nonnegative and vanishes on empty intervals") {
    auto [pb, y0] = scalar_example();
    (void)y0;
    VectorPath y, u;
    y.grid = u.grid = uniform_grid(0.0, 5.0, 101);
    for (double t : y.grid) {
        y.values.push_back(VectorXd::Constant(1, std::sin(3 * t) - 0.7 * t));
        u.values.push_back(VectorXd::Constant(1, std::cos(5 * t)));
    }
    CHECK(evaluate_cost(pb, y, u, 0.0, 5.0) >= 0.0);
    CHECK(evaluate_cost(pb, y, u, 2.0, 2.0) == 0.0);
}

TEST_CASE("trapezoid cost converges quadratically under grid refinement") {
    auto [pb, y0] = scalar_example();
    (void)y0;
    auto cost_at = [&](std::size_t points) {
        VectorPath y, u;
        y.grid = u.grid = uniform_grid(0.0, 2 * M_PI, points);
        for (double t : y.grid) {
            y.values.push_back(VectorXd::Constant(1, std::sin(t) + 0.3));
            u.values.push_back(VectorXd::Constant(1, std::cos(2 * t)));
        }
        return evaluate_cost(pb, y, u, 0.0, 2 * M_PI);
    };
    const double c1 = cost_at(65), c2 = cost_at(129), c3 = cost_at(257);
    // halving h changes the result by about 4x the subsequent halving's change
    CHECK(std::abs(c1 - c2) < 4.2 * std::abs(c2 - c3) + 1e-15);
    CHECK(std::abs(c2 - c3) > 0.0);
}
