#include <doctest.h>

#include <cmath>

#include "plq/bvp_oracle.hpp"
#include "plq/scenarios.hpp"

using namespace plq;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("zero data converges immediately to the zero triple") {
    auto [pb, y0] = scalar_example();
    (void)y0;
    pb.y_d = [](double) { return VectorXd(VectorXd::Zero(1)); };
    ShootingConfig cfg;
    ShootingDiagnostics diag;
    SolveConfig numerics;
    numerics.grid_points_per_period = 256;
    const OptimalTriple triple =
        solve_extremal_bvp(pb, VectorXd::Zero(1), 5.0, cfg, numerics, &diag);
    CHECK(diag.iterations <= 1);
    for (const auto& v : triple.y.values) CHECK(v.norm() <= 1e-12);
    for (const auto& v : triple.u.values) CHECK(v.norm() <= 1e-12);
}

TEST_CASE("shooting matches the Riccati synthesis on the scalar benchmark") {
    Scenario sc = make_scenario("scalar_example");
    ShootingConfig cfg;
    ShootingDiagnostics diag;
    const OptimalTriple oracle =
        solve_extremal_bvp(sc.problem, sc.y0, 5.0, cfg, sc.numerics, &diag);
    const FiniteHorizonSolution fin = solve_finite_horizon(sc.problem, sc.y0, 5.0, sc.numerics);
    CHECK(sup_norm_gap(oracle.y, fin.triple.y) <= 1e-6);
    CHECK(sup_norm_gap(oracle.u, fin.triple.u) <= 1e-6);
    CHECK(sup_norm_gap(oracle.lambda, fin.triple.lambda) <= 1e-6);
    CHECK(oracle.lambda.values.back().norm() <= cfg.newton_tolerance);
    // damped Newton: the recorded defect never increases
    for (std::size_t i = 1; i < diag.residual_history.size(); ++i)
        CHECK(diag.residual_history[i] <= diag.residual_history[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("shooting matches the synthesis on the constant problem") {
    Scenario sc = make_scenario("constant_test");
    const VectorXd y0 = VectorXd::Ones(1);
    const OptimalTriple oracle =
        solve_extremal_bvp(sc.problem, y0, 3.0, ShootingConfig{}, sc.numerics);
    const FiniteHorizonSolution fin = solve_finite_horizon(sc.problem, y0, 3.0, sc.numerics);
    CHECK(sup_norm_gap(oracle.y, fin.triple.y) <= 1e-6);
    CHECK(sup_norm_gap(oracle.u, fin.triple.u) <= 1e-6);
    CHECK(sup_norm_gap(oracle.lambda, fin.triple.lambda) <= 1e-6);
}

TEST_CASE("oracle equivalence holds out to T = 10") {
    Scenario sc = make_scenario("scalar_example");
    for (double T : {sc.problem.period, 10.0}) {
        const OptimalTriple oracle =
            solve_extremal_bvp(sc.problem, sc.y0, T, ShootingConfig{}, sc.numerics);
        const FiniteHorizonSolution fin = solve_finite_horizon(sc.problem, sc.y0, T, sc.numerics);
        CHECK(sup_norm_gap(oracle.y, fin.triple.y) <= 1e-5);
        CHECK(sup_norm_gap(oracle.u, fin.triple.u) <= 1e-5);
        CHECK(sup_norm_gap(oracle.lambda, fin.triple.lambda) <= 1e-5);
    }
}

TEST_CASE("single shooting collapses at long horizons, multiple shooting survives") {
    Scenario sc = make_scenario("scalar_example");
    ShootingConfig single;
    single.segments = 1;
    CHECK_THROWS_AS(solve_extremal_bvp(sc.problem, sc.y0, 30.0, single, sc.numerics),
                    OracleFailureError);
    const OptimalTriple triple =
        solve_extremal_bvp(sc.problem, sc.y0, 30.0, ShootingConfig{}, sc.numerics);
    const FiniteHorizonSolution fin = solve_finite_horizon(sc.problem, sc.y0, 30.0, sc.numerics);
    CHECK(sup_norm_gap(triple.y, fin.triple.y) <= 1e-5);
}

TEST_CASE("warm starting from the synthesis leaves nothing to do") {
    Scenario sc = make_scenario("scalar_example");
    ShootingConfig cfg;
    cfg.riccati_initial_guess = true;
    ShootingDiagnostics diag;
    const OptimalTriple oracle =
        solve_extremal_bvp(sc.problem, sc.y0, 5.0, cfg, sc.numerics, &diag);
    CHECK(diag.iterations <= 2);
    CHECK(diag.residual_history.front() <= 1e-5);
    CHECK(oracle.lambda.values.back().norm() <= cfg.newton_tolerance);
}

TEST_CASE("periodic shooting: zero data") {
    auto [pb, y0] = scalar_example();
    (void)y0;
    pb.y_d = [](double) { return VectorXd(VectorXd::Zero(1)); };
    SolveConfig numerics;
    numerics.grid_points_per_period = 256;
    const OptimalTriple triple = solve_periodic_bvp(pb, ShootingConfig{}, numerics);
    for (const auto& v : triple.y.values) CHECK(v.norm() <= 1e-12);
}

TEST_CASE("periodic shooting matches the periodic orbit") {
    Scenario sc = make_scenario("scalar_example");
    const OptimalTriple oracle = solve_periodic_bvp(sc.problem, ShootingConfig{}, sc.numerics);
    const PeriodicOrbitSolution orbit = solve_periodic_orbit(sc.problem, sc.numerics);
    CHECK(sup_norm_gap(oracle.y, orbit.triple.y) <= 1e-6);
    CHECK(sup_norm_gap(oracle.u, orbit.triple.u) <= 1e-6);
    CHECK(sup_norm_gap(oracle.lambda, orbit.triple.lambda) <= 1e-6);
    CHECK((oracle.y.values.front() - oracle.y.values.back()).norm() <= 1e-8);
    CHECK((oracle.lambda.values.front() - oracle.lambda.values.back()).norm() <= 1e-8);
}

TEST_CASE("periodic shooting on the constant problem finds the 1/2 orbit") {
    Scenario sc = make_scenario("constant_test");
    const OptimalTriple oracle = solve_periodic_bvp(sc.problem, ShootingConfig{}, sc.numerics);
    for (const auto& v : oracle.y.values) CHECK(v(0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("a unit Floquet multiplier of the Hamiltonian flow is degenerate") {
    // With A = B = 0 the Hamiltonian period map has eigenvalue 1; a nonzero
    // target makes the periodicity system unsolvable and the Newton matrix
    // singular.
    PeriodicLQProblem pb = constant_test(1.0);
    pb.A = [](double) { return MatrixXd(MatrixXd::Zero(1, 1)); };
    pb.B = [](double) { return MatrixXd(MatrixXd::Zero(1, 1)); };
    CHECK_THROWS_AS(solve_periodic_bvp(pb, ShootingConfig{}, SolveConfig{}),
                    DegeneratePeriodicityError);
}
