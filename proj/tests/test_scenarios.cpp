#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

#include "plq/riccati.hpp"
#include "plq/scenarios.hpp"

using namespace plq;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("scalar benchmark validates and has the closed-form periodic solution") {
    Scenario sc = make_scenario("scalar_example");
    CHECK(validate(sc.problem, 128).passed);
    CHECK(sc.y0(0) == doctest::Approx(0.1));
    const MonodromyReport open =
        monodromy(sc.problem.A, sc.problem.period, 1, 257, sc.numerics.propagation());
    CHECK(open.spectral_radius == doctest::Approx(1.0).epsilon(1e-9));
    const PeriodicRiccatiResult res =
        solve_periodic_riccati(sc.problem, 1e-10, 200, sc.numerics);
    double worst = 0.0;
    for (std::size_t i = 0; i < res.path.size(); ++i)
        worst = std::max(worst,
                         std::abs(res.path.values[i](0, 0) - (2.0 + std::sin(res.path.grid[i]))));
    CHECK(worst <= 1e-8);
}

TEST_CASE("undamped heat discretization has its slowest mode near -pi^2") {
    const PeriodicLQProblem pb =
        heat_1d(20, 1.0, 0.3, 0.8, [](double, double) { return 0.0; },
                [](double, double) { return 0.0; }, 1.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(pb.A(0.0), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(-M_PI * M_PI).epsilon(0.05));
}

TEST_CASE("stable undamped heat problem admits a periodic Riccati solution") {
    const PeriodicLQProblem pb =
        heat_1d(20, 1.0, 0.3, 0.8, [](double, double) { return 0.0; },
                [](double x, double t) { return std::sin(M_PI * x) * std::cos(2 * M_PI * t); },
                1.0);
    SolveConfig cfg;
    cfg.stiff = true;
    cfg.grid_points_per_period = 256;
    const PeriodicRiccatiResult res = solve_periodic_riccati(pb, 1e-9, 60, cfg);
    CHECK(res.sweeps <= 60);
    CHECK(res.gap <= 1e-9);
}

TEST_CASE("full control window actuates every grid point") {
    const PeriodicLQProblem pb =
        heat_1d(9, 1.0, 0.0, 1.0, [](double, double) { return 0.0; },
                [](double, double) { return 0.0; }, 1.0);
    CHECK(pb.control_dim == 9);
    CHECK((pb.B(0.0) - MatrixXd::Identity(9, 9)).norm() == 0.0);
}

TEST_CASE("empty control window is rejected") {
    CHECK_THROWS_AS(heat_1d(5, 1.0, 0.0, 0.01, [](double, double) { return 0.0; },
                            [](double, double) { return 0.0; }, 1.0),
                    InvalidScenarioError);
}

TEST_CASE("undamped wave monodromy conserves the spectral radius") {
    const PeriodicLQProblem pb = wave_1d(12, 1.0, [](double, double) { return 0.0; });
    SolveConfig cfg;
    cfg.ode.rel_tol = 1e-10;
    cfg.ode.abs_tol = 1e-13;
    const MonodromyReport rep =
        monodromy(pb.A, pb.period, pb.state_dim, 513, cfg.propagation());
    CHECK(std::abs(rep.spectral_radius - 1.0) <= 1e-6);
}

TEST_CASE("damped wave admits a periodic Riccati solution") {
    const PeriodicLQProblem pb = wave_1d(8, 1.0, [](double, double) { return 1.0; });
    SolveConfig cfg;
    cfg.ode.rel_tol = 1e-9;
    cfg.ode.abs_tol = 1e-12;
    cfg.grid_points_per_period = 256;
    const PeriodicRiccatiResult res = solve_periodic_riccati(pb, 1e-9, 200, cfg);
    CHECK(res.gap <= 1e-9);
    CHECK(min_eigenvalue(res.path) >= -1e-10);
}

TEST_CASE("wave operators satisfy B B^T = C") {
    const PeriodicLQProblem pb = wave_1d(6, 1.0, [](double, double) { return 1.0; });
    const MatrixXd B = pb.B(0.3);
    const MatrixXd C = pb.C(0.3);
    CHECK((B * B.transpose() - C).norm() == 0.0);
    CHECK((C.transpose() * C - C).norm() == 0.0);
}

TEST_CASE("every shipped scenario validates") {
    for (const char* name : {"scalar_example", "constant_test", "heat_1d", "wave_1d"}) {
        Scenario sc = make_scenario(name);
        CHECK(validate(sc.problem, 64).passed);
    }
}

TEST_CASE("heat kernel converges under grid refinement") {
    auto build = [](int n) {
        ScenarioDescriptor d;
        d.name = "heat_1d";
        d.parameters["n"] = n;
        return make_scenario(d);
    };
    Scenario s20 = build(20), s40 = build(40);
    const PeriodicRiccatiResult r20 =
        solve_periodic_riccati(s20.problem, 1e-9, 60, s20.numerics);
    const PeriodicRiccatiResult r40 =
        solve_periodic_riccati(s40.problem, 1e-9, 60, s40.numerics);
    const MatrixXd& P20 = r20.path.values.front();
    const MatrixXd& P40 = r40.path.values.front();
    const double h20 = 1.0 / 21.0, h40 = 1.0 / 41.0;
    auto kernel40 = [&](double x, double y) {
        const double fx = x / h40 - 1.0, fy = y / h40 - 1.0;
        const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, 38);
        const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, 38);
        const double ax = fx - i, ay = fy - j;
        return ((1 - ax) * (1 - ay) * P40(i, j) + ax * (1 - ay) * P40(i + 1, j) +
                (1 - ax) * ay * P40(i, j + 1) + ax * ay * P40(i + 1, j + 1)) /
               h40;
    };
    double maxmag = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) maxmag = std::max(maxmag, std::abs(P20(i, j) / h20));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double coarse = P20(i, j) / h20;
            if (std::abs(coarse) < 1e-3 * maxmag) continue;
            const double fine = kernel40((i + 1) * h20, (j + 1) * h20);
            worst = std::max(worst, std::abs(fine - coarse) / std::abs(coarse));
        }
    CHECK(worst < 0.05);
}

TEST_CASE("descriptors reject unknown names and malformed parameters") {
    ScenarioDescriptor d;
    d.name = "no_such_scenario";
    CHECK_THROWS_AS(make_scenario(d), InvalidScenarioError);

    ScenarioDescriptor bad;
    bad.name = "heat_1d";
    bad.parameters["y0"] = {1.0, 2.0};  // wrong length for n = 20
    CHECK_THROWS_AS(make_scenario(bad), InvalidScenarioError);

    CHECK_THROWS_AS(descriptor_from_json(nlohmann::json::array()), InvalidScenarioError);
}

TEST_CASE("shipped descriptor files load") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(PLQ_SOURCE_DIR) / "scenarios";
    int seen = 0;
    for (const char* name :
         {"scalar_example.json", "constant_test.json", "heat_1d.json", "wave_1d.json"}) {
        const fs::path file = dir / name;
        REQUIRE(fs::exists(file));
        const Scenario sc = make_scenario(descriptor_from_file(file));
        CHECK(sc.problem.state_dim >= 1);
        ++seen;
    }
    CHECK(seen == 4);
}

TEST_CASE("scenario parameters override the defaults") {
    ScenarioDescriptor d;
    d.name = "scalar_example";
    d.parameters["horizon"] = 25.0;
    d.parameters["y0"] = 0.4;
    d.parameters["riccati_tol"] = 1e-8;
    const Scenario sc = make_scenario(d);
    CHECK(sc.default_horizon == 25.0);
    CHECK(sc.y0(0) == 0.4);
    CHECK(sc.numerics.riccati_tol == 1e-8);
}
