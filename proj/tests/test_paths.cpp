#include <doctest.h>

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <random>

#include "plq/grid_path.hpp"

using namespace plq;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorPath sample_cubic(std::size_t points, bool with_derivatives) {
    // x(t) = (t^3 - 2t + 1, -t^2 + 4)
    VectorPath p;
    p.grid = uniform_grid(0.0, 2.0, points);
    for (double t : p.grid) {
        VectorXd v(2);
        v << t * t * t - 2 * t + 1, -t * t + 4;
        p.values.push_back(v);
        if (with_derivatives) {
            VectorXd d(2);
            d << 3 * t * t - 2, -2 * t;
            p.derivatives.push_back(d);
        }
    }
    return p;
}

}  // namespace

TEST_CASE("hermite interpolation reproduces cubics exactly with stored derivatives") {
    const VectorPath p = sample_cubic(9, true);
    for (double t : {0.13, 0.77, 1.001, 1.93}) {
        const VectorXd v = p.eval(t);
        CHECK(v(0) == doctest::Approx(t * t * t - 2 * t + 1).epsilon(1e-13));
        CHECK(v(1) == doctest::Approx(-t * t + 4).epsilon(1e-13));
        const VectorXd d = p.eval_derivative(t);
        CHECK(d(0) == doctest::Approx(3 * t * t - 2).epsilon(1e-11));
    }
}

TEST_CASE("finite-difference slopes are still accurate away from the ends") {
    const VectorPath coarse = sample_cubic(41, false);
    double interior = 0.0, overall = 0.0;
    for (double t = 0.02; t < 2.0; t += 0.0371) {
        const double err = std::abs(coarse.eval(t)(0) - (t * t * t - 2 * t + 1));
        overall = std::max(overall, err);
        if (t > 0.1 && t < 1.9) interior = std::max(interior, err);
    }
    CHECK(interior < 1e-4);  // three-point slopes
    CHECK(overall < 5e-3);   // one-sided slopes in the first/last cell
}

TEST_CASE("eval at grid nodes returns stored values bit-exactly") {
    const VectorPath p = sample_cubic(7, true);
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(p.eval(p.grid[i])(0) == p.values[i](0));
}

TEST_CASE("periodic evaluation wraps into the stored period") {
    VectorPath p;
    p.grid = uniform_grid(0.0, 1.0, 101);
    for (double t : p.grid) {
        VectorXd v(1);
        v << std::sin(2 * M_PI * t);
        p.values.push_back(v);
        VectorXd d(1);
        d << 2 * M_PI * std::cos(2 * M_PI * t);
        p.derivatives.push_back(d);
    }
    for (double t : {3.27, 12.9, -0.4}) {
        CHECK(p.eval_periodic(t, 1.0)(0) ==
              doctest::Approx(std::sin(2 * M_PI * t)).epsilon(1e-9));
    }
}

TEST_CASE("grid must be strictly increasing") {
    VectorPath p;
    p.grid = {0.0, 1.0, 1.0};
    p.values = {VectorXd::Zero(1), VectorXd::Zero(1), VectorXd::Zero(1)};
    CHECK_THROWS_AS(p.check_consistent(), Error);
}

TEST_CASE("eval outside the stored interval throws") {
    const VectorPath p = sample_cubic(5, true);
    CHECK_THROWS_AS(p.eval(2.5), Error);
}

TEST_CASE("csv round trip preserves doubles exactly") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    MatrixPath p;
    p.grid = uniform_grid(0.0, 1.0, 17);
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        MatrixXd M(2, 3);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 3; ++c) M(r, c) = std::exp(dist(rng)) * dist(rng);
        p.values.push_back(M);
    }
    const auto file = std::filesystem::temp_directory_path() / "plq_roundtrip.csv";
    write_csv(p, file);
    const MatrixPath q = read_matrix_csv(file, 2, 3);
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(q.grid[i] == p.grid[i]);
        CHECK((q.values[i] - p.values[i]).norm() == 0.0);
    }
    std::filesystem::remove(file);
}

TEST_CASE("meta sidecar round trip") {
    PathMeta meta;
    meta.kind = "vector";
    meta.rows = 4;
    meta.cols = 1;
    meta.points = 33;
    meta.period = 2.5;
    meta.tolerances["ode_rel_tol"] = 1e-9;
    const auto file = std::filesystem::temp_directory_path() / "plq_meta.json";
    write_meta(meta, file);
    const PathMeta back = read_meta(file);
    CHECK(back.kind == "vector");
    CHECK(back.rows == 4);
    CHECK(back.points == 33);
    CHECK(back.period.has_value());
    CHECK(*back.period == doctest::Approx(2.5));
    CHECK(back.tolerances.at("ode_rel_tol") == doctest::Approx(1e-9));
    std::filesystem::remove(file);
}
