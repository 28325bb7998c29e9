#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <string>
#include <utility>

#include <json.hpp>

#include "plq/config.hpp"
#include "plq/lq_problem.hpp"

namespace plq {

using SpaceTimeFn = std::function<double(double, double)>;  // (x, t)

// --- problem constructors ---------------------------------------------------

// Scalar benchmark: A(t) = sin t, B = 1, Q = 1, C^T C = 4 - sin^2 t - cos t,
// y_d(t) = cos t, theta = 2*pi; returns the problem and y0 = 0.1.
std::pair<PeriodicLQProblem, double> scalar_example();

// Constant coefficients A = -1, B = C = Q = 1, theta = 1.
PeriodicLQProblem constant_test(double yd_value = 1.0);

// 1-d heat equation on (0, length), Dirichlet boundary, interior finite
// differences: A(t) = tridiag(1,-2,1)/h^2 - diag(a(x_i, t)), B selects the
// grid points inside the control window, C = I, Q = I.
PeriodicLQProblem heat_1d(int n, double length, double window_lo, double window_hi,
                          const SpaceTimeFn& a_coeff, const SpaceTimeFn& y_d, double theta);

// 1-d wave equation in first-order (position; velocity) form with damping
// a(x, t) (1-periodic): A = [0 I; Dxx -diag(a)], B = [0; I], C = diag(0, I).
// The cost tracks the velocity block against y_d.
PeriodicLQProblem wave_1d(int n, double length, const SpaceTimeFn& a_coeff,
                          const SpaceTimeFn& y_d = {});

// --- descriptor-driven assembly ---------------------------------------------

struct ScenarioDescriptor {
    std::string name;  // scalar_example | constant_test | heat_1d | wave_1d
    nlohmann::json parameters = nlohmann::json::object();
};

ScenarioDescriptor descriptor_from_json(const nlohmann::json& j);
ScenarioDescriptor descriptor_from_file(const std::filesystem::path& file);

// A fully assembled scenario: the problem plus its initial state, default
// horizon, and per-scenario numerics (heat defaults to the stiff stepper).
struct Scenario {
    std::string name;
    PeriodicLQProblem problem;
    Eigen::VectorXd y0;
    double default_horizon = 0.0;
    SolveConfig numerics;
    nlohmann::json descriptor;  // the descriptor actually applied
};

Scenario make_scenario(const ScenarioDescriptor& descriptor);
Scenario make_scenario(const std::string& name);  // defaults only

}  // namespace plq
