#include "plq/scenarios.hpp"

#include <cmath>
#include <fstream>

#include "plq/errors.hpp"

namespace plq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

// Smooth compactly supported bump with unit peak, centered at `center` with
// half-width `width`.
double bump(double x, double center, double width) {
    const double r = (x - center) / width;
    if (std::abs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

MatrixXd dirichlet_laplacian(int n, double length) {
    const double h = length / (n + 1);
    MatrixXd D = MatrixXd::Zero(n, n);
    const double w = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        D(i, i) = -2.0 * w;
        if (i > 0) D(i, i - 1) = w;
        if (i + 1 < n) D(i, i + 1) = w;
    }
    return D;
}

}  // namespace

std::pair<PeriodicLQProblem, double> scalar_example() {
    PeriodicLQProblem pb;
    pb.state_dim = 1;
    pb.control_dim = 1;
    pb.period = 2.0 * kPi;
    pb.q_floor = 1.0;
    pb.A = [](double t) { return MatrixXd::Constant(1, 1, std::sin(t)); };
    pb.B = [](double) { return MatrixXd::Constant(1, 1, 1.0); };
    pb.C = [](double t) {
        const double ctc = 4.0 - std::sin(t) * std::sin(t) - std::cos(t);
        return MatrixXd::Constant(1, 1, std::sqrt(ctc));
    };
    pb.Q = [](double) { return MatrixXd::Constant(1, 1, 1.0); };
    pb.y_d = [](double t) { return VectorXd::Constant(1, std::cos(t)); };
    return {pb, 0.1};
}

PeriodicLQProblem constant_test(double yd_value) {
    PeriodicLQProblem pb;
    pb.state_dim = 1;
    pb.control_dim = 1;
    pb.period = 1.0;
    pb.q_floor = 1.0;
    pb.A = [](double) { return MatrixXd::Constant(1, 1, -1.0); };
    pb.B = [](double) { return MatrixXd::Constant(1, 1, 1.0); };
    pb.C = [](double) { return MatrixXd::Constant(1, 1, 1.0); };
    pb.Q = [](double) { return MatrixXd::Constant(1, 1, 1.0); };
    pb.y_d = [yd_value](double) { return VectorXd::Constant(1, yd_value); };
    return pb;
}

PeriodicLQProblem heat_1d(int n, double length, double window_lo, double window_hi,
                          const SpaceTimeFn& a_coeff, const SpaceTimeFn& y_d, double theta) {
    if (n < 3) throw InvalidScenarioError("heat_1d: need n >= 3 interior points");
    if (!(length > 0) || !(theta > 0)) throw InvalidScenarioError("heat_1d: bad length/period");
    if (!(0.0 <= window_lo && window_lo < window_hi && window_hi <= length))
        throw InvalidScenarioError("heat_1d: control window must satisfy 0 <= a < b <= L");

    const double h = length / (n + 1);
    std::vector<int> controlled;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 1) * h;
        if (x > window_lo && x < window_hi) controlled.push_back(i);
    }
    if (controlled.empty())
        throw InvalidScenarioError("heat_1d: control window contains no grid points");

    const MatrixXd lap = dirichlet_laplacian(n, length);
    MatrixXd Bmat = MatrixXd::Zero(n, static_cast<int>(controlled.size()));
    for (std::size_t j = 0; j < controlled.size(); ++j) Bmat(controlled[j], static_cast<int>(j)) = 1.0;

    PeriodicLQProblem pb;
    pb.state_dim = n;
    pb.control_dim = static_cast<int>(controlled.size());
    pb.period = theta;
    pb.q_floor = 1.0;
    pb.A = [lap, a_coeff, h, n](double t) {
        MatrixXd At = lap;
        for (int i = 0; i < n; ++i) At(i, i) -= a_coeff((i + 1) * h, t);
        return At;
    };
    pb.B = [Bmat](double) { return Bmat; };
    pb.C = [n](double) { return MatrixXd(MatrixXd::Identity(n, n)); };
    pb.Q = [m = pb.control_dim](double) { return MatrixXd(MatrixXd::Identity(m, m)); };
    pb.y_d = [y_d, h, n](double t) {
        VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = y_d((i + 1) * h, t);
        return v;
    };
    return pb;
}

PeriodicLQProblem wave_1d(int n, double length, const SpaceTimeFn& a_coeff,
                          const SpaceTimeFn& y_d) {
    if (n < 3) throw InvalidScenarioError("wave_1d: need n >= 3 interior points");
    if (!(length > 0)) throw InvalidScenarioError("wave_1d: bad length");

    const double h = length / (n + 1);
    const MatrixXd lap = dirichlet_laplacian(n, length);
    const SpaceTimeFn target =
        y_d ? y_d
            : [length](double x, double t) { return std::sin(kPi * x / length) * std::cos(2.0 * kPi * t); };

    PeriodicLQProblem pb;
    pb.state_dim = 2 * n;
    pb.control_dim = n;
    pb.period = 1.0;
    pb.q_floor = 1.0;
    pb.A = [lap, a_coeff, h, n](double t) {
        MatrixXd At = MatrixXd::Zero(2 * n, 2 * n);
        At.topRightCorner(n, n).setIdentity();
        At.bottomLeftCorner(n, n) = lap;
        for (int i = 0; i < n; ++i) At(n + i, n + i) = -a_coeff((i + 1) * h, t);
        return At;
    };
    pb.B = [n](double) {
        MatrixXd Bt = MatrixXd::Zero(2 * n, n);
        Bt.bottomRows(n).setIdentity();
        return Bt;
    };
    pb.C = [n](double) {
        MatrixXd Ct = MatrixXd::Zero(2 * n, 2 * n);
        Ct.bottomRightCorner(n, n).setIdentity();
        return Ct;
    };
    pb.Q = [n](double) { return MatrixXd(MatrixXd::Identity(n, n)); };
    pb.y_d = [target, h, n](double t) {
        VectorXd v = VectorXd::Zero(2 * n);
        for (int i = 0; i < n; ++i) v(n + i) = target((i + 1) * h, t);
        return v;
    };
    return pb;
}

ScenarioDescriptor descriptor_from_json(const nlohmann::json& j) {
    ScenarioDescriptor d;
    if (!j.is_object() || !j.contains("name"))
        throw InvalidScenarioError("scenario descriptor: expected an object with a \"name\"");
    d.name = j.at("name").get<std::string>();
    if (j.contains("parameters")) {
        if (!j.at("parameters").is_object())
            throw InvalidScenarioError("scenario descriptor: \"parameters\" must be an object");
        d.parameters = j.at("parameters");
    }
    return d;
}

ScenarioDescriptor descriptor_from_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InvalidScenarioError("cannot open scenario file " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidScenarioError("bad scenario JSON in " + file.string() + ": " + e.what());
    }
    return descriptor_from_json(j);
}

namespace {

template <class T>
T param(const nlohmann::json& p, const std::string& key, T fallback) {
    if (!p.contains(key)) return fallback;
    try {
        return p.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidScenarioError("scenario parameter \"" + key + "\" has the wrong type");
    }
}

void apply_numerics_overrides(SolveConfig& cfg, const nlohmann::json& p) {
    cfg.ode.rel_tol = param(p, "ode_rel_tol", cfg.ode.rel_tol);
    cfg.ode.abs_tol = param(p, "ode_abs_tol", cfg.ode.abs_tol);
    cfg.riccati_tol = param(p, "riccati_tol", cfg.riccati_tol);
    cfg.max_periods = param(p, "max_periods", cfg.max_periods);
    cfg.stiff = param(p, "stiff", cfg.stiff);
    cfg.substeps = param(p, "substeps", cfg.substeps);
    cfg.grid_points_per_period =
        param<std::size_t>(p, "grid_points_per_period", cfg.grid_points_per_period);
}

}  // namespace

Scenario make_scenario(const ScenarioDescriptor& descriptor) {
    const nlohmann::json& p = descriptor.parameters;
    Scenario sc;
    sc.name = descriptor.name;

    if (descriptor.name == "scalar_example") {
        auto [pb, y0] = scalar_example();
        sc.problem = pb;
        sc.y0 = VectorXd::Constant(1, param(p, "y0", y0));
        sc.default_horizon = param(p, "horizon", 50.0);
        sc.numerics.ode.rel_tol = 1e-11;
        sc.numerics.ode.abs_tol = 1e-13;
        sc.numerics.grid_points_per_period = 1600;
    } else if (descriptor.name == "constant_test") {
        sc.problem = constant_test(param(p, "yd_value", 1.0));
        sc.y0 = VectorXd::Constant(1, param(p, "y0", 1.0));
        sc.default_horizon = param(p, "horizon", 12.0);
        sc.numerics.ode.rel_tol = 1e-12;
        sc.numerics.ode.abs_tol = 1e-14;
        sc.numerics.grid_points_per_period = 1024;
    } else if (descriptor.name == "heat_1d") {
        const int n = param(p, "n", 20);
        const double length = param(p, "length", 1.0);
        const double theta = param(p, "theta", 1.0);
        const double lo = param(p, "window_lo", 0.3);
        const double hi = param(p, "window_hi", 0.8);
        const double amp = param(p, "a_amplitude", -5.0);
        const double bump_center = param(p, "bump_center", 0.5 * length);
        const double bump_width = param(p, "bump_width", 0.35 * length);
        SpaceTimeFn a = [amp, theta, bump_center, bump_width](double x, double t) {
            return amp * (1.0 + std::sin(2.0 * kPi * t / theta)) * bump(x, bump_center, bump_width);
        };
        SpaceTimeFn yd = [length, theta](double x, double t) {
            return std::sin(kPi * x / length) * std::cos(2.0 * kPi * t / theta);
        };
        sc.problem = heat_1d(n, length, lo, hi, a, yd, theta);
        sc.y0 = VectorXd::Zero(n);
        if (p.contains("y0_amplitude")) {
            const double amp0 = p.at("y0_amplitude").get<double>();
            const double h = length / (n + 1);
            for (int i = 0; i < n; ++i) sc.y0(i) = amp0 * std::sin(kPi * (i + 1) * h / length);
        }
        sc.default_horizon = param(p, "horizon", 10.0);
        sc.numerics.stiff = true;
        sc.numerics.grid_points_per_period = 256;
        sc.numerics.ode.rel_tol = 1e-8;
        sc.numerics.ode.abs_tol = 1e-11;
    } else if (descriptor.name == "wave_1d") {
        const int n = param(p, "n", 12);
        const double length = param(p, "length", 1.0);
        const double a0 = param(p, "a_base", 1.0);
        const double a1 = param(p, "a_modulation", 0.5);
        SpaceTimeFn a = [a0, a1](double, double t) { return a0 + a1 * std::sin(2.0 * kPi * t); };
        sc.problem = wave_1d(n, length, a);
        sc.y0 = VectorXd::Zero(2 * n);
        sc.default_horizon = param(p, "horizon", 6.0);
        sc.numerics.grid_points_per_period = 512;
        sc.numerics.ode.rel_tol = 1e-9;
        sc.numerics.ode.abs_tol = 1e-12;
    } else {
        throw InvalidScenarioError("unknown scenario \"" + descriptor.name + "\"");
    }

    if (p.contains("y0") && descriptor.name != "scalar_example" &&
        descriptor.name != "constant_test") {
        const auto& jy = p.at("y0");
        if (!jy.is_array() || static_cast<Eigen::Index>(jy.size()) != sc.y0.size())
            throw InvalidScenarioError("scenario parameter \"y0\" must be an array of state_dim");
        for (Eigen::Index i = 0; i < sc.y0.size(); ++i) sc.y0(i) = jy.at(i).get<double>();
    }

    apply_numerics_overrides(sc.numerics, p);

    nlohmann::json applied;
    applied["name"] = descriptor.name;
    applied["parameters"] = descriptor.parameters;
    sc.descriptor = applied;
    return sc;
}

Scenario make_scenario(const std::string& name) {
    ScenarioDescriptor d;
    d.name = name;
    return make_scenario(d);
}

}  // namespace plq
