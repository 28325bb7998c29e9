#pragma once

#include "plq/evolution.hpp"
#include "plq/ode.hpp"

namespace plq {

// Numerical knobs shared by the synthesis pipeline. Scenario constructors
// fill in per-scenario defaults (stiff problems switch to the implicit
// stepper with a fixed grid).
struct SolveConfig {
    OdeOptions ode;
    bool stiff = false;
    int substeps = 1;
    std::size_t grid_points_per_period = 1024;  // output nodes per period
    double riccati_tol = 1e-10;                 // period-map fixed point gap
    int max_periods = 200;
    double periodic_defect_tol = 1e-7;
    double dynamics_residual_tol = 1e-4;  // relative, for dissipation inputs

    PropagationOptions propagation() const {
        PropagationOptions p;
        p.ode = ode;
        p.stiff = stiff;
        p.substeps = substeps;
        return p;
    }

    // Uniform grid on [0, T] with the per-period density (at least 33 nodes).
    std::vector<double> horizon_grid(double T, double period) const {
        const double per_unit = static_cast<double>(grid_points_per_period) / period;
        std::size_t points = static_cast<std::size_t>(std::ceil(per_unit * T)) + 1;
        points = std::max<std::size_t>(points, 33);
        return uniform_grid(0.0, T, points);
    }
};

}  // namespace plq
