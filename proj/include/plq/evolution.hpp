#pragma once

#include <Eigen/Core>

#include <vector>

#include "plq/grid_path.hpp"
#include "plq/ode.hpp"

namespace plq {

struct PropagationOptions {
    OdeOptions ode;
    bool stiff = false;  // use the implicit midpoint stepper on the output grid
    int substeps = 1;    // implicit substeps per grid interval
};

// Period map U(theta, 0) of a closed-loop generator plus its Floquet data.
struct MonodromyReport {
    Eigen::MatrixXd period_map;
    double period = 0.0;
    double spectral_radius = 0.0;
    double decay_rate = 0.0;        // -ln(spectral_radius) / period
    bool one_in_resolvent = false;  // no eigenvalue within 1e-8 of 1
    double min_distance_to_one = 0.0;
};

// Solves x' = F(t) x + g(t), x(t0) = x0 on the given ascending grid.
// forcing may be null for the homogeneous system.
VectorPath propagate(const MatrixFn& generator, const VectorFn* forcing,
                     const std::vector<double>& grid, const Eigen::VectorXd& x0,
                     const PropagationOptions& opts = {});

// Convenience overload on a uniform grid with `points` nodes.
VectorPath propagate(const MatrixFn& generator, const VectorFn* forcing, double t0, double t1,
                     const Eigen::VectorXd& x0, std::size_t points,
                     const PropagationOptions& opts = {});

// Period map built by propagating each basis column over [0, period].
MonodromyReport monodromy(const MatrixFn& generator, double period, Eigen::Index dim,
                          std::size_t points_per_period = 257,
                          const PropagationOptions& opts = {});

// Unique periodic solution of x' = F(t) x + g(t) through the resolvent
// formula x(0) = (I - U(theta,0))^{-1} int_0^theta U(theta,s) g(s) ds.
// Requires 1 in the resolvent set of the period map.
VectorPath periodic_solution_linear(const MatrixFn& generator, const VectorFn& forcing,
                                    double period, Eigen::Index dim, std::size_t points,
                                    const PropagationOptions& opts = {},
                                    double defect_tol = 1e-7);

}  // namespace plq
