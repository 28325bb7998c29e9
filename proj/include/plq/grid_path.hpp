#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plq/errors.hpp"

namespace plq {

// A function of time sampled on a strictly increasing grid, evaluated in
// between by piecewise cubic Hermite interpolation. When `derivatives` is
// populated (values of the exact time derivative at the nodes, e.g. the ODE
// right-hand side) the interpolant is 4th order accurate; otherwise slopes
// are taken from three-point finite differences.
template <class Value>
struct GridPath {
    std::vector<double> grid;
    std::vector<Value> values;
    std::vector<Value> derivatives;  // empty, or one entry per grid point

    std::size_t size() const { return grid.size(); }
    bool empty() const { return grid.empty(); }
    bool has_derivatives() const { return !derivatives.empty(); }
    double t_begin() const { return grid.front(); }
    double t_end() const { return grid.back(); }
    double span() const { return grid.back() - grid.front(); }

    const Value& front() const { return values.front(); }
    const Value& back() const { return values.back(); }

    // Interpolated value; t may exceed the grid by a relative sliver (roundoff).
    Value eval(double t) const;
    // Interpolated derivative of the Hermite segment.
    Value eval_derivative(double t) const;
    // Wraps t into [t_begin, t_begin + period) before evaluating. The grid
    // must cover one full period.
    Value eval_periodic(double t, double period) const;

    void check_consistent() const;
};

using VectorPath = GridPath<Eigen::VectorXd>;
using MatrixPath = GridPath<Eigen::MatrixXd>;

// Index i with grid[i] <= t <= grid[i+1] (clamped at the ends).
std::size_t locate_interval(const std::vector<double>& grid, double t);

std::vector<double> uniform_grid(double t0, double t1, std::size_t points);

// Largest ||P - P^T|| over the stored matrices (Frobenius).
double max_symmetry_defect(const MatrixPath& path);
// Smallest eigenvalue over the stored (symmetrized) matrices.
double min_eigenvalue(const MatrixPath& path);
// sup over the common grid of the spectral norm of the difference.
double sup_spectral_gap(const MatrixPath& a, const MatrixPath& b);
double sup_norm_gap(const VectorPath& a, const VectorPath& b);

// --- CSV + JSON sidecar serialization -------------------------------------
//
// CSV layout: column 1 is time, remaining columns are the row-major entries
// of the sample. Numbers are written with 17 significant digits, lowercase
// scientific, so files round-trip doubles exactly and diff deterministically.

void write_csv(const MatrixPath& path, const std::filesystem::path& file);
void write_csv(const VectorPath& path, const std::filesystem::path& file);

struct PathMeta {
    std::string kind;  // "matrix" or "vector"
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::size_t points = 0;
    std::optional<double> period;
    std::map<std::string, double> tolerances;
};

void write_meta(const PathMeta& meta, const std::filesystem::path& file);

MatrixPath read_matrix_csv(const std::filesystem::path& file, Eigen::Index rows, Eigen::Index cols);
VectorPath read_vector_csv(const std::filesystem::path& file, Eigen::Index dim);
PathMeta read_meta(const std::filesystem::path& file);

// Deterministic double formatting shared by every data file.
std::string format_double(double v);

}  // namespace plq
