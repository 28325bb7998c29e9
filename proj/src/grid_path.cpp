#include "plq/grid_path.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace plq {

std::size_t locate_interval(const std::vector<double>& grid, double t) {
    if (grid.size() < 2) return 0;
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    if (i >= grid.size() - 1) i = grid.size() - 2;
    return i;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t points) {
    if (points < 2 || !(t1 > t0)) throw Error("uniform_grid: need points >= 2 and t1 > t0");
    std::vector<double> g(points);
    const double h = (t1 - t0) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = t0 + h * static_cast<double>(i);
    g.back() = t1;
    return g;
}

namespace {

template <class Value>
Value slope_at(const GridPath<Value>& p, std::size_t i) {
    if (p.has_derivatives()) return p.derivatives[i];
    const std::size_t n = p.size();
    if (n == 1) return Value(0.0 * p.values[0]);
    if (i == 0) return Value((p.values[1] - p.values[0]) / (p.grid[1] - p.grid[0]));
    if (i == n - 1)
        return Value((p.values[n - 1] - p.values[n - 2]) / (p.grid[n - 1] - p.grid[n - 2]));
    const double hl = p.grid[i] - p.grid[i - 1];
    const double hr = p.grid[i + 1] - p.grid[i];
    // Three-point slope, exact for quadratics on nonuniform grids.
    return Value((hr / hl * (p.values[i] - p.values[i - 1]) +
                  hl / hr * (p.values[i + 1] - p.values[i])) /
                 (hl + hr));
}

}  // namespace

template <class Value>
void GridPath<Value>::check_consistent() const {
    if (grid.size() != values.size()) throw Error("GridPath: grid/value size mismatch");
    if (!derivatives.empty() && derivatives.size() != values.size())
        throw Error("GridPath: derivative size mismatch");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error("GridPath: grid not strictly increasing");
}

template <class Value>
Value GridPath<Value>::eval(double t) const {
    if (empty()) throw Error("GridPath::eval on empty path");
    if (size() == 1) return values[0];
    const double slop = 1e-9 * (1.0 + std::abs(span()));
    if (t < grid.front() - slop || t > grid.back() + slop)
        throw Error("GridPath::eval: t outside the stored interval");
    t = std::clamp(t, grid.front(), grid.back());
    const std::size_t i = locate_interval(grid, t);
    if (t == grid[i]) return values[i];
    if (t == grid[i + 1]) return values[i + 1];
    const double h = grid[i + 1] - grid[i];
    const double s = (t - grid[i]) / h;
    const Value m0 = slope_at(*this, i);
    const Value m1 = slope_at(*this, i + 1);
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return Value(h00 * values[i] + (h10 * h) * m0 + h01 * values[i + 1] + (h11 * h) * m1);
}

template <class Value>
Value GridPath<Value>::eval_derivative(double t) const {
    if (empty()) throw Error("GridPath::eval_derivative on empty path");
    if (size() == 1) return Value(0.0 * values[0]);
    t = std::clamp(t, grid.front(), grid.back());
    const std::size_t i = locate_interval(grid, t);
    const double h = grid[i + 1] - grid[i];
    const double s = (t - grid[i]) / h;
    const Value m0 = slope_at(*this, i);
    const Value m1 = slope_at(*this, i + 1);
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / h;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h;
    const double d11 = 3 * s2 - 2 * s;
    return Value(d00 * values[i] + d10 * m0 + d01 * values[i + 1] + d11 * m1);
}

template <class Value>
Value GridPath<Value>::eval_periodic(double t, double period) const {
    if (!(period > 0)) throw Error("GridPath::eval_periodic: period must be positive");
    if (span() < period * (1.0 - 1e-9))
        throw Error("GridPath::eval_periodic: grid does not cover one period");
    double tau = std::fmod(t - grid.front(), period);
    if (tau < 0) tau += period;
    return eval(grid.front() + tau);
}

template struct GridPath<Eigen::VectorXd>;
template struct GridPath<Eigen::MatrixXd>;

double max_symmetry_defect(const MatrixPath& path) {
    double worst = 0.0;
    for (const auto& P : path.values)
        worst = std::max(worst, (P - P.transpose()).norm());
    return worst;
}

double min_eigenvalue(const MatrixPath& path) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& P : path.values) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (P + P.transpose()),
                                                          Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

double sup_spectral_gap(const MatrixPath& a, const MatrixPath& b) {
    if (a.size() != b.size()) throw GridMismatchError("sup_spectral_gap: grid size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Eigen::MatrixXd d = a.values[i] - b.values[i];
        d = 0.5 * (d + d.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
        worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return worst;
}

double sup_norm_gap(const VectorPath& a, const VectorPath& b) {
    if (a.size() != b.size()) throw GridMismatchError("sup_norm_gap: grid size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, (a.values[i] - b.values[i]).norm());
    return worst;
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

namespace {

void write_rows(std::ofstream& out, const std::vector<double>& grid,
                const std::vector<const double*>& data, Eigen::Index count) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << format_double(grid[i]);
        const double* p = data[i];
        for (Eigen::Index k = 0; k < count; ++k) out << ',' << format_double(p[k]);
        out << '\n';
    }
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& file,
                                               std::size_t expected_cols) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(expected_cols);
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            double v = 0;
            auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc()) throw Error("bad number in " + file.string());
            row.push_back(v);
            p = res.ptr;
            if (p < end && *p == ',') ++p;
        }
        if (row.size() != expected_cols) throw Error("bad column count in " + file.string());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_csv(const MatrixPath& path, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    std::vector<const double*> data;
    data.reserve(path.size());
    Eigen::Index count = 0;
    std::vector<Eigen::MatrixXd> rowmajor;  // Eigen default is column major
    rowmajor.reserve(path.size());
    for (const auto& M : path.values) {
        rowmajor.push_back(M.transpose());  // transposed column-major == row-major data
        count = M.size();
    }
    for (const auto& M : rowmajor) data.push_back(M.data());
    write_rows(out, path.grid, data, count);
}

void write_csv(const VectorPath& path, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    std::vector<const double*> data;
    data.reserve(path.size());
    Eigen::Index count = 0;
    for (const auto& v : path.values) {
        data.push_back(v.data());
        count = v.size();
    }
    write_rows(out, path.grid, data, count);
}

MatrixPath read_matrix_csv(const std::filesystem::path& file, Eigen::Index rows,
                           Eigen::Index cols) {
    auto table = read_csv_rows(file, 1 + static_cast<std::size_t>(rows * cols));
    MatrixPath path;
    for (const auto& row : table) {
        path.grid.push_back(row[0]);
        Eigen::MatrixXd M(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                M(r, c) = row[1 + static_cast<std::size_t>(r * cols + c)];
        path.values.push_back(std::move(M));
    }
    path.check_consistent();
    return path;
}

VectorPath read_vector_csv(const std::filesystem::path& file, Eigen::Index dim) {
    auto table = read_csv_rows(file, 1 + static_cast<std::size_t>(dim));
    VectorPath path;
    for (const auto& row : table) {
        path.grid.push_back(row[0]);
        Eigen::VectorXd v(dim);
        for (Eigen::Index k = 0; k < dim; ++k) v(k) = row[1 + static_cast<std::size_t>(k)];
        path.values.push_back(std::move(v));
    }
    path.check_consistent();
    return path;
}

void write_meta(const PathMeta& meta, const std::filesystem::path& file) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = meta.kind;
    j["rows"] = meta.rows;
    j["cols"] = meta.cols;
    j["points"] = meta.points;
    if (meta.period)
        j["period"] = *meta.period;
    else
        j["period"] = nullptr;
    j["tolerances"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta.tolerances) j["tolerances"][k] = v;
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

PathMeta read_meta(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    nlohmann::json j;
    in >> j;
    PathMeta meta;
    meta.kind = j.at("kind").get<std::string>();
    meta.rows = j.at("rows").get<Eigen::Index>();
    meta.cols = j.at("cols").get<Eigen::Index>();
    meta.points = j.at("points").get<std::size_t>();
    if (!j.at("period").is_null()) meta.period = j.at("period").get<double>();
    for (const auto& [k, v] : j.at("tolerances").items()) meta.tolerances[k] = v.get<double>();
    return meta;
}

}  // namespace plq
