#include "plq/driver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace plq {

namespace {

nlohmann::ordered_json fit_to_json(const TurnpikeFit& fit) {
    nlohmann::ordered_json j;
    j["C_fit"] = fit.C_fit;
    j["nu_fit"] = fit.nu_fit;
    j["residual"] = fit.residual;
    j["initial_window"] = {fit.initial_window[0], fit.initial_window[1]};
    j["final_window"] = {fit.final_window[0], fit.final_window[1]};
    j["slope_initial"] = fit.slope_initial;
    j["slope_final"] = fit.slope_final;
    return j;
}

nlohmann::ordered_json monodromy_to_json(const MonodromyReport& m) {
    nlohmann::ordered_json j;
    j["period"] = m.period;
    j["spectral_radius"] = m.spectral_radius;
    j["decay_rate"] = m.decay_rate;
    j["one_in_resolvent"] = m.one_in_resolvent;
    j["min_distance_to_one"] = m.min_distance_to_one;
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.period_map.rows(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index k = 0; k < m.period_map.cols(); ++k) row.push_back(m.period_map(i, k));
        rows.push_back(row);
    }
    j["period_map"] = rows;
    return j;
}

nlohmann::ordered_json dissipation_to_json(const DissipationReport& d) {
    nlohmann::ordered_json j;
    j["t0"] = d.t0;
    j["t1"] = d.t1;
    j["storage_start"] = d.storage_start;
    j["storage_end"] = d.storage_end;
    j["supply_integral"] = d.supply_integral;
    j["slack"] = d.slack;
    j["tolerance"] = d.tolerance;
    j["passed"] = d.passed;
    return j;
}

void write_json_file(const nlohmann::ordered_json& j, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

// Matrix CSVs on fine grids get decimated to at most `max_rows` rows to keep
// emitted files a sane size; vector paths are written in full.
MatrixPath decimated(const MatrixPath& path, std::size_t max_rows) {
    if (path.size() <= max_rows) return path;
    const std::size_t stride = (path.size() + max_rows - 1) / max_rows;
    MatrixPath out;
    for (std::size_t i = 0; i < path.size(); i += stride) {
        out.grid.push_back(path.grid[i]);
        out.values.push_back(path.values[i]);
    }
    if (out.grid.back() != path.grid.back()) {
        out.grid.push_back(path.grid.back());
        out.values.push_back(path.values.back());
    }
    return out;
}

}  // namespace

ScenarioRun run_scenario(const Scenario& scenario, double T, const RunOverrides& ovr) {
    SolveConfig cfg = scenario.numerics;
    if (ovr.riccati_tol) cfg.riccati_tol = *ovr.riccati_tol;
    if (ovr.ode_rel_tol) {
        cfg.ode.rel_tol = *ovr.ode_rel_tol;
        cfg.ode.abs_tol = *ovr.ode_rel_tol * 1e-3;
    }
    if (ovr.force_stiff) cfg.stiff = true;

    ScenarioRun run;
    run.horizon = T;
    run.envelope_floor = ovr.envelope_floor;
    run.periodic = solve_periodic_orbit(scenario.problem, cfg);
    run.finite = solve_finite_horizon(scenario.problem, scenario.y0, T, cfg);
    run.dev = deviation(run.finite.triple, run.periodic.triple);
    run.envelope = fit_envelope(run.dev, T, ovr.envelope_floor, scenario.problem.period);
    run.gap_fit = riccati_gap_profile(run.finite.P, run.periodic.P_theta, T, ovr.envelope_floor);
    const double rho = run.periodic.closed_loop.decay_rate;
    run.gap_ratio_to_2rho = rho > 0 ? run.gap_fit.nu_fit / (2.0 * rho) : 0.0;
    run.dissipation = check_dissipation(scenario.problem, run.finite.triple.y,
                                        run.finite.triple.u, run.periodic.triple,
                                        run.periodic.P_theta, run.periodic.r_theta, 0.0, T, cfg);
    run.deviation_mid = run.dev.eval(T / 2.0)(0);
    run.envelope_mid = 2.0 * run.envelope.C_fit * std::exp(-run.envelope.nu_fit * T / 2.0);

    if (!ovr.skip_oracle && T <= 10.0 && !cfg.stiff) {
        ShootingConfig shoot;
        const OptimalTriple oracle = solve_extremal_bvp(scenario.problem, scenario.y0, T,
                                                        shoot, cfg);
        OracleCheck check;
        check.sup_y = sup_norm_gap(oracle.y, run.finite.triple.y);
        check.sup_u = sup_norm_gap(oracle.u, run.finite.triple.u);
        check.sup_lambda = sup_norm_gap(oracle.lambda, run.finite.triple.lambda);
        run.oracle = check;
    }
    return run;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    std::uint64_t hash = 1469598103934665603ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

nlohmann::ordered_json write_run(const ScenarioRun& run, const Scenario& scenario,
                                 const std::filesystem::path& outdir) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    const double theta = scenario.problem.period;
    const Eigen::Index n = scenario.problem.state_dim;
    const Eigen::Index m = scenario.problem.control_dim;

    auto matrix_meta = [&](const MatrixPath& p, std::optional<double> period) {
        PathMeta meta;
        meta.kind = "matrix";
        meta.rows = n;
        meta.cols = n;
        meta.points = p.size();
        meta.period = period;
        meta.tolerances["riccati_tol"] = scenario.numerics.riccati_tol;
        meta.tolerances["ode_rel_tol"] = scenario.numerics.ode.rel_tol;
        return meta;
    };
    auto vector_meta = [&](const VectorPath& p, Eigen::Index dim, std::optional<double> period) {
        PathMeta meta;
        meta.kind = "vector";
        meta.rows = dim;
        meta.cols = 1;
        meta.points = p.size();
        meta.period = period;
        meta.tolerances["ode_rel_tol"] = scenario.numerics.ode.rel_tol;
        return meta;
    };

    const MatrixPath P_T_out = decimated(run.finite.P, 2000);
    const MatrixPath P_theta_out = decimated(run.periodic.P_theta, 2000);
    write_csv(P_theta_out, outdir / "P_theta.csv");
    write_meta(matrix_meta(P_theta_out, theta), outdir / "P_theta.meta.json");
    write_csv(P_T_out, outdir / "P_T.csv");
    write_meta(matrix_meta(P_T_out, std::nullopt), outdir / "P_T.meta.json");

    write_csv(run.periodic.r_theta, outdir / "r_theta.csv");
    write_meta(vector_meta(run.periodic.r_theta, n, theta), outdir / "r_theta.meta.json");
    write_csv(run.finite.r, outdir / "r_T.csv");
    write_meta(vector_meta(run.finite.r, n, std::nullopt), outdir / "r_T.meta.json");

    write_csv(run.finite.triple.y, outdir / "finite_y.csv");
    write_meta(vector_meta(run.finite.triple.y, n, std::nullopt), outdir / "finite_y.meta.json");
    write_csv(run.finite.triple.u, outdir / "finite_u.csv");
    write_meta(vector_meta(run.finite.triple.u, m, std::nullopt), outdir / "finite_u.meta.json");
    write_csv(run.finite.triple.lambda, outdir / "finite_lambda.csv");
    write_meta(vector_meta(run.finite.triple.lambda, n, std::nullopt),
               outdir / "finite_lambda.meta.json");

    write_csv(run.periodic.triple.y, outdir / "periodic_y.csv");
    write_meta(vector_meta(run.periodic.triple.y, n, theta), outdir / "periodic_y.meta.json");
    write_csv(run.periodic.triple.u, outdir / "periodic_u.csv");
    write_meta(vector_meta(run.periodic.triple.u, m, theta), outdir / "periodic_u.meta.json");
    write_csv(run.periodic.triple.lambda, outdir / "periodic_lambda.csv");
    write_meta(vector_meta(run.periodic.triple.lambda, n, theta),
               outdir / "periodic_lambda.meta.json");

    write_csv(run.dev, outdir / "deviation.csv");
    write_meta(vector_meta(run.dev, 1, std::nullopt), outdir / "deviation.meta.json");

    nlohmann::ordered_json envelope = fit_to_json(run.envelope);
    envelope["schema_version"] = 1;
    envelope["floor"] = run.envelope_floor;
    envelope["deviation_mid"] = run.deviation_mid;
    envelope["envelope_mid"] = run.envelope_mid;
    write_json_file(envelope, outdir / "envelope_fit.json");

    nlohmann::ordered_json gap = fit_to_json(run.gap_fit);
    gap["schema_version"] = 1;
    gap["mu_fit"] = run.gap_fit.nu_fit;
    gap["rho"] = run.periodic.closed_loop.decay_rate;
    gap["mu_over_2rho"] = run.gap_ratio_to_2rho;
    write_json_file(gap, outdir / "riccati_gap.json");

    nlohmann::ordered_json diss = dissipation_to_json(run.dissipation);
    diss["schema_version"] = 1;
    write_json_file(diss, outdir / "dissipation.json");

    nlohmann::ordered_json mono = monodromy_to_json(run.periodic.closed_loop);
    mono["schema_version"] = 1;
    write_json_file(mono, outdir / "monodromy.json");

    if (run.oracle) {
        nlohmann::ordered_json oj;
        oj["schema_version"] = 1;
        oj["sup_y"] = run.oracle->sup_y;
        oj["sup_u"] = run.oracle->sup_u;
        oj["sup_lambda"] = run.oracle->sup_lambda;
        write_json_file(oj, outdir / "oracle_check.json");
    }

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["scenario"] = scenario.descriptor;
    manifest["horizons"] = {run.horizon};
    manifest["tolerances"] = {{"riccati_tol", scenario.numerics.riccati_tol},
                              {"ode_rel_tol", scenario.numerics.ode.rel_tol},
                              {"ode_abs_tol", scenario.numerics.ode.abs_tol},
                              {"envelope_floor", run.envelope_floor}};
    manifest["outdir"] = outdir.string();
    auto files = nlohmann::ordered_json::array();
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(outdir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        nlohmann::ordered_json f;
        f["name"] = name;
        f["bytes"] = std::filesystem::file_size(outdir / name);
        std::ostringstream hex;
        hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64_file(outdir / name);
        f["fnv1a64"] = hex.str();
        files.push_back(f);
    }
    manifest["files"] = files;
    write_json_file(manifest, outdir / "manifest.json");
    return manifest;
}

SweepSummary summarize_sweep(const std::vector<SweepEntry>& entries) {
    SweepSummary s;
    s.entries = entries;
    if (entries.size() < 2) throw Error("summarize_sweep: need at least 2 horizons");
    double nu_min = entries.front().nu_fit, nu_max = nu_min, nu_sum = 0.0;
    for (const auto& e : entries) {
        nu_min = std::min(nu_min, e.nu_fit);
        nu_max = std::max(nu_max, e.nu_fit);
        nu_sum += e.nu_fit;
    }
    s.mean_nu = nu_sum / static_cast<double>(entries.size());
    s.nu_spread = (nu_max - nu_min) / s.mean_nu;

    // ln(envelope midpoint value) against the midpoint time T/2: slope -nu
    // when the fitted constants are horizon-uniform.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(entries.size());
    for (const auto& e : entries) {
        const double x = e.horizon / 2.0;
        const double y = std::log(e.envelope_mid);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    s.midpoint_slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return s;
}

SweepSummary run_sweep(const Scenario& scenario, const std::vector<double>& horizons,
                       const std::filesystem::path& outdir, const RunOverrides& ovr) {
    if (horizons.size() < 2) throw Error("run_sweep: need at least 2 horizons");
    namespace fs = std::filesystem;
    const bool emit = !outdir.empty();
    if (emit) fs::create_directories(outdir);

    std::vector<SweepEntry> entries;
    for (double T : horizons) {
        const ScenarioRun run = run_scenario(scenario, T, ovr);
        if (emit) {
            std::ostringstream dir;
            dir << "T_" << T;
            write_run(run, scenario, outdir / dir.str());
        }
        SweepEntry e;
        e.horizon = T;
        e.nu_fit = run.envelope.nu_fit;
        e.C_fit = run.envelope.C_fit;
        e.deviation_mid = run.deviation_mid;
        e.envelope_mid = run.envelope_mid;
        entries.push_back(e);
    }
    SweepSummary summary = summarize_sweep(entries);

    if (emit) {
        nlohmann::ordered_json j;
        j["schema_version"] = 1;
        j["scenario"] = scenario.descriptor;
        auto rows = nlohmann::ordered_json::array();
        for (const auto& e : summary.entries) {
            nlohmann::ordered_json row;
            row["horizon"] = e.horizon;
            row["nu_fit"] = e.nu_fit;
            row["C_fit"] = e.C_fit;
            row["deviation_mid"] = e.deviation_mid;
            row["envelope_mid"] = e.envelope_mid;
            rows.push_back(row);
        }
        j["per_horizon"] = rows;
        j["nu_spread"] = summary.nu_spread;
        j["mean_nu"] = summary.mean_nu;
        j["midpoint_slope_vs_half_horizon"] = summary.midpoint_slope;
        write_json_file(j, outdir / "summary.json");
    }
    return summary;
}

}  // namespace plq
