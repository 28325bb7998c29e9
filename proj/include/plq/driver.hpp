#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plq/bvp_oracle.hpp"
#include "plq/scenarios.hpp"
#include "plq/turnpike.hpp"

namespace plq {

struct OracleCheck {
    double sup_y = 0.0;
    double sup_u = 0.0;
    double sup_lambda = 0.0;
};

// One full scenario run: both syntheses, deviation, fits and checks.
struct ScenarioRun {
    double horizon = 0.0;
    FiniteHorizonSolution finite;
    PeriodicOrbitSolution periodic;
    VectorPath dev;
    TurnpikeFit envelope;
    TurnpikeFit gap_fit;
    double gap_ratio_to_2rho = 0.0;  // mu_fit / (2 rho) from the closed-loop monodromy
    DissipationReport dissipation;
    std::optional<OracleCheck> oracle;
    double deviation_mid = 0.0;     // raw e(T/2)
    double envelope_mid = 0.0;      // 2 C_fit exp(-nu_fit T/2)
    double envelope_floor = 1e-12;
};

struct RunOverrides {
    std::optional<double> riccati_tol;
    std::optional<double> ode_rel_tol;
    bool force_stiff = false;
    bool skip_oracle = false;
    double envelope_floor = 1e-12;
};

ScenarioRun run_scenario(const Scenario& scenario, double T, const RunOverrides& ovr = {});

// Writes the CSV/JSON artifact set for one run and returns the manifest.
nlohmann::ordered_json write_run(const ScenarioRun& run, const Scenario& scenario,
                                 const std::filesystem::path& outdir);

struct SweepEntry {
    double horizon = 0.0;
    double nu_fit = 0.0;
    double C_fit = 0.0;
    double deviation_mid = 0.0;
    double envelope_mid = 0.0;
};

struct SweepSummary {
    std::vector<SweepEntry> entries;
    double nu_spread = 0.0;          // (max - min) / mean of nu_fit
    double midpoint_slope = 0.0;     // slope of ln(envelope_mid) against T/2
    double mean_nu = 0.0;
};

SweepSummary summarize_sweep(const std::vector<SweepEntry>& entries);

// Runs every horizon (each into outdir/T_<value>/ when outdir is nonempty),
// writes summary.json and a top-level manifest, returns the summary.
SweepSummary run_sweep(const Scenario& scenario, const std::vector<double>& horizons,
                       const std::filesystem::path& outdir, const RunOverrides& ovr = {});

std::uint64_t fnv1a64_file(const std::filesystem::path& file);

}  // namespace plq
