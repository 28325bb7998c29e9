// Command-line front end: run one scenario or sweep a list of horizons and
// emit trajectories, fits and reports for offline plotting.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plq/driver.hpp"
#include "plq/errors.hpp"
#include "plq/scenarios.hpp"

namespace {

int emit_error(const std::string& type, const std::string& message, int code) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["error"] = {{"type", type}, {"message", message}};
    std::cout << j.dump(2) << std::endl;
    return code;
}

plq::Scenario load_scenario(const std::string& arg) {
    if (arg.find('.') != std::string::npos && std::filesystem::exists(arg))
        return plq::make_scenario(plq::descriptor_from_file(arg));
    return plq::make_scenario(arg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic LQ tracking: Riccati synthesis and turnpike diagnostics"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::vector<double> horizons;
    std::string outdir;
    std::optional<double> tol_riccati;
    std::optional<double> tol_ode;
    bool skip_oracle = false;
    bool stiff = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_arg,
                        "scenario name (scalar_example, constant_test, heat_1d, wave_1d) or a "
                        "descriptor JSON file")
            ->required();
        cmd->add_option("--horizon", horizons, "horizon T (repeatable for sweep)")->required();
        cmd->add_option("--outdir", outdir, "output directory")->required();
        cmd->add_option_function<double>("--tol-riccati",
                                         [&](double v) { tol_riccati = v; },
                                         "period-map fixed point tolerance");
        cmd->add_option_function<double>("--tol-ode", [&](double v) { tol_ode = v; },
                                         "relative ODE tolerance (absolute = 1e-3 relative)");
        cmd->add_flag("--skip-oracle", skip_oracle, "skip the shooting cross-check");
        cmd->add_flag("--stiff", stiff, "force the implicit midpoint stepper");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "run one scenario at one horizon");
    add_common(cmd_run);
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a list of horizons and summarize");
    add_common(cmd_sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return emit_error("usage", e.what(), 2);
    }

    plq::RunOverrides ovr;
    ovr.riccati_tol = tol_riccati;
    ovr.ode_rel_tol = tol_ode;
    ovr.force_stiff = stiff;
    ovr.skip_oracle = skip_oracle;

    try {
        const plq::Scenario scenario = load_scenario(scenario_arg);
        if (cmd_run->parsed()) {
            if (horizons.size() != 1)
                return emit_error("usage", "run expects exactly one --horizon", 2);
            const plq::ScenarioRun run = plq::run_scenario(scenario, horizons.front(), ovr);
            const auto manifest = plq::write_run(run, scenario, outdir);
            std::cout << manifest.dump(2) << std::endl;
        } else {
            if (horizons.size() < 2)
                return emit_error("usage", "sweep expects at least two --horizon values", 2);
            plq::run_sweep(scenario, horizons, outdir, ovr);
            std::cout << nlohmann::ordered_json{{"schema_version", 1},
                                                {"summary", (std::filesystem::path(outdir) /
                                                             "summary.json")
                                                                .string()}}
                             .dump(2)
                      << std::endl;
        }
    } catch (const plq::InvalidScenarioError& e) {
        return emit_error("invalid-scenario", e.what(), 2);
    } catch (const plq::Error& e) {
        return emit_error("solver", e.what(), 1);
    } catch (const std::exception& e) {
        return emit_error("internal", e.what(), 1);
    }
    return 0;
}
