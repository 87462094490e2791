// Command-line front end: scenario execution, validity reports, oracle runs,
// parameter sweeps and the end-to-end verification suite.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "phaseloop/acceptance.hpp"
#include "phaseloop/scenario.hpp"
#include "phaseloop/version.hpp"

namespace {

using phaseloop::json;

void write_or_print(const json& j, const std::string& path) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw phaseloop::ConfigError("cannot write '" + path + "'");
        out << text;
        std::cout << "wrote " << path << "\n";
    }
}

std::vector<double> parse_values(const std::string& spec) {
    std::vector<double> out;
    if (spec.empty()) return out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(phaseloop::version::name) +
                 " - perturbative phase and contrast diagnostics for light-pulse atom "
                 "interferometers"};
    app.set_version_flag("--version", std::string(phaseloop::version::number));
    app.require_subcommand(1);

    std::string config_path, out_path, param, values_spec, scenario_dir = "scenarios";
    int workers = 1;
    bool skip_quantum = false;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "scenario configuration file")->required();
        cmd->add_option("--out", out_path, "override the output path");
    };

    CLI::App* phase = app.add_subcommand("phase", "run the perturbative engine on a scenario");
    add_config(phase);

    CLI::App* validity = app.add_subcommand("validity", "probe scales and report validity gates");
    add_config(validity);

    CLI::App* oracle = app.add_subcommand("oracle", "run the configured oracles and compare");
    add_config(oracle);
    oracle->add_flag("--skip-quantum", skip_quantum, "skip the quantum oracle");

    CLI::App* sweep = app.add_subcommand("sweep", "evaluate the engine over a parameter sweep");
    add_config(sweep);
    sweep->add_option("--param", param, "JSON pointer to a scalar config entry")->required();
    sweep->add_option("--values", values_spec, "comma-separated values")->required();
    sweep->add_option("--workers", workers, "concurrent rows (output order is input order)");

    CLI::App* verify = app.add_subcommand("verify", "run the end-to-end verification suite");
    verify->add_flag("--skip-quantum", skip_quantum, "skip the quantum-oracle criterion");
    verify->add_option("--scenario-dir", scenario_dir, "shipped scenario directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (phase->parsed()) {
            phaseloop::Scenario sc = phaseloop::load_scenario(config_path);
            phaseloop::ScenarioResult res = phaseloop::run_scenario(sc, true, false);
            write_or_print(result_to_json(sc, res),
                           out_path.empty() ? sc.result_path : out_path);
        } else if (validity->parsed()) {
            phaseloop::Scenario sc = phaseloop::load_scenario(config_path);
            phaseloop::ValidityReport rep = phaseloop::run_validity(sc);
            json out;
            out["tool"] = {{"name", phaseloop::version::name},
                           {"version", phaseloop::version::number}};
            out["config"] = sc.canonical;
            out["validity"] = phaseloop::validity_to_json(rep);
            write_or_print(out, out_path.empty() ? sc.result_path : out_path);
            if (rep.refuse) return 2;
        } else if (oracle->parsed()) {
            phaseloop::Scenario sc = phaseloop::load_scenario(config_path);
            if (skip_quantum) sc.run_quantum = false;
            phaseloop::ScenarioResult res = phaseloop::run_scenario(sc);
            write_or_print(result_to_json(sc, res),
                           out_path.empty() ? sc.result_path : out_path);
            if (res.comparison && !res.comparison->all_pass) return 1;
        } else if (sweep->parsed()) {
            phaseloop::Scenario sc = phaseloop::load_scenario(config_path);  // validates
            std::ifstream in(config_path);
            const json base = json::parse(in);
            const std::string csv =
                phaseloop::run_sweep(base, param, parse_values(values_spec), workers);
            const std::string path = out_path.empty() ? sc.csv_path : out_path;
            if (path.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(path, std::ios::binary);
                if (!out) throw phaseloop::ConfigError("cannot write '" + path + "'");
                out << csv;
                std::cout << "wrote " << path << "\n";
            }
        } else if (verify->parsed()) {
            phaseloop::AcceptanceOptions opts;
            opts.with_quantum = !skip_quantum;
            opts.scenario_dir = scenario_dir;
            const bool ok = phaseloop::print_acceptance(phaseloop::run_acceptance(opts));
            return ok ? 0 : 1;
        }
    } catch (const phaseloop::ValidityRefusal& e) {
        std::cerr << "validity refusal: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
