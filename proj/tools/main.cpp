#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment.hpp"

namespace {

using gridmop::cli::ExperimentConfig;

struct CommonFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> kappa;
    std::optional<std::string> kappa_grid;
    std::optional<int> max_iters;
    std::vector<double> rho;
    std::optional<std::string> data_path;
    bool synth = false;
    std::optional<int> households;
    std::optional<double> days;
    std::optional<long> steps;
    bool trace = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file (JSON; a manifest works too)");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "seed for the synthetic scenario");
    cmd->add_option("--kappa", flags.kappa, "scalarization weight in [0,1]");
    cmd->add_option("--kappa-grid", flags.kappa_grid, "grid spec: start:step:stop or a comma list");
    cmd->add_option("--max-iters", flags.max_iters, "solver iteration budget");
    cmd->add_option("--rho", flags.rho, "penalty step size (repeatable for admm-diagnose sweeps)");
    cmd->add_option("--data", flags.data_path, "net-consumption CSV (wide or long format)");
    cmd->add_flag("--synth", flags.synth, "use the synthetic generator (ignores data.csv)");
    cmd->add_option("--households", flags.households, "synthetic household count");
    cmd->add_option("--days", flags.days, "synthetic scenario length in days");
    cmd->add_option("--steps", flags.steps, "closed-loop steps (simulate)");
    cmd->add_flag("--trace", flags.trace, "emit per-iteration solver traces");
}

ExperimentConfig build_config(const CommonFlags& flags) {
    ExperimentConfig config =
        flags.config_path ? ExperimentConfig::load(*flags.config_path) : ExperimentConfig{};
    if (flags.out_dir) config.out_dir = *flags.out_dir;
    if (flags.seed) config.seed = *flags.seed;
    if (flags.kappa) config.kappa = *flags.kappa;
    if (flags.kappa_grid) config.kappa_grid = gridmop::cli::parse_kappa_grid(*flags.kappa_grid);
    if (flags.max_iters) config.admm.max_iters = *flags.max_iters;
    if (!flags.rho.empty()) config.admm.rho = flags.rho.front();
    if (flags.data_path) config.data.csv_path = *flags.data_path;
    if (flags.synth) config.data.csv_path.reset();
    if (flags.households) config.data.households = *flags.households;
    if (flags.days) config.data.days = *flags.days;
    if (flags.steps) config.mpc.steps = *flags.steps;
    if (flags.trace) config.trace = true;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiobjective battery-fleet coordination: peak shaving vs. tube flexibility"};
    app.set_version_flag("--version", std::string("gridmop ") + gridmop::cli::kVersion);
    app.require_subcommand(1);

    CommonFlags simulate_flags, pareto_flags, sensitivity_flags, diagnose_flags;
    std::vector<double> tradeoff_anchors;
    std::string axis;
    std::vector<double> axis_values;

    CLI::App* simulate = app.add_subcommand("simulate", "closed-loop MPC run with trace export");
    add_common(simulate, simulate_flags);

    CLI::App* pareto = app.add_subcommand("pareto", "frontier sweep over the kappa grid");
    add_common(pareto, pareto_flags);
    pareto->add_option("--tradeoff", tradeoff_anchors,
                       "anchor kappa0 for a trade-off bound table (repeatable)");

    CLI::App* sensitivity =
        app.add_subcommand("sensitivity", "frontier family along a parameter axis");
    add_common(sensitivity, sensitivity_flags);
    sensitivity->add_option("--axis", axis, "tube_width or initial_soc")->required();
    sensitivity->add_option("--values", axis_values, "axis values")->required()->delimiter(',');

    CLI::App* diagnose =
        app.add_subcommand("admm-diagnose", "per-iteration residual and identity report");
    add_common(diagnose, diagnose_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return gridmop::cli::cmd_simulate(build_config(simulate_flags));
        }
        if (pareto->parsed()) {
            return gridmop::cli::cmd_pareto(build_config(pareto_flags), tradeoff_anchors);
        }
        if (sensitivity->parsed()) {
            return gridmop::cli::cmd_sensitivity(build_config(sensitivity_flags), axis,
                                                 axis_values);
        }
        if (diagnose->parsed()) {
            return gridmop::cli::cmd_admm_diagnose(build_config(diagnose_flags),
                                                   diagnose_flags.rho);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
