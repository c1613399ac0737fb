#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gridmop/csv.hpp"
#include "gridmop/pareto.hpp"

namespace gridmop::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
    throw std::invalid_argument("config field '" + field + "': " + message);
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_error(key, "has the wrong type");
    }
}

/// Numbers rounded to 9 significant digits before JSON emission.
double g9(double v) { return std::stod(format_g9(v)); }

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

ProsumerParams prosumer_from_json(const json& j, double* x0) {
    ProsumerParams p;
    p.alpha = field_or(j, "alpha", p.alpha);
    p.beta = field_or(j, "beta", p.beta);
    p.gamma = field_or(j, "gamma", p.gamma);
    p.capacity = field_or(j, "capacity", p.capacity);
    p.u_min = field_or(j, "u_min", p.u_min);
    p.u_max = field_or(j, "u_max", p.u_max);
    *x0 = field_or(j, "x0", 0.5);
    return p;
}

json prosumer_to_json(const ProsumerParams& p, double x0) {
    json j;
    j["alpha"] = g9(p.alpha);
    j["beta"] = g9(p.beta);
    j["gamma"] = g9(p.gamma);
    j["capacity"] = g9(p.capacity);
    j["u_min"] = g9(p.u_min);
    j["u_max"] = g9(p.u_max);
    j["x0"] = g9(x0);
    return j;
}

std::string format_csv_row(const std::vector<std::string>& fields) {
    std::string row;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) row += ',';
        row += csv_escape(fields[i]);
    }
    row += '\n';
    return row;
}

void write_manifest(const ExperimentConfig& config, const std::string& command) {
    const json resolved = config.to_json();
    json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["seed"] = config.seed;
    manifest["config_hash"] = config_hash(resolved);
    manifest["config"] = resolved;
    write_file(std::filesystem::path(config.out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

std::string frontier_csv(const FrontierSweep& frontier) {
    std::string out = "kappa,g,h,f_tilde,refined,iterations\n";
    for (const auto& p : frontier.points) {
        out += format_csv_row({format_g9(p.kappa), format_g9(p.g_val), format_g9(p.h_val),
                               format_g9(p.f_tilde), p.refined ? "1" : "0",
                               std::to_string(p.admm_iterations)});
    }
    return out;
}

void write_iteration_trace(const std::filesystem::path& path, const AdmmResult& result,
                           double kappa) {
    std::string out =
        "iter,primal_residual,dual_residual,g,h,g_hat,h_hat,cost_residual,penalty\n";
    for (const AdmmState& state : result.history) {
        const double f = scalarized(kappa, state.g_val, state.h_val);
        const double f_hat_val = scalarized(kappa, state.g_hat_val, state.h_hat_val);
        out += format_csv_row({std::to_string(state.iteration), format_g9(state.primal_residual),
                               format_g9(state.dual_residual), format_g9(state.g_val),
                               format_g9(state.h_val), format_g9(state.g_hat_val),
                               format_g9(state.h_hat_val), format_g9(std::abs(f - f_hat_val)),
                               format_g9(state.penalty)});
    }
    write_file(path, out);
}

HorizonProblem first_window(const ExperimentConfig& config, const ResolvedScenario& scenario) {
    return make_horizon(scenario.series, scenario.params, scenario.tube, 0, config.grid,
                        scenario.x0, config.kappa);
}

}  // namespace

std::vector<double> parse_kappa_grid(const std::string& spec) {
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        double start = 0.0, step = 0.0, stop = 0.0;
        char c1 = 0, c2 = 0;
        std::istringstream in(spec);
        if (!(in >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':' || step <= 0.0) {
            throw std::invalid_argument("kappa grid spec must be start:step:stop, got '" + spec + "'");
        }
        for (double v = start; v <= stop + 1e-12; v += step) grid.push_back(std::min(v, 1.0));
    } else {
        std::istringstream in(spec);
        std::string token;
        while (std::getline(in, token, ',')) {
            if (token.empty()) continue;
            grid.push_back(std::stod(token));
        }
    }
    if (grid.empty()) throw std::invalid_argument("empty kappa grid '" + spec + "'");
    return grid;
}

std::string config_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::from_json(const json& input) {
    const json& j = input.contains("config") ? input.at("config") : input;
    ExperimentConfig config;

    if (j.contains("data")) {
        const json& data = j.at("data");
        if (data.contains("csv") && !data.at("csv").is_null()) {
            config.data.csv_path = data.at("csv").get<std::string>();
        }
        if (data.contains("synth")) {
            const json& synth = data.at("synth");
            config.seed = field_or<std::uint64_t>(synth, "seed", config.seed);
            config.data.households = field_or(synth, "households", config.data.households);
            config.data.days = field_or(synth, "days", config.data.days);
            config.data.profile.base_load =
                field_or(synth, "base_load", config.data.profile.base_load);
            config.data.profile.solar_amplitude =
                field_or(synth, "solar_amplitude", config.data.profile.solar_amplitude);
            config.data.profile.noise_level =
                field_or(synth, "noise_level", config.data.profile.noise_level);
        }
    }
    if (j.contains("grid")) {
        const json& grid = j.at("grid");
        config.grid.step_hours = field_or(grid, "step_hours", config.grid.step_hours);
        config.grid.horizon = field_or(grid, "horizon", config.grid.horizon);
    }
    if (j.contains("prosumers")) {
        const json& prosumers = j.at("prosumers");
        config.prosumers.clear();
        config.initial_soc.clear();
        if (prosumers.is_array()) {
            for (const json& entry : prosumers) {
                double x0 = 0.5;
                config.prosumers.push_back(prosumer_from_json(entry, &x0));
                config.initial_soc.push_back(x0);
            }
            if (config.prosumers.empty()) config_error("prosumers", "array must not be empty");
        } else {
            double x0 = 0.5;
            config.prosumers.push_back(prosumer_from_json(prosumers, &x0));
            config.initial_soc.push_back(x0);
        }
    }
    if (j.contains("tube")) {
        config.tube_segments.clear();
        for (const json& seg : j.at("tube").at("segments")) {
            TubeSegment segment;
            segment.from_step = field_or<long>(seg, "from_step", 0);
            segment.lower = seg.at("lower").get<double>();
            segment.upper = seg.at("upper").get<double>();
            config.tube_segments.push_back(segment);
        }
    }
    config.kappa = field_or(j, "kappa", config.kappa);
    if (j.contains("kappa_grid")) {
        if (j.at("kappa_grid").is_string()) {
            config.kappa_grid = parse_kappa_grid(j.at("kappa_grid").get<std::string>());
        } else {
            config.kappa_grid = j.at("kappa_grid").get<std::vector<double>>();
        }
    }
    if (j.contains("admm")) {
        const json& admm = j.at("admm");
        config.admm.rho = field_or(admm, "rho", config.admm.rho);
        config.admm.max_iters = field_or(admm, "max_iters", config.admm.max_iters);
        config.admm.primal_tol = field_or(admm, "primal_tol", config.admm.primal_tol);
        config.admm.dual_tol = field_or(admm, "dual_tol", config.admm.dual_tol);
    }
    if (j.contains("mpc")) {
        const json& mpc = j.at("mpc");
        config.mpc.steps = field_or<long>(mpc, "steps", config.mpc.steps);
        config.mpc.forecast_noise = field_or(mpc, "forecast_noise", config.mpc.forecast_noise);
        config.mpc.forecast_seed =
            field_or<std::uint64_t>(mpc, "forecast_seed", config.mpc.forecast_seed);
    }
    config.seed = field_or<std::uint64_t>(j, "seed", config.seed);
    config.out_dir = field_or<std::string>(j, "out", config.out_dir);
    config.trace = field_or(j, "trace", config.trace);
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    json data_json;
    data_json["csv"] = data.csv_path ? json(*data.csv_path) : json(nullptr);
    json synth;
    synth["seed"] = seed;
    synth["households"] = data.households;
    synth["days"] = g9(data.days);
    synth["base_load"] = g9(data.profile.base_load);
    synth["solar_amplitude"] = g9(data.profile.solar_amplitude);
    synth["noise_level"] = g9(data.profile.noise_level);
    data_json["synth"] = synth;
    j["data"] = data_json;

    j["grid"] = {{"step_hours", g9(grid.step_hours)}, {"horizon", grid.horizon}};
    json prosumer_list = json::array();
    for (size_t i = 0; i < prosumers.size(); ++i) {
        prosumer_list.push_back(prosumer_to_json(prosumers[i], initial_soc[i]));
    }
    j["prosumers"] = prosumer_list;
    json segments = json::array();
    for (const auto& seg : tube_segments) {
        segments.push_back(
            {{"from_step", seg.from_step}, {"lower", g9(seg.lower)}, {"upper", g9(seg.upper)}});
    }
    j["tube"] = {{"segments", segments}};
    j["kappa"] = g9(kappa);
    json grid_json = json::array();
    for (double k : resolved_kappa_grid()) grid_json.push_back(g9(k));
    j["kappa_grid"] = grid_json;
    j["admm"] = {{"rho", g9(admm.rho)},
                 {"max_iters", admm.max_iters},
                 {"primal_tol", g9(admm.primal_tol)},
                 {"dual_tol", g9(admm.dual_tol)}};
    j["mpc"] = {{"steps", mpc.steps},
                {"forecast_noise", g9(mpc.forecast_noise)},
                {"forecast_seed", mpc.forecast_seed}};
    j["seed"] = seed;
    j["out"] = out_dir;
    j["trace"] = trace;
    return j;
}

void ExperimentConfig::validate() const {
    try {
        grid.validate();
    } catch (const std::exception& e) {
        config_error("grid", e.what());
    }
    if (prosumers.empty()) config_error("prosumers", "at least one parameter set required");
    if (prosumers.size() != initial_soc.size()) {
        config_error("prosumers", "x0 count must match prosumer count");
    }
    for (size_t i = 0; i < prosumers.size(); ++i) {
        try {
            prosumers[i].validate();
        } catch (const std::exception& e) {
            config_error("prosumers[" + std::to_string(i) + "]", e.what());
        }
        if (!(initial_soc[i] >= 0.0 && initial_soc[i] <= prosumers[i].capacity)) {
            config_error("prosumers[" + std::to_string(i) + "].x0", "outside [0, capacity]");
        }
    }
    if (tube_segments.empty()) config_error("tube.segments", "must not be empty");
    if (!(kappa >= 0.0 && kappa <= 1.0)) config_error("kappa", "must lie in [0, 1]");
    for (double k : resolved_kappa_grid()) {
        if (!(k >= 0.0 && k <= 1.0)) config_error("kappa_grid", "values must lie in [0, 1]");
    }
    try {
        admm.validate();
    } catch (const std::exception& e) {
        config_error("admm", e.what());
    }
    if (mpc.steps < 1) config_error("mpc.steps", "must be >= 1");
    if (mpc.forecast_noise < 0.0) config_error("mpc.forecast_noise", "must be >= 0");
    if (data.csv_path && data.csv_path->empty()) config_error("data.csv", "must not be empty");
    if (!data.csv_path) {
        if (data.households < 1) config_error("data.synth.households", "must be >= 1");
        if (!(data.days > 0.0)) config_error("data.synth.days", "must be > 0");
    }
}

std::vector<double> ExperimentConfig::resolved_kappa_grid() const {
    if (!kappa_grid.empty()) return kappa_grid;
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.05 * i);
    grid.back() = 1.0;
    return grid;
}

ResolvedScenario resolve_scenario(const ExperimentConfig& config) {
    config.validate();
    ResolvedScenario scenario;
    if (config.data.csv_path) {
        CsvSchema schema;
        schema.index_step_hours = config.grid.step_hours;
        scenario.series = load_csv(*config.data.csv_path, schema);
    } else {
        const long length = static_cast<long>(
            std::llround(config.data.days * 24.0 / config.grid.step_hours));
        scenario.series = synth_scenario(config.seed, config.data.households, length,
                                         config.data.profile, config.grid.step_hours);
    }

    const int households = scenario.series.prosumers();
    if (config.prosumers.size() == 1) {
        scenario.params.assign(static_cast<size_t>(households), config.prosumers.front());
        scenario.x0 = Eigen::VectorXd::Constant(households, config.initial_soc.front());
    } else {
        if (static_cast<int>(config.prosumers.size()) != households) {
            config_error("prosumers", "per-household list must match the data (" +
                                          std::to_string(households) + " households)");
        }
        scenario.params = config.prosumers;
        scenario.x0.resize(households);
        for (int i = 0; i < households; ++i) {
            scenario.x0[i] = config.initial_soc[static_cast<size_t>(i)];
        }
    }
    scenario.tube = expand_tube_segments(config.tube_segments, scenario.series.length());
    return scenario;
}

int cmd_simulate(const ExperimentConfig& config) {
    const ResolvedScenario scenario = resolve_scenario(config);
    const long max_steps = scenario.series.length() - config.grid.horizon + 1;
    if (config.mpc.steps > max_steps) {
        config_error("mpc.steps", "scenario supplies forecasts for at most " +
                                      std::to_string(max_steps) + " steps");
    }

    std::filesystem::create_directories(config.out_dir);
    MpcOptions options;
    options.forecast_noise = config.mpc.forecast_noise;
    options.forecast_seed = config.mpc.forecast_seed;

    const ClosedLoopTrace trace =
        run_mpc(scenario.series, scenario.params, scenario.tube, config.grid, scenario.x0,
                config.kappa, config.mpc.steps, config.admm, options);

    std::string csv =
        "row,k,prosumer,u_discharge,u_charge,soc,w,z,z_bar,zeta_bar,tube_lower,tube_upper,"
        "deviation_sq,violation_sq,admm_iterations,converged\n";
    double abs_dev = 0.0;
    for (const auto& step : trace.steps) {
        for (int i = 0; i < scenario.series.prosumers(); ++i) {
            csv += format_csv_row(
                {"prosumer", std::to_string(step.k), scenario.series.prosumer_ids.empty()
                                                         ? std::to_string(i)
                                                         : scenario.series.prosumer_ids[i],
                 format_g9(step.applied[static_cast<size_t>(i)].discharge),
                 format_g9(step.applied[static_cast<size_t>(i)].charge), format_g9(step.soc[i]),
                 format_g9(scenario.series.demand(i, step.k)), format_g9(step.demand[i]), "", "",
                 "", "", "", "", "", ""});
        }
        csv += format_csv_row({"aggregate", std::to_string(step.k), "", "", "", "", "", "",
                               format_g9(step.z_bar), format_g9(step.zeta_bar),
                               format_g9(step.tube_lower), format_g9(step.tube_upper),
                               format_g9(step.deviation_sq), format_g9(step.violation_sq),
                               std::to_string(step.admm_iterations),
                               step.solver_converged ? "1" : "0"});
        abs_dev += std::abs(step.z_bar - step.zeta_bar);
    }
    write_file(std::filesystem::path(config.out_dir) / "trace.csv", csv);

    json summary;
    summary["kappa"] = g9(config.kappa);
    summary["steps"] = static_cast<long>(trace.steps.size());
    summary["mean_abs_deviation"] = g9(abs_dev / static_cast<double>(trace.steps.size()));
    summary["deviation_sq_total"] = g9(trace.deviation_sq_total);
    summary["total_tube_violation_sq"] = g9(trace.violation_sq_total);
    summary["all_converged"] = trace.all_converged;
    json events = json::array();
    for (const auto& event : trace.events) {
        events.push_back({{"k", event.k}, {"message", event.message}});
    }
    summary["events"] = events;
    write_file(std::filesystem::path(config.out_dir) / "summary.json", summary.dump(2) + "\n");
    write_manifest(config, "simulate");
    return trace.all_converged ? 0 : 2;
}

int cmd_pareto(const ExperimentConfig& config, const std::vector<double>& tradeoff_anchors) {
    const ResolvedScenario scenario = resolve_scenario(config);
    std::filesystem::create_directories(config.out_dir);

    std::vector<double> grid = config.resolved_kappa_grid();
    if (!tradeoff_anchors.empty()) {
        std::set<double> merged(grid.begin(), grid.end());
        merged.insert(0.01);
        merged.insert(0.99);
        grid.assign(merged.begin(), merged.end());
    }

    AdmmConfig admm = config.admm;
    admm.record_history = config.trace;
    const HorizonProblem horizon = first_window(config, scenario);
    const FrontierSweep frontier = sweep(horizon, grid, admm);

    write_file(std::filesystem::path(config.out_dir) / "frontier.csv", frontier_csv(frontier));
    if (config.trace) {
        for (size_t i = 0; i < frontier.results.size(); ++i) {
            write_iteration_trace(std::filesystem::path(config.out_dir) /
                                      ("admm_trace_kappa" + format_g9(grid[i]) + ".csv"),
                                  frontier.results[i], grid[i]);
        }
    }

    json summary;
    summary["points"] = static_cast<long>(frontier.points.size());
    summary["all_converged"] = frontier.all_converged;
    summary["monotone"] = frontier.monotonicity.monotone;
    summary["strict_over_range"] = frontier.monotonicity.strict_over_range;
    summary["monotonicity_tolerance"] = g9(frontier.monotonicity.tolerance);

    json bounds = json::array();
    for (double anchor : tradeoff_anchors) {
        const TradeoffBound bound = tradeoff_bound(frontier, anchor);
        std::string csv = "kappa1,g,h,L\n";
        for (const auto& entry : bound.table) {
            csv += format_csv_row({format_g9(entry.kappa1), format_g9(entry.g_val),
                                   format_g9(entry.h_val), format_g9(entry.bound)});
        }
        csv += format_csv_row({"L_star", "", "", format_g9(bound.L_star)});
        write_file(std::filesystem::path(config.out_dir) /
                       ("tradeoff_" + format_g9(anchor) + ".csv"),
                   csv);
        bounds.push_back({{"kappa0", g9(anchor)}, {"L_star", g9(bound.L_star)}});
    }
    summary["tradeoff_bounds"] = bounds;
    write_file(std::filesystem::path(config.out_dir) / "summary.json", summary.dump(2) + "\n");
    write_manifest(config, "pareto");

    if (!frontier.all_converged || !frontier.monotonicity.monotone) {
        std::cerr << "pareto: frontier check failed;";
        if (!frontier.monotonicity.monotone) {
            std::cerr << " non-monotone at adjacent pairs:";
            for (int index : frontier.monotonicity.offending) std::cerr << ' ' << index;
        }
        std::cerr << " unconverged points:";
        for (const auto& p : frontier.points) {
            if (!p.converged) std::cerr << ' ' << format_g9(p.kappa);
        }
        std::cerr << '\n';
        return 2;
    }
    return 0;
}

int cmd_sensitivity(const ExperimentConfig& config, const std::string& axis,
                    const std::vector<double>& values) {
    if (axis != "tube_width" && axis != "initial_soc") {
        config_error("axis", "must be tube_width or initial_soc");
    }
    if (values.empty()) config_error("values", "at least one axis value required");
    const ResolvedScenario base = resolve_scenario(config);
    std::filesystem::create_directories(config.out_dir);

    double min_capacity = base.params.front().capacity;
    for (const auto& p : base.params) min_capacity = std::min(min_capacity, p.capacity);
    for (double value : values) {
        if (axis == "tube_width" && !(value > 0.0)) {
            config_error("values", "tube widths must be > 0");
        }
        if (axis == "initial_soc" && !(value >= 0.0 && value <= min_capacity)) {
            config_error("values", "initial SOC must lie in [0, capacity] for every prosumer");
        }
    }

    std::string combined = "axis,value,kappa,g,h,f_tilde,refined,iterations\n";
    bool all_converged = true;
    json per_value = json::array();
    for (double value : values) {
        ExperimentConfig variant = config;
        ResolvedScenario scenario = base;
        if (axis == "tube_width") {
            // Shift both bounds symmetrically about the midpoint.
            std::vector<TubeSegment> segments = config.tube_segments;
            for (auto& seg : segments) {
                const double mid = 0.5 * (seg.lower + seg.upper);
                seg.lower = mid - 0.5 * value;
                seg.upper = mid + 0.5 * value;
            }
            variant.tube_segments = segments;
            scenario.tube = expand_tube_segments(segments, scenario.series.length());
        } else {
            variant.initial_soc.assign(variant.prosumers.size(), value);
            scenario.x0.setConstant(value);
        }

        const HorizonProblem horizon = first_window(variant, scenario);
        const FrontierSweep frontier =
            sweep(horizon, variant.resolved_kappa_grid(), variant.admm);
        all_converged = all_converged && frontier.all_converged;

        write_file(std::filesystem::path(config.out_dir) /
                       ("frontier_" + axis + "_" + format_g9(value) + ".csv"),
                   frontier_csv(frontier));
        for (const auto& p : frontier.points) {
            combined += format_csv_row({axis, format_g9(value), format_g9(p.kappa),
                                        format_g9(p.g_val), format_g9(p.h_val),
                                        format_g9(p.f_tilde), p.refined ? "1" : "0",
                                        std::to_string(p.admm_iterations)});
        }
        per_value.push_back({{"value", g9(value)},
                             {"all_converged", frontier.all_converged},
                             {"monotone", frontier.monotonicity.monotone}});
    }
    write_file(std::filesystem::path(config.out_dir) / "combined.csv", combined);

    json summary;
    summary["axis"] = axis;
    summary["values"] = per_value;
    summary["all_converged"] = all_converged;
    write_file(std::filesystem::path(config.out_dir) / "summary.json", summary.dump(2) + "\n");
    write_manifest(config, "sensitivity");
    return all_converged ? 0 : 2;
}

int cmd_admm_diagnose(const ExperimentConfig& config, const std::vector<double>& rho_values) {
    const ResolvedScenario scenario = resolve_scenario(config);
    std::filesystem::create_directories(config.out_dir);
    const HorizonProblem horizon = first_window(config, scenario);

    std::vector<double> rhos = rho_values;
    if (rhos.empty()) rhos.push_back(config.admm.rho);

    bool all_converged = true;
    json reports = json::array();
    for (double rho : rhos) {
        AdmmConfig admm = config.admm;
        admm.rho = rho;
        admm.kappa = config.kappa;
        admm.record_history = true;
        const AdmmResult result = run_admm(horizon, admm);
        all_converged = all_converged && result.converged;

        const std::string suffix = rhos.size() == 1 ? "" : "_rho" + format_g9(rho);
        write_iteration_trace(
            std::filesystem::path(config.out_dir) / ("admm_trace" + suffix + ".csv"), result,
            config.kappa);

        const ConvergenceReport report =
            diagnose_convergence(result.history, rho, horizon.prosumers());
        const double f = scalarized(config.kappa, result.g_val, result.h_val);
        const double f_hat_final =
            scalarized(config.kappa, result.g_hat_val, result.h_hat_val);
        json entry;
        entry["rho"] = g9(rho);
        entry["converged"] = result.converged;
        entry["reason"] = result.reason;
        entry["iterations"] = result.iterations;
        entry["final_primal_residual"] = g9(report.final_primal_residual);
        entry["final_dual_residual"] = g9(report.final_dual_residual);
        entry["primal_slope_log10"] = g9(report.primal_slope_log10);
        entry["penalty_term"] = g9(report.penalty_term);
        entry["dual_norm_term"] = g9(report.dual_norm_term);
        entry["penalty_rel_deviation"] = g9(report.penalty_rel_deviation);
        entry["final_cost_residual"] = g9(std::abs(f - f_hat_final));
        entry["g"] = g9(result.g_val);
        entry["h"] = g9(result.h_val);
        reports.push_back(entry);
    }

    json summary;
    summary["kappa"] = g9(config.kappa);
    summary["runs"] = reports;
    summary["all_converged"] = all_converged;
    write_file(std::filesystem::path(config.out_dir) / "report.json", summary.dump(2) + "\n");
    write_manifest(config, "admm-diagnose");
    return all_converged ? 0 : 2;
}

}  // namespace gridmop::cli
