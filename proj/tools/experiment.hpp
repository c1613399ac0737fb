#ifndef GRIDMOP_TOOLS_EXPERIMENT_HPP_
#define GRIDMOP_TOOLS_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridmop/admm.hpp"
#include "gridmop/dataset.hpp"
#include "gridmop/mpc.hpp"
#include "gridmop/objectives.hpp"

namespace gridmop::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Data source: a CSV export or the synthetic generator.
struct DataConfig {
    std::optional<std::string> csv_path;
    int households = 10;
    double days = 4.0;
    SynthProfile profile;
};

struct MpcRunConfig {
    long steps = 144;
    double forecast_noise = 0.0;
    std::uint64_t forecast_seed = 0;
};

/// One experiment, fully resolved: all defaults filled in, so the emitted
/// manifest reproduces the run bit for bit.
struct ExperimentConfig {
    DataConfig data;
    TimeGrid grid{0.5, 48, 0};
    std::vector<ProsumerParams> prosumers{ProsumerParams{}};  // one entry = shared
    std::vector<double> initial_soc{0.5};                     // one entry = shared
    std::vector<TubeSegment> tube_segments{{0, 0.2, 0.4}, {72, 0.6, 0.8}};
    double kappa = 0.5;
    std::vector<double> kappa_grid;  // empty = 0.05 * [0:20]
    AdmmConfig admm;
    MpcRunConfig mpc;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool trace = false;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);  // accepts a manifest too
    nlohmann::json to_json() const;
    void validate() const;  // field-level messages
    std::vector<double> resolved_kappa_grid() const;
};

/// Scenario materialized from the config.
struct ResolvedScenario {
    NetConsumptionSeries series;
    std::vector<ProsumerParams> params;
    Eigen::VectorXd x0;
    TubeSpec tube;  // expanded over the scenario length
};

ResolvedScenario resolve_scenario(const ExperimentConfig& config);

/// "a:step:b" or a comma-separated list.
std::vector<double> parse_kappa_grid(const std::string& spec);

/// FNV-1a over the canonical config dump.
std::string config_hash(const nlohmann::json& j);

/// Commands; return a process exit code (0 ok, 2 solver trouble).
int cmd_simulate(const ExperimentConfig& config);
int cmd_pareto(const ExperimentConfig& config, const std::vector<double>& tradeoff_anchors);
int cmd_sensitivity(const ExperimentConfig& config, const std::string& axis,
                    const std::vector<double>& values);
int cmd_admm_diagnose(const ExperimentConfig& config, const std::vector<double>& rho_values);

}  // namespace gridmop::cli

#endif  // GRIDMOP_TOOLS_EXPERIMENT_HPP_
