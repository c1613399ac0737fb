#ifndef GRIDMOP_MPC_HPP_
#define GRIDMOP_MPC_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridmop/admm.hpp"
#include "gridmop/dataset.hpp"
#include "gridmop/horizon.hpp"

namespace gridmop {

struct MpcOptions {
    /// Per-step scalarization hook; kappa is fixed over the loop when unset.
    std::function<double(long k, double kappa)> kappa_schedule;
    /// Additive forecast perturbation (the plant always sees the true data).
    double forecast_noise = 0.0;
    std::uint64_t forecast_seed = 0;
};

struct ClosedLoopStep {
    long k = 0;
    std::vector<ControlStep> applied;  ///< first control per prosumer
    Eigen::VectorXd soc;               ///< x(k) per prosumer, before applying
    Eigen::VectorXd demand;            ///< realized z_i(k)
    double z_bar = 0.0;
    double zeta_bar = 0.0;
    double tube_lower = 0.0;
    double tube_upper = 0.0;
    double deviation_sq = 0.0;  ///< (z_bar - zeta_bar)^2
    double violation_sq = 0.0;  ///< squared tube violation at this step
    double g_val = 0.0;         ///< window objective reported by the solver
    double h_val = 0.0;
    int admm_iterations = 0;
    bool solver_converged = true;
};

struct MpcEvent {
    long k = 0;
    std::string message;
};

struct ClosedLoopTrace {
    std::vector<ClosedLoopStep> steps;
    Eigen::MatrixXd soc;  ///< I x (steps+1) realized SOC, exact recursion
    double deviation_sq_total = 0.0;
    double violation_sq_total = 0.0;
    std::vector<MpcEvent> events;
    bool all_converged = true;
};

/// Receding-horizon loop: per step, assemble the window problem, find an
/// efficient point for the given kappa (with the kappa in {0,1} auxiliary
/// refinement), apply the first control of each prosumer and advance the
/// SOC by the exact recursion. A solver failure is logged and the step
/// falls back to idle batteries. Requires horizon >= 2 and a scenario long
/// enough to supply every forecast window.
ClosedLoopTrace run_mpc(const NetConsumptionSeries& scenario,
                        const std::vector<ProsumerParams>& params, const TubeSpec& full_tube,
                        const TimeGrid& grid, const Eigen::VectorXd& x0, double kappa,
                        long steps, const AdmmConfig& config, const MpcOptions& options = {});

/// One window solved once, the entire optimal plan applied.
struct OpenLoopResult {
    AdmmResult solve;
    std::vector<ControlSequence> controls;
    Eigen::MatrixXd demand;  ///< I x N realized under the full plan
    Eigen::MatrixXd soc;     ///< I x (N+1)
    Eigen::VectorXd z_bar;
    double g_report = 0.0;  ///< refined pair when kappa is extremal
    double h_report = 0.0;
    bool converged = true;
    int iterations = 0;
};

OpenLoopResult open_loop_run(const HorizonProblem& horizon, const AdmmConfig& config);

}  // namespace gridmop

#endif  // GRIDMOP_MPC_HPP_
