#ifndef GRIDMOP_ADMM_HPP_
#define GRIDMOP_ADMM_HPP_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridmop/ce_solver.hpp"
#include "gridmop/horizon.hpp"
#include "gridmop/local_solver.hpp"
#include "gridmop/objectives.hpp"

namespace gridmop {

struct AdmmConfig {
    double rho = 1e-3;
    int max_iters = 500;
    /// Residual thresholds; negative values resolve to 1e-6 * sqrt(N).
    double primal_tol = -1.0;
    double dual_tol = -1.0;
    /// Scalarization weight; the sentinel -1 defers to HorizonProblem::kappa.
    double kappa = -1.0;
    /// Keep per-iteration snapshots for diagnostics.
    bool record_history = false;

    void validate() const;
    double resolved_primal_tol(int horizon) const;
    double resolved_dual_tol(int horizon) const;
    /// Prosumer subproblem tolerance, coupled to the outer tolerances.
    double local_kkt_tol(int horizon) const;
};

/// One iteration snapshot (recorded when AdmmConfig::record_history is set).
struct AdmmState {
    int iteration = 0;
    Eigen::MatrixXd z;
    Eigen::VectorXd z_bar;
    Eigen::VectorXd a_bar;
    SlackVector s;
    Eigen::VectorXd lambda_bar;
    Eigen::VectorXd pi;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double g_val = 0.0;      ///< g(a_bar)
    double h_val = 0.0;      ///< h(s)
    double g_hat_val = 0.0;  ///< g evaluated on the realized aggregate
    double h_hat_val = 0.0;  ///< tube violation of the realized aggregate
    double penalty = 0.0;    ///< (rho I/2)||z_bar - a_bar + lambda/rho||^2
};

struct AdmmResult {
    bool converged = false;
    std::string reason;
    Eigen::MatrixXd z;  ///< final per-prosumer output profiles (I x N)
    Eigen::VectorXd z_bar;
    Eigen::VectorXd a_bar;
    SlackVector s;
    Eigen::VectorXd lambda_bar;
    Eigen::VectorXd pi;
    double g_val = 0.0;
    double h_val = 0.0;
    double g_hat_val = 0.0;
    double h_hat_val = 0.0;
    double penalty_term = 0.0;
    int iterations = 0;
    Eigen::VectorXd primal_residuals;
    Eigen::VectorXd dual_residuals;
    std::vector<AdmmState> history;
    std::vector<LocalSolution> locals;  ///< controls realizing z, per prosumer

    double scalarized_objective(double kappa) const { return scalarized(kappa, g_val, h_val); }
};

struct AdmmWarmStart {
    Eigen::MatrixXd z0;
    Eigen::VectorXd lambda0;
    Eigen::VectorXd pi0;
};

/// Prosumer side of the exchange: the coordinator never sees battery
/// parameters or SOC, only output profiles crossing this interface.
class ProsumerEndpoint {
  public:
    virtual ~ProsumerEndpoint() = default;
    /// Cold-start profile (the uncontrolled net consumption).
    virtual Eigen::VectorXd initial_profile() const = 0;
    /// Best feasible output profile for the broadcast target.
    virtual Eigen::VectorXd update(const Eigen::VectorXd& target) = 0;
    /// Same solve plus the realizing control sequence.
    virtual LocalSolution finalize(const Eigen::VectorXd& target) = 0;
};

std::vector<std::unique_ptr<ProsumerEndpoint>> make_prosumer_endpoints(
    const HorizonProblem& horizon, const LocalSolverOptions& options);

/// Replaceable CE update; the default solves the scalarized CE problem.
using CeUpdateFn = std::function<CeSolution(const Eigen::VectorXd& z_bar_new,
                                            const Eigen::VectorXd& lambda_bar)>;

/// The coordinator loop over caller-supplied endpoints. Step 1 fans out in
/// parallel with deterministic, index-ordered aggregation; Step 2 runs the
/// CE update, the dual ascent and the broadcast. Stops when both residuals
/// fall below their thresholds or the iteration budget is exhausted.
/// Throws on non-finite iterates.
AdmmResult run_admm_core(std::span<const std::unique_ptr<ProsumerEndpoint>> endpoints,
                         const Eigen::VectorXd& zeta_bar, const TubeSpec& tube,
                         const AdmmConfig& config, double kappa,
                         const AdmmWarmStart* warm = nullptr,
                         const CeUpdateFn& ce_update = {});

/// Full solve of one horizon problem.
AdmmResult run_admm(const HorizonProblem& horizon, const AdmmConfig& config,
                    const AdmmWarmStart* warm = nullptr);

/// Post-hoc analysis of a recorded iterate history.
struct ConvergenceReport {
    int iterations = 0;
    double final_primal_residual = 0.0;
    double final_dual_residual = 0.0;
    /// Least-squares slope of log10(primal residual) per iteration.
    double primal_slope_log10 = 0.0;
    double penalty_term = 0.0;
    double dual_norm_term = 0.0;  ///< (I/(2 rho)) ||lambda||^2
    double penalty_rel_deviation = 0.0;
    Eigen::VectorXd g_gap;  ///< |g(a_bar) - g(z_bar)| per iteration
    Eigen::VectorXd h_gap;  ///< |h(s) - h_hat(z_bar)| per iteration
};

ConvergenceReport diagnose_convergence(std::span<const AdmmState> history, double rho,
                                       int prosumers);

}  // namespace gridmop

#endif  // GRIDMOP_ADMM_HPP_
