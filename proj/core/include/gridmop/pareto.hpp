#ifndef GRIDMOP_PARETO_HPP_
#define GRIDMOP_PARETO_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gridmop/admm.hpp"

namespace gridmop {

/// One frontier point. For kappa in {0, 1} the auxiliary refinement has
/// been applied before the (g, h) pair is recorded.
struct ParetoPoint {
    double kappa = 0.0;
    double g_val = 0.0;
    double h_val = 0.0;
    double f_tilde = 0.0;
    bool refined = false;
    bool converged = true;
    int admm_iterations = 0;
};

struct MonotonicityReport {
    bool monotone = true;            ///< within tolerance at every adjacent pair
    bool strict_over_range = false;  ///< g strictly falls and h strictly rises end to end
    double tolerance = 0.0;
    double max_g_violation = 0.0;
    double max_h_violation = 0.0;
    std::vector<int> offending;  ///< left index of each violating adjacent pair
};

struct FrontierSweep {
    std::vector<ParetoPoint> points;  ///< sorted by kappa, strictly increasing
    MonotonicityReport monotonicity;
    bool all_converged = true;
    /// Solver output per point (iteration histories only when the sweep
    /// config sets record_history).
    std::vector<AdmmResult> results;
};

/// Runs the solver across the kappa grid (sorted, within [0, 1]). Each
/// point warm-starts from its predecessor unless disabled; final answers do
/// not depend on the warm start, only iteration counts do. Non-convergence
/// marks the point and the sweep, it does not abort.
FrontierSweep sweep(const HorizonProblem& horizon, std::span<const double> kappa_grid,
                    const AdmmConfig& config, bool warm_start = true);

/// Auxiliary refinement at kappa = 0: minimize the tracking objective over
/// realizable aggregates that stay feasible for the fixed optimal slack.
/// Runs the ADMM machinery with the CE step replaced by the restricted
/// projection. Returns the refined aggregate.
Eigen::VectorXd refine_kappa0(const HorizonProblem& horizon, const SlackVector& s_star,
                              const AdmmConfig& config);

/// Same, on caller-owned endpoints (for warm-started sweeps).
AdmmResult refine_kappa0_run(std::span<const std::unique_ptr<ProsumerEndpoint>> endpoints,
                             const Eigen::VectorXd& zeta_bar, const TubeSpec& tube,
                             const SlackVector& s_star, const AdmmConfig& config,
                             const AdmmWarmStart* warm = nullptr);

/// Auxiliary refinement at kappa = 1: the minimal slack of the optimal
/// aggregate, in closed form.
SlackVector refine_kappa1(const Eigen::VectorXd& z_bar_star, const TubeSpec& tube);

struct TradeoffEntry {
    double kappa1 = 0.0;
    double g_val = 0.0;
    double h_val = 0.0;
    double bound = 0.0;  ///< L_{kappa0}(kappa1)
};

/// Trade-off table of a refined sweep around the point at kappa0 and its
/// maximum, the Geoffrion bound estimate L_star.
struct TradeoffBound {
    double kappa0 = 0.0;
    std::vector<TradeoffEntry> table;
    double L_star = 0.0;
};

/// kappa0 must be one of the sweep's grid values. Differences smaller than
/// denominator_tol fall into the zero branch of the case formula.
TradeoffBound tradeoff_bound(const FrontierSweep& sweep, double kappa0,
                             double denominator_tol = 1e-9);

/// The frontier as the graph of a monotone map from g-values to h-values:
/// the piecewise-linear interpolant through the refined sweep points.
/// Construction requires strictly decreasing g along the grid.
class FrontierGraph {
  public:
    static FrontierGraph from_sweep(const FrontierSweep& sweep);

    /// Interpolated h at a g inside [g_min, g_max]; throws outside.
    double operator()(double g) const;

    double g_min() const { return g_.front(); }
    double g_max() const { return g_.back(); }
    int nodes() const { return static_cast<int>(g_.size()); }

  private:
    std::vector<double> g_;  // ascending
    std::vector<double> h_;
};

}  // namespace gridmop

#endif  // GRIDMOP_PARETO_HPP_
