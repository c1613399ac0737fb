#ifndef GRIDMOP_LOCAL_SOLVER_HPP_
#define GRIDMOP_LOCAL_SOLVER_HPP_

#include <vector>

#include <Eigen/Core>

#include "gridmop/prosumer.hpp"
#include "gridmop/qp.hpp"

namespace gridmop {

/// One prosumer-side projection instance: find the feasible output profile
/// closest to `target`, i.e. the Euclidean projection of `target` onto the
/// set of demand profiles reachable under the battery dynamics and
/// constraints from initial SOC `x0`.
struct FeasibleOutputProblem {
    Eigen::VectorXd target;
    Eigen::VectorXd net_consumption;
    double x0 = 0.0;
    ProsumerParams params;
    TimeGrid grid;

    void validate() const;
};

struct LocalSolution {
    Eigen::VectorXd z;
    ControlSequence u;
    SocTrajectory soc;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = true;
};

struct LocalSolverOptions {
    double kkt_tol = 1e-8;
    int max_iters = 0;  ///< 0 picks 10 * N^2 rounded up to at least 50
};

/// Reusable projector for a fixed prosumer and window. Constraints do not
/// change between calls, so both the iterate and the active set are kept to
/// warm-start the next projection.
///
/// The projection is solved in control space as a convex QP in two phases:
/// first the optimal output profile (a ridge of 1e-9 on the flat
/// charge/discharge-cancellation directions makes the Hessian definite),
/// then the minimum-norm control realizing that profile. Calls on the same
/// instance are cheap after the first; distinct instances are independent
/// and safe to use from concurrent workers.
class DiProjector {
  public:
    DiProjector(Eigen::VectorXd net_consumption, double x0, ProsumerParams params,
                TimeGrid grid, LocalSolverOptions options = {});

    /// Output-space projection only (no control recovery).
    const Eigen::VectorXd& project(const Eigen::VectorXd& target);

    /// Projection plus minimum-norm control, SOC trajectory and residual.
    LocalSolution finalize(const Eigen::VectorXd& target);

    const Eigen::VectorXd& net_consumption() const { return w_; }
    int last_iterations() const { return last_iterations_; }
    double last_kkt_residual() const { return last_kkt_residual_; }

  private:
    void solve_phase1(const Eigen::VectorXd& target);

    Eigen::VectorXd w_;
    double x0_;
    ProsumerParams params_;
    TimeGrid grid_;
    LocalSolverOptions options_;

    QpProblem phase1_;             // target enters through the linear term
    Eigen::MatrixXd output_rows_;  // per-step map u -> z(n) - w(n)
    Eigen::VectorXd u_;            // current iterate, feasible at all times
    std::vector<int> working_set_;
    Eigen::VectorXd z_;
    double last_kkt_residual_ = 0.0;
    int last_iterations_ = 0;
    bool last_converged_ = true;
};

/// One-shot convenience wrapper around DiProjector.
LocalSolution project_onto_Di(const FeasibleOutputProblem& problem,
                              const LocalSolverOptions& options = {});

/// Per-step reachable demand interval, ignoring cross-step coupling: SOC
/// reachability is propagated forward as an interval and each step is
/// bounded independently. Diagnostic aid for infeasibility explanations.
struct DemandEnvelope {
    Eigen::VectorXd z_min;
    Eigen::VectorXd z_max;
};

DemandEnvelope max_demand_envelope(const FeasibleOutputProblem& problem);

}  // namespace gridmop

#endif  // GRIDMOP_LOCAL_SOLVER_HPP_
