#ifndef GRIDMOP_CE_SOLVER_HPP_
#define GRIDMOP_CE_SOLVER_HPP_

#include <Eigen/Core>

#include "gridmop/objectives.hpp"

namespace gridmop {

/// Data of the central-entity update: minimize
///   kappa*g(a) + (1-kappa)*h(s) + (rho*I/2)*||z_bar_new - a + lambda_bar/rho||^2
/// over (a, s) in the coupling set.
struct CeSubproblem {
    Eigen::VectorXd z_bar_new;
    Eigen::VectorXd lambda_bar;
    double rho = 1e-3;
    double kappa = 0.5;
    int prosumers = 1;
    Eigen::VectorXd zeta_bar;
    TubeSpec tube;

    void validate() const;
};

struct CeSolution {
    Eigen::VectorXd a_bar;
    SlackVector s;
};

/// One time step of the CE problem in reduced form: for fixed a the optimal
/// slack is the minimal slack, leaving a strictly convex piecewise-quadratic
/// scalar problem in a with breakpoints at the tube bounds.
struct CeStepData {
    double penalty_center = 0.0;  ///< z_bar_new + lambda_bar/rho
    double penalty_weight = 0.0;  ///< rho * I
    double kappa = 0.5;
    double zeta = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Exact minimizer over a; closed form per derivative-sign case analysis.
double solve_ce_step(const CeStepData& step);

/// Exact solution of the CE update, decomposed over time steps. The slack
/// block is always resolved by the minimal-slack closed form; for kappa = 1,
/// where any feasible slack is optimal, this is the deterministic choice
/// anticipating the frontier refinement.
CeSolution solve_ce(const CeSubproblem& sub);

}  // namespace gridmop

#endif  // GRIDMOP_CE_SOLVER_HPP_
