#ifndef GRIDMOP_TESTS_ORACLE_HPP_
#define GRIDMOP_TESTS_ORACLE_HPP_

// Test-only reference solvers, independent of the library's solver path:
// a primal log-barrier interior point method and a recursive grid search.
// Objective and feasibility evaluations are written out here rather than
// calling into the library so that oracle agreement means something.

#include <functional>
#include <random>

#include <Eigen/Core>

#include "gridmop/horizon.hpp"
#include "gridmop/local_solver.hpp"

namespace gridmop::testing {

/// min 1/2 y'Py + q'y  s.t.  A y <= b, with P positive semidefinite and the
/// constraint normals spanning every flat direction of P.
struct BarrierProblem {
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

/// Log-barrier path following with damped Newton steps. y0 must be strictly
/// feasible. Stops when the duality gap bound m/t drops below gap_tol.
Eigen::VectorXd barrier_solve(const BarrierProblem& problem, Eigen::VectorXd y0,
                              double gap_tol = 1e-9);

/// Recursive grid refinement over a box with a feasibility predicate.
struct GridSpec {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    int points_per_dim = 7;
    int rounds = 12;
    double shrink = 0.35;
};

struct GridResult {
    Eigen::VectorXd x;
    double value = 0.0;
};

GridResult grid_polish(const GridSpec& spec,
                       const std::function<double(const Eigen::VectorXd&)>& objective,
                       const std::function<bool(const Eigen::VectorXd&)>& feasible);

/// Scalarized objective of a joint control vector (u-, u+ per step per
/// prosumer), slack eliminated through the minimal-slack identity.
double scalarized_value_of_controls(const HorizonProblem& horizon, double kappa,
                                    const Eigen::VectorXd& u);

/// True iff the joint control vector satisfies rate, combined-rate and SOC
/// constraints (tolerance tol).
bool controls_feasible(const HorizonProblem& horizon, const Eigen::VectorXd& u, double tol = 1e-9);

/// Centralized optimum of the scalarized problem by the barrier method.
double centralized_optimum_barrier(const HorizonProblem& horizon, double kappa,
                                   double gap_tol = 1e-9);

/// Same by grid refinement over the joint control box; practical for
/// 2*N*I <= 8 variables.
double centralized_optimum_grid(const HorizonProblem& horizon, double kappa);

/// Single-prosumer squared projection distance min ||z(u) - target||^2.
double projection_distance_barrier(const FeasibleOutputProblem& problem, double gap_tol = 1e-10);
double projection_distance_grid(const FeasibleOutputProblem& problem);

/// Random solvable instance; `conflicting` places the reference outside the
/// tube so the two objectives pull in opposite directions.
HorizonProblem random_instance(std::mt19937_64& rng, int prosumers, int horizon,
                               bool conflicting);

/// Random feasible control sequence for one prosumer (rejection-free:
/// scaled down until the SOC trajectory fits).
ControlSequence random_feasible_controls(std::mt19937_64& rng, const ProsumerParams& params,
                                         const TimeGrid& grid, double x0);

}  // namespace gridmop::testing

#endif  // GRIDMOP_TESTS_ORACLE_HPP_
