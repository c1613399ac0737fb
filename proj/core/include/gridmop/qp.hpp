#ifndef GRIDMOP_QP_HPP_
#define GRIDMOP_QP_HPP_

#include <vector>

#include <Eigen/Core>

namespace gridmop {

/// Dense convex quadratic program
///   min 1/2 x'Hx + c'x   s.t.  A_eq x = b_eq,  A_in x <= b_in
/// with H symmetric positive definite.
struct QpProblem {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;
    Eigen::MatrixXd eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::MatrixXd in_matrix;
    Eigen::VectorXd in_rhs;

    int dim() const { return static_cast<int>(hessian.rows()); }
};

struct QpOptions {
    double kkt_tol = 1e-8;
    int max_iters = 0;  ///< 0 picks 10 * dim^2 + 30
};

struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd eq_multipliers;
    Eigen::VectorXd in_multipliers;  ///< full length, zero on inactive rows
    std::vector<int> working_set;    ///< inequality rows active at the end
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Primal active-set method (null-space steps via QR). `x0` must be
/// feasible; a previous solution's working set can be passed to warm-start.
/// Rows of the hint that are not active at x0 are ignored.
QpResult solve_qp(const QpProblem& problem, const Eigen::VectorXd& x0,
                  const QpOptions& options = {},
                  const std::vector<int>* working_set_hint = nullptr);

/// Max of stationarity, primal/dual infeasibility and complementarity.
double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& eq_multipliers,
                    const Eigen::VectorXd& in_multipliers);

}  // namespace gridmop

#endif  // GRIDMOP_QP_HPP_
