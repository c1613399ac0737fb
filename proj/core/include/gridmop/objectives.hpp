#ifndef GRIDMOP_OBJECTIVES_HPP_
#define GRIDMOP_OBJECTIVES_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gridmop/prosumer.hpp"

namespace gridmop {

/// Average power demand per horizon step.
using AggregateDemand = Eigen::VectorXd;

/// Time-varying bounds on the average demand. lower(n) <= upper(n).
struct TubeSpec {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int steps() const { return static_cast<int>(lower.size()); }
    void validate() const;
    /// Window [k, k+horizon) of a full-length tube.
    TubeSpec slice(long k, int horizon) const;
};

/// Piecewise-constant tube description: each segment applies from
/// `from_step` (absolute index) until the next segment starts.
struct TubeSegment {
    long from_step = 0;
    double lower = 0.0;
    double upper = 0.0;
};

TubeSpec expand_tube_segments(std::span<const TubeSegment> segments, long length);

/// Nonnegative relaxation of the tube constraints, one pair per step.
struct SlackVector {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int steps() const { return static_cast<int>(lower.size()); }
    static SlackVector zeros(int steps);
};

/// Feasible objective value pair (g, h); both are squared norms.
struct ObjectivePair {
    double g_val = 0.0;
    double h_val = 0.0;
};

/// Average tracking objective (with the 1/N factor):
///   J1 = 1/N * sum_n ( 1/I * sum_i [w_i(n)+u_i+(n)+gamma_i*u_i-(n)] - zeta(n) )^2.
double eval_J1(std::span<const ControlSequence> controls, const Eigen::MatrixXd& net_consumption,
               const Eigen::VectorXd& zeta_bar, std::span<const ProsumerParams> params,
               const TimeGrid& grid);

/// Tube violation objective:
///   J2 = sum_n [ max{0, zbar(n)-upper(n)}^2 + max{0, lower(n)-zbar(n)}^2 ].
double eval_J2(std::span<const ControlSequence> controls, const Eigen::MatrixXd& net_consumption,
               const TubeSpec& tube, std::span<const ProsumerParams> params, const TimeGrid& grid);

/// Canonical tracking objective without the 1/N factor, g = ||zbar - zeta||^2.
/// N * eval_J1 == g_hat(zbar) with zbar assembled from demand_output.
double g_of(const AggregateDemand& z_bar, const Eigen::VectorXd& zeta_bar);

/// h = ||s||^2, summed per step as s_lower(n)^2 + s_upper(n)^2.
double h_of(const SlackVector& s);

/// Tracking value of a realized aggregate, identical formula to g_of.
double g_hat(const AggregateDemand& z_bar, const Eigen::VectorXd& zeta_bar);

/// Squared tube violation of a realized aggregate; equals h_of of the
/// minimal slack bit for bit (same per-step evaluation order).
double h_hat(const AggregateDemand& z_bar, const TubeSpec& tube);

double f_hat(double kappa, const AggregateDemand& z_bar, const Eigen::VectorXd& zeta_bar,
             const TubeSpec& tube);

/// Smallest slack making z_bar satisfy the relaxed tube constraints:
/// s_upper(n) = max{0, zbar(n)-upper(n)}, s_lower(n) = max{0, lower(n)-zbar(n)}.
SlackVector minimal_slack(const AggregateDemand& z_bar, const TubeSpec& tube);

/// Membership in the coupling set: s >= 0 and
/// lower(n) - s_lower(n) <= zbar(n) <= upper(n) + s_upper(n), boundary included.
bool in_coupling_set(const AggregateDemand& z_bar, const SlackVector& s, const TubeSpec& tube,
                     double tol = 0.0);

/// Weighted sum kappa*g + (1-kappa)*h. Throws if kappa is outside [0, 1].
double scalarized(double kappa, double g_val, double h_val);

/// Column-wise average of per-prosumer demand profiles (rows = prosumers).
AggregateDemand aggregate_demand(const Eigen::MatrixXd& demands);

}  // namespace gridmop

#endif  // GRIDMOP_OBJECTIVES_HPP_
