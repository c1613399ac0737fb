#ifndef GRIDMOP_PROSUMER_HPP_
#define GRIDMOP_PROSUMER_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gridmop {

/// Absolute tolerance on all linear battery constraints.
inline constexpr double kFeasTol = 1e-9;

/// Battery parameters of a single prosumer (residential energy system).
///
/// alpha/beta/gamma are the self-discharge, charging and discharging
/// efficiencies; capacity is the usable energy content in kWh; u_min < 0
/// and u_max > 0 bound the discharge/charge rate in kW.
struct ProsumerParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double capacity = 2.0;
    double u_min = -0.5;
    double u_max = 0.5;

    /// Throws std::invalid_argument if any field is out of range.
    void validate() const;
};

/// One control interval: discharge rate (<= 0) and charge rate (>= 0) in kW.
struct ControlStep {
    double discharge = 0.0;
    double charge = 0.0;
};

using ControlSequence = std::vector<ControlStep>;

/// Time discretization of a prediction window: step length T in hours,
/// horizon N in steps, and the absolute index of the first step.
struct TimeGrid {
    double step_hours = 0.5;
    int horizon = 48;
    long start_index = 0;

    void validate() const;
};

/// State-of-charge trajectory, length N+1 with values[0] = x0.
struct SocTrajectory {
    Eigen::VectorXd values;

    int steps() const { return static_cast<int>(values.size()) - 1; }
};

enum class ConstraintKind {
    initial_soc,
    soc_lower,
    soc_upper,
    discharge_rate,
    charge_rate,
    combined_rate,
};

struct ConstraintViolation {
    ConstraintKind kind;
    int step;
    double amount;
};

/// Outcome of check_feasible. Infeasibility is a verdict, not an error.
struct FeasibilityVerdict {
    bool feasible = true;
    std::optional<ConstraintViolation> first_violation;

    explicit operator bool() const { return feasible; }
    std::string describe() const;
};

/// Rolls the battery recursion x(n+1) = alpha*x(n) + T*(beta*u+(n) + u-(n))
/// over the horizon. No clamping: out-of-range SOC values are returned as
/// computed so that constraint violations stay observable.
SocTrajectory simulate_soc(double x0, std::span<const ControlStep> controls,
                           const ProsumerParams& params, const TimeGrid& grid);

/// Power demand z(n) = w(n) + u+(n) + gamma*u-(n) for each step.
Eigen::VectorXd demand_output(const Eigen::VectorXd& net_consumption,
                              std::span<const ControlStep> controls,
                              const ProsumerParams& params);

/// Checks rate bounds, the combined-rate constraint and the SOC box along
/// the simulated trajectory. Reports the first violated constraint.
FeasibilityVerdict check_feasible(double x0, std::span<const ControlStep> controls,
                                  const ProsumerParams& params, const TimeGrid& grid,
                                  double tol = kFeasTol);

}  // namespace gridmop

#endif  // GRIDMOP_PROSUMER_HPP_
