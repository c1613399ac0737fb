#include "gridmop/prosumer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gridmop {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

const char* constraint_name(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::initial_soc: return "initial SOC outside [0, C]";
        case ConstraintKind::soc_lower: return "SOC below 0";
        case ConstraintKind::soc_upper: return "SOC above capacity";
        case ConstraintKind::discharge_rate: return "discharge rate outside [u_min, 0]";
        case ConstraintKind::charge_rate: return "charge rate outside [0, u_max]";
        case ConstraintKind::combined_rate: return "combined rate ratio outside [0, 1]";
    }
    return "unknown constraint";
}

}  // namespace

void ProsumerParams::validate() const {
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1]");
    require(std::isfinite(beta) && beta > 0.0 && beta <= 1.0, "beta must be in (0, 1]");
    require(std::isfinite(gamma) && gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
    require(std::isfinite(capacity) && capacity >= 0.0, "capacity must be >= 0");
    require(std::isfinite(u_min) && u_min < 0.0, "u_min must be < 0");
    require(std::isfinite(u_max) && u_max > 0.0, "u_max must be > 0");
}

void TimeGrid::validate() const {
    require(std::isfinite(step_hours) && step_hours > 0.0, "step_hours must be > 0");
    require(horizon >= 1, "horizon must be >= 1");
    require(start_index >= 0, "start_index must be >= 0");
}

std::string FeasibilityVerdict::describe() const {
    if (feasible) return "feasible";
    std::ostringstream out;
    out << constraint_name(first_violation->kind) << " at step " << first_violation->step
        << " by " << first_violation->amount;
    return out.str();
}

SocTrajectory simulate_soc(double x0, std::span<const ControlStep> controls,
                           const ProsumerParams& params, const TimeGrid& grid) {
    if (static_cast<int>(controls.size()) != grid.horizon) {
        throw std::invalid_argument("simulate_soc: control sequence length does not match horizon");
    }
    SocTrajectory traj;
    traj.values.resize(grid.horizon + 1);
    traj.values[0] = x0;
    for (int n = 0; n < grid.horizon; ++n) {
        traj.values[n + 1] = params.alpha * traj.values[n] +
                             grid.step_hours * (params.beta * controls[n].charge + controls[n].discharge);
    }
    return traj;
}

Eigen::VectorXd demand_output(const Eigen::VectorXd& net_consumption,
                              std::span<const ControlStep> controls,
                              const ProsumerParams& params) {
    if (net_consumption.size() != static_cast<Eigen::Index>(controls.size())) {
        throw std::invalid_argument("demand_output: net consumption and control lengths differ");
    }
    Eigen::VectorXd z(net_consumption.size());
    for (Eigen::Index n = 0; n < z.size(); ++n) {
        z[n] = net_consumption[n] + controls[n].charge + params.gamma * controls[n].discharge;
    }
    return z;
}

FeasibilityVerdict check_feasible(double x0, std::span<const ControlStep> controls,
                                  const ProsumerParams& params, const TimeGrid& grid,
                                  double tol) {
    FeasibilityVerdict verdict;
    auto fail = [&](ConstraintKind kind, int step, double amount) {
        verdict.feasible = false;
        verdict.first_violation = ConstraintViolation{kind, step, amount};
        return verdict;
    };

    if (x0 < -tol) return fail(ConstraintKind::initial_soc, 0, -x0);
    if (x0 > params.capacity + tol) return fail(ConstraintKind::initial_soc, 0, x0 - params.capacity);

    for (int n = 0; n < static_cast<int>(controls.size()); ++n) {
        const auto& u = controls[n];
        if (u.discharge < params.u_min - tol) {
            return fail(ConstraintKind::discharge_rate, n, params.u_min - u.discharge);
        }
        if (u.discharge > tol) return fail(ConstraintKind::discharge_rate, n, u.discharge);
        if (u.charge < -tol) return fail(ConstraintKind::charge_rate, n, -u.charge);
        if (u.charge > params.u_max + tol) {
            return fail(ConstraintKind::charge_rate, n, u.charge - params.u_max);
        }
        const double ratio = u.discharge / params.u_min + u.charge / params.u_max;
        if (ratio < -tol) return fail(ConstraintKind::combined_rate, n, -ratio);
        if (ratio > 1.0 + tol) return fail(ConstraintKind::combined_rate, n, ratio - 1.0);
    }

    const SocTrajectory traj = simulate_soc(x0, controls, params, grid);
    for (int n = 1; n <= grid.horizon; ++n) {
        if (traj.values[n] < -tol) return fail(ConstraintKind::soc_lower, n, -traj.values[n]);
        if (traj.values[n] > params.capacity + tol) {
            return fail(ConstraintKind::soc_upper, n, traj.values[n] - params.capacity);
        }
    }
    return verdict;
}

}  // namespace gridmop
