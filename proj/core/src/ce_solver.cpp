#include "gridmop/ce_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmop {

void CeSubproblem::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("CeSubproblem: rho must be > 0");
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
        throw std::invalid_argument("CeSubproblem: kappa must be in [0, 1]");
    }
    if (prosumers < 1) throw std::invalid_argument("CeSubproblem: prosumers must be >= 1");
    tube.validate();
    const Eigen::Index n = z_bar_new.size();
    if (lambda_bar.size() != n || zeta_bar.size() != n || tube.lower.size() != n) {
        throw std::invalid_argument("CeSubproblem: profile lengths differ");
    }
}

double solve_ce_step(const CeStepData& step) {
    const double q = step.penalty_weight;
    const double k = step.kappa;
    const double d = step.penalty_center;

    // phi(a) = k (a - zeta)^2 + (1-k) [max(0, lower-a)^2 + max(0, a-upper)^2]
    //        + (q/2)(a - d)^2 is C1 and strictly convex (q > 0). The
    // derivative at the breakpoints decides which quadratic piece holds the
    // minimizer.
    const double slope_at_lower = 2.0 * k * (step.lower - step.zeta) + q * (step.lower - d);
    if (slope_at_lower > 0.0) {
        return (2.0 * k * step.zeta + 2.0 * (1.0 - k) * step.lower + q * d) / (2.0 + q);
    }
    const double slope_at_upper = 2.0 * k * (step.upper - step.zeta) + q * (step.upper - d);
    if (slope_at_upper < 0.0) {
        return (2.0 * k * step.zeta + 2.0 * (1.0 - k) * step.upper + q * d) / (2.0 + q);
    }
    return (2.0 * k * step.zeta + q * d) / (2.0 * k + q);
}

CeSolution solve_ce(const CeSubproblem& sub) {
    sub.validate();
    const Eigen::Index n = sub.z_bar_new.size();
    CeSolution out;
    out.a_bar.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        CeStepData step;
        step.penalty_center = sub.z_bar_new[i] + sub.lambda_bar[i] / sub.rho;
        step.penalty_weight = sub.rho * static_cast<double>(sub.prosumers);
        step.kappa = sub.kappa;
        step.zeta = sub.zeta_bar[i];
        step.lower = sub.tube.lower[i];
        step.upper = sub.tube.upper[i];
        out.a_bar[i] = solve_ce_step(step);
    }
    out.s = minimal_slack(out.a_bar, sub.tube);
    return out;
}

}  // namespace gridmop
