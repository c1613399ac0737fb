#include "gridmop/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridmop {

namespace {

void check_lengths(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

Eigen::MatrixXd realized_demands(std::span<const ControlSequence> controls,
                                 const Eigen::MatrixXd& net_consumption,
                                 std::span<const ProsumerParams> params) {
    const int prosumers = static_cast<int>(net_consumption.rows());
    if (static_cast<int>(controls.size()) != prosumers ||
        static_cast<int>(params.size()) != prosumers) {
        throw std::invalid_argument("objectives: one control sequence and parameter set per prosumer required");
    }
    Eigen::MatrixXd z(prosumers, net_consumption.cols());
    for (int i = 0; i < prosumers; ++i) {
        z.row(i) = demand_output(net_consumption.row(i), controls[i], params[i]).transpose();
    }
    return z;
}

}  // namespace

void TubeSpec::validate() const {
    if (lower.size() != upper.size()) throw std::invalid_argument("tube bound lengths differ");
    for (Eigen::Index n = 0; n < lower.size(); ++n) {
        if (!(lower[n] <= upper[n])) {
            throw std::invalid_argument("tube lower bound above upper bound at step " + std::to_string(n));
        }
        if (!std::isfinite(lower[n]) || !std::isfinite(upper[n])) {
            throw std::invalid_argument("tube bounds must be finite");
        }
    }
}

TubeSpec TubeSpec::slice(long k, int horizon) const {
    if (k < 0 || k + horizon > lower.size()) {
        throw std::invalid_argument("tube slice outside the specified range");
    }
    TubeSpec out;
    out.lower = lower.segment(k, horizon);
    out.upper = upper.segment(k, horizon);
    return out;
}

TubeSpec expand_tube_segments(std::span<const TubeSegment> segments, long length) {
    if (segments.empty()) throw std::invalid_argument("tube needs at least one segment");
    if (segments.front().from_step != 0) {
        throw std::invalid_argument("first tube segment must start at step 0");
    }
    for (size_t s = 1; s < segments.size(); ++s) {
        if (segments[s].from_step <= segments[s - 1].from_step) {
            throw std::invalid_argument("tube segments must have increasing start steps");
        }
    }
    TubeSpec tube;
    tube.lower.resize(length);
    tube.upper.resize(length);
    size_t seg = 0;
    for (long n = 0; n < length; ++n) {
        while (seg + 1 < segments.size() && segments[seg + 1].from_step <= n) ++seg;
        tube.lower[n] = segments[seg].lower;
        tube.upper[n] = segments[seg].upper;
    }
    tube.validate();
    return tube;
}

SlackVector SlackVector::zeros(int steps) {
    SlackVector s;
    s.lower = Eigen::VectorXd::Zero(steps);
    s.upper = Eigen::VectorXd::Zero(steps);
    return s;
}

double eval_J1(std::span<const ControlSequence> controls, const Eigen::MatrixXd& net_consumption,
               const Eigen::VectorXd& zeta_bar, std::span<const ProsumerParams> params,
               const TimeGrid& grid) {
    check_lengths(net_consumption.cols(), grid.horizon, "eval_J1");
    check_lengths(zeta_bar.size(), grid.horizon, "eval_J1");
    const AggregateDemand z_bar = aggregate_demand(realized_demands(controls, net_consumption, params));
    return g_hat(z_bar, zeta_bar) / static_cast<double>(grid.horizon);
}

double eval_J2(std::span<const ControlSequence> controls, const Eigen::MatrixXd& net_consumption,
               const TubeSpec& tube, std::span<const ProsumerParams> params, const TimeGrid& grid) {
    check_lengths(net_consumption.cols(), grid.horizon, "eval_J2");
    check_lengths(tube.lower.size(), grid.horizon, "eval_J2");
    const AggregateDemand z_bar = aggregate_demand(realized_demands(controls, net_consumption, params));
    return h_hat(z_bar, tube);
}

double g_of(const AggregateDemand& z_bar, const Eigen::VectorXd& zeta_bar) {
    check_lengths(z_bar.size(), zeta_bar.size(), "g_of");
    return (z_bar - zeta_bar).squaredNorm();
}

double h_of(const SlackVector& s) {
    check_lengths(s.lower.size(), s.upper.size(), "h_of");
    double total = 0.0;
    for (Eigen::Index n = 0; n < s.lower.size(); ++n) {
        total += s.lower[n] * s.lower[n] + s.upper[n] * s.upper[n];
    }
    return total;
}

double g_hat(const AggregateDemand& z_bar, const Eigen::VectorXd& zeta_bar) {
    return g_of(z_bar, zeta_bar);
}

double h_hat(const AggregateDemand& z_bar, const TubeSpec& tube) {
    check_lengths(z_bar.size(), tube.lower.size(), "h_hat");
    double total = 0.0;
    for (Eigen::Index n = 0; n < z_bar.size(); ++n) {
        const double below = std::max(0.0, tube.lower[n] - z_bar[n]);
        const double above = std::max(0.0, z_bar[n] - tube.upper[n]);
        total += below * below + above * above;
    }
    return total;
}

double f_hat(double kappa, const AggregateDemand& z_bar, const Eigen::VectorXd& zeta_bar,
             const TubeSpec& tube) {
    return scalarized(kappa, g_hat(z_bar, zeta_bar), h_hat(z_bar, tube));
}

SlackVector minimal_slack(const AggregateDemand& z_bar, const TubeSpec& tube) {
    check_lengths(z_bar.size(), tube.lower.size(), "minimal_slack");
    SlackVector s;
    s.lower.resize(z_bar.size());
    s.upper.resize(z_bar.size());
    for (Eigen::Index n = 0; n < z_bar.size(); ++n) {
        s.lower[n] = std::max(0.0, tube.lower[n] - z_bar[n]);
        s.upper[n] = std::max(0.0, z_bar[n] - tube.upper[n]);
    }
    return s;
}

bool in_coupling_set(const AggregateDemand& z_bar, const SlackVector& s, const TubeSpec& tube,
                     double tol) {
    check_lengths(z_bar.size(), tube.lower.size(), "in_coupling_set");
    check_lengths(s.lower.size(), z_bar.size(), "in_coupling_set");
    for (Eigen::Index n = 0; n < z_bar.size(); ++n) {
        if (s.lower[n] < -tol || s.upper[n] < -tol) return false;
        // Violation-vs-slack form: rounds exactly like minimal_slack, so a
        // minimal-slack pair passes with tol = 0.
        if (tube.lower[n] - z_bar[n] > s.lower[n] + tol) return false;
        if (z_bar[n] - tube.upper[n] > s.upper[n] + tol) return false;
    }
    return true;
}

double scalarized(double kappa, double g_val, double h_val) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
        throw std::invalid_argument("scalarized: kappa must be in [0, 1]");
    }
    return kappa * g_val + (1.0 - kappa) * h_val;
}

AggregateDemand aggregate_demand(const Eigen::MatrixXd& demands) {
    if (demands.rows() < 1) throw std::invalid_argument("aggregate_demand: no prosumers");
    return demands.colwise().mean().transpose();
}

}  // namespace gridmop
