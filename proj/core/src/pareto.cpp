#include "gridmop/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridmop {

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty kappa grid");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
            throw std::invalid_argument("sweep: kappa grid values must lie in [0, 1]");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("sweep: kappa grid must be strictly increasing");
        }
    }
}

MonotonicityReport check_monotonicity(const std::vector<ParetoPoint>& points, double tolerance) {
    MonotonicityReport report;
    report.tolerance = tolerance;
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        const double g_increase = points[i + 1].g_val - points[i].g_val;
        const double h_decrease = points[i].h_val - points[i + 1].h_val;
        if (g_increase > tolerance || h_decrease > tolerance) {
            report.monotone = false;
            report.offending.push_back(static_cast<int>(i));
        }
        report.max_g_violation = std::max(report.max_g_violation, g_increase);
        report.max_h_violation = std::max(report.max_h_violation, h_decrease);
    }
    if (points.size() >= 2) {
        report.strict_over_range = points.front().g_val - points.back().g_val > tolerance &&
                                   points.back().h_val - points.front().h_val > tolerance;
    }
    return report;
}

AdmmWarmStart warm_from(const AdmmResult& result) {
    AdmmWarmStart warm;
    warm.z0 = result.z;
    warm.lambda0 = result.lambda_bar;
    warm.pi0 = result.pi;
    return warm;
}

}  // namespace

AdmmResult refine_kappa0_run(std::span<const std::unique_ptr<ProsumerEndpoint>> endpoints,
                             const Eigen::VectorXd& zeta_bar, const TubeSpec& tube,
                             const SlackVector& s_star, const AdmmConfig& config,
                             const AdmmWarmStart* warm) {
    const int prosumers = static_cast<int>(endpoints.size());
    const double rho = config.rho;
    const Eigen::VectorXd lo = tube.lower - s_star.lower;
    const Eigen::VectorXd hi = tube.upper + s_star.upper;

    // Restricted CE projection: minimize the tracking term plus the
    // penalty over the box the fixed slack leaves open; slack is carried
    // through unchanged.
    CeUpdateFn restricted = [&zeta_bar, &s_star, lo, hi, rho, prosumers](
                                const Eigen::VectorXd& z_bar_new,
                                const Eigen::VectorXd& lambda_bar) {
        const double q = rho * static_cast<double>(prosumers);
        CeSolution out;
        out.a_bar.resize(z_bar_new.size());
        for (Eigen::Index n = 0; n < z_bar_new.size(); ++n) {
            const double d = z_bar_new[n] + lambda_bar[n] / rho;
            const double unconstrained = (2.0 * zeta_bar[n] + q * d) / (2.0 + q);
            out.a_bar[n] = std::clamp(unconstrained, lo[n], hi[n]);
        }
        out.s = s_star;
        return out;
    };

    return run_admm_core(endpoints, zeta_bar, tube, config, 0.0, warm, restricted);
}

Eigen::VectorXd refine_kappa0(const HorizonProblem& horizon, const SlackVector& s_star,
                              const AdmmConfig& config) {
    horizon.validate();
    if (s_star.lower.size() != horizon.grid.horizon) {
        throw std::invalid_argument("refine_kappa0: slack length must equal the horizon");
    }
    LocalSolverOptions local_options;
    local_options.kkt_tol = config.local_kkt_tol(horizon.grid.horizon);
    auto endpoints = make_prosumer_endpoints(horizon, local_options);
    return refine_kappa0_run(endpoints, horizon.zeta_bar, horizon.tube, s_star, config).z_bar;
}

SlackVector refine_kappa1(const Eigen::VectorXd& z_bar_star, const TubeSpec& tube) {
    return minimal_slack(z_bar_star, tube);
}

FrontierSweep sweep(const HorizonProblem& horizon, std::span<const double> kappa_grid,
                    const AdmmConfig& config, bool warm_start) {
    horizon.validate();
    config.validate();
    check_grid(kappa_grid);

    LocalSolverOptions local_options;
    local_options.kkt_tol = config.local_kkt_tol(horizon.grid.horizon);
    auto endpoints = make_prosumer_endpoints(horizon, local_options);

    FrontierSweep frontier;
    frontier.points.reserve(kappa_grid.size());

    AdmmWarmStart warm;
    bool have_warm = false;
    for (double kappa : kappa_grid) {
        AdmmConfig point_config = config;
        point_config.kappa = kappa;
        const AdmmResult result = run_admm_core(endpoints, horizon.zeta_bar, horizon.tube,
                                                point_config, kappa,
                                                (warm_start && have_warm) ? &warm : nullptr, {});
        ParetoPoint point;
        point.kappa = kappa;
        point.converged = result.converged;
        point.admm_iterations = result.iterations;

        if (kappa == 0.0) {
            // Fix the unique optimal slack, then push the aggregate to the
            // tracking optimum it still allows.
            const AdmmWarmStart refine_warm = warm_from(result);
            const AdmmResult refined = refine_kappa0_run(endpoints, horizon.zeta_bar, horizon.tube,
                                                         result.s, point_config, &refine_warm);
            point.g_val = g_hat(refined.z_bar, horizon.zeta_bar);
            point.h_val = h_of(result.s);
            point.refined = true;
            point.converged = result.converged && refined.converged;
            point.admm_iterations += refined.iterations;
        } else if (kappa == 1.0) {
            // The aggregate is unique; pair it with its minimal slack.
            point.g_val = g_hat(result.z_bar, horizon.zeta_bar);
            point.h_val = h_of(refine_kappa1(result.z_bar, horizon.tube));
            point.refined = true;
        } else {
            point.g_val = result.g_val;
            point.h_val = result.h_val;
        }
        point.f_tilde = scalarized(kappa, point.g_val, point.h_val);
        frontier.all_converged = frontier.all_converged && point.converged;
        frontier.points.push_back(point);

        warm = warm_from(result);
        have_warm = true;
        frontier.results.push_back(result);
    }

    const double tol = 10.0 * config.resolved_primal_tol(horizon.grid.horizon);
    frontier.monotonicity = check_monotonicity(frontier.points, tol);
    return frontier;
}

TradeoffBound tradeoff_bound(const FrontierSweep& sweep, double kappa0, double denominator_tol) {
    const auto anchor = std::find_if(sweep.points.begin(), sweep.points.end(),
                                     [&](const ParetoPoint& p) {
                                         return std::abs(p.kappa - kappa0) <= 1e-12;
                                     });
    if (anchor == sweep.points.end()) {
        throw std::invalid_argument("tradeoff_bound: kappa0 is not a sweep grid point");
    }
    const double g0 = anchor->g_val;
    const double h0 = anchor->h_val;

    TradeoffBound bound;
    bound.kappa0 = anchor->kappa;
    bound.table.reserve(sweep.points.size());
    for (const ParetoPoint& p : sweep.points) {
        TradeoffEntry entry;
        entry.kappa1 = p.kappa;
        entry.g_val = p.g_val;
        entry.h_val = p.h_val;
        const double dg = g0 - p.g_val;
        const double dh = h0 - p.h_val;
        if (std::abs(dg) <= denominator_tol) {
            entry.bound = 0.0;  // tie in g, ill-defined case formula
        } else if (dg > 0.0) {
            const double denom = -dh;  // h_{k1} - h_{k0}
            entry.bound = std::abs(denom) > denominator_tol ? dg / denom : 0.0;
        } else {
            entry.bound = dh / (-dg);
        }
        bound.L_star = std::max(bound.L_star, entry.bound);
        bound.table.push_back(entry);
    }
    return bound;
}

FrontierGraph FrontierGraph::from_sweep(const FrontierSweep& sweep) {
    if (sweep.points.size() < 2) {
        throw std::invalid_argument("FrontierGraph: need at least two sweep points");
    }
    FrontierGraph graph;
    // Grid order has g strictly decreasing; store ascending in g.
    for (auto it = sweep.points.rbegin(); it != sweep.points.rend(); ++it) {
        if (!graph.g_.empty() && !(it->g_val > graph.g_.back())) {
            throw std::invalid_argument(
                "FrontierGraph: sweep is not strictly monotone in g (unconverged points?)");
        }
        graph.g_.push_back(it->g_val);
        graph.h_.push_back(it->h_val);
    }
    return graph;
}

double FrontierGraph::operator()(double g) const {
    if (g < g_.front() - 1e-12 || g > g_.back() + 1e-12) {
        throw std::invalid_argument("FrontierGraph: argument outside [g_min, g_max]");
    }
    const double clamped = std::clamp(g, g_.front(), g_.back());
    const auto upper = std::upper_bound(g_.begin(), g_.end(), clamped);
    const size_t hi = std::min(static_cast<size_t>(upper - g_.begin()), g_.size() - 1);
    const size_t lo = hi == 0 ? 0 : hi - 1;
    if (hi == lo) return h_[lo];
    const double t = (clamped - g_[lo]) / (g_[hi] - g_[lo]);
    return h_[lo] + t * (h_[hi] - h_[lo]);
}

}  // namespace gridmop
