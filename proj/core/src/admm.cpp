#include "gridmop/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridmop/parallel.hpp"

namespace gridmop {

namespace {

class DiEndpoint final : public ProsumerEndpoint {
  public:
    DiEndpoint(Eigen::VectorXd net_consumption, double x0, ProsumerParams params, TimeGrid grid,
               LocalSolverOptions options)
        : projector_(std::move(net_consumption), x0, std::move(params), grid, options) {}

    Eigen::VectorXd initial_profile() const override { return projector_.net_consumption(); }
    Eigen::VectorXd update(const Eigen::VectorXd& target) override {
        return projector_.project(target);
    }
    LocalSolution finalize(const Eigen::VectorXd& target) override {
        return projector_.finalize(target);
    }

  private:
    DiProjector projector_;
};

}  // namespace

void AdmmConfig::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("AdmmConfig: rho must be > 0");
    if (max_iters < 1) throw std::invalid_argument("AdmmConfig: max_iters must be >= 1");
    if (kappa != -1.0 && !(kappa >= 0.0 && kappa <= 1.0)) {
        throw std::invalid_argument("AdmmConfig: kappa must be in [0, 1] or the -1 sentinel");
    }
}

double AdmmConfig::resolved_primal_tol(int horizon) const {
    return primal_tol > 0.0 ? primal_tol : 1e-6 * std::sqrt(static_cast<double>(horizon));
}

double AdmmConfig::resolved_dual_tol(int horizon) const {
    return dual_tol > 0.0 ? dual_tol : 1e-6 * std::sqrt(static_cast<double>(horizon));
}

double AdmmConfig::local_kkt_tol(int horizon) const {
    const double outer = std::min(resolved_primal_tol(horizon), resolved_dual_tol(horizon));
    return std::min(outer / 100.0, 1e-8);
}

std::vector<std::unique_ptr<ProsumerEndpoint>> make_prosumer_endpoints(
    const HorizonProblem& horizon, const LocalSolverOptions& options) {
    horizon.validate();
    std::vector<std::unique_ptr<ProsumerEndpoint>> endpoints;
    endpoints.reserve(static_cast<size_t>(horizon.prosumers()));
    for (int i = 0; i < horizon.prosumers(); ++i) {
        endpoints.push_back(std::make_unique<DiEndpoint>(
            horizon.forecast.row(i).transpose(), horizon.x0[i], horizon.params[i], horizon.grid,
            options));
    }
    return endpoints;
}

AdmmResult run_admm_core(std::span<const std::unique_ptr<ProsumerEndpoint>> endpoints,
                         const Eigen::VectorXd& zeta_bar, const TubeSpec& tube,
                         const AdmmConfig& config, double kappa, const AdmmWarmStart* warm,
                         const CeUpdateFn& ce_update) {
    config.validate();
    tube.validate();
    const int prosumers = static_cast<int>(endpoints.size());
    const int horizon = static_cast<int>(zeta_bar.size());
    if (prosumers < 1) throw std::invalid_argument("run_admm: no prosumers");
    if (tube.lower.size() != horizon) throw std::invalid_argument("run_admm: tube length mismatch");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("run_admm: kappa out of range");

    const double rho = config.rho;
    const double primal_tol = config.resolved_primal_tol(horizon);
    const double dual_tol = config.resolved_dual_tol(horizon);

    CeUpdateFn ce = ce_update;
    if (!ce) {
        ce = [&zeta_bar, &tube, rho, kappa, prosumers](const Eigen::VectorXd& z_bar_new,
                                                       const Eigen::VectorXd& lambda_bar) {
            CeSubproblem sub;
            sub.z_bar_new = z_bar_new;
            sub.lambda_bar = lambda_bar;
            sub.rho = rho;
            sub.kappa = kappa;
            sub.prosumers = prosumers;
            sub.zeta_bar = zeta_bar;
            sub.tube = tube;
            return solve_ce(sub);
        };
    }

    Eigen::MatrixXd z(prosumers, horizon);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(horizon);
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(horizon);
    if (warm) {
        if (warm->z0.rows() != prosumers || warm->z0.cols() != horizon ||
            warm->lambda0.size() != horizon || warm->pi0.size() != horizon) {
            throw std::invalid_argument("run_admm: warm start has wrong dimensions");
        }
        z = warm->z0;
        lambda = warm->lambda0;
        pi = warm->pi0;
    } else {
        for (int i = 0; i < prosumers; ++i) {
            z.row(i) = endpoints[i]->initial_profile().transpose();
        }
    }

    AdmmResult result;
    std::vector<double> primal_history;
    std::vector<double> dual_history;
    primal_history.reserve(static_cast<size_t>(config.max_iters));
    dual_history.reserve(static_cast<size_t>(config.max_iters));

    Eigen::MatrixXd targets(prosumers, horizon);
    Eigen::VectorXd z_bar(horizon);
    Eigen::VectorXd a_prev;
    CeSolution ce_sol;

    int iterations = 0;
    bool converged = false;
    while (iterations < config.max_iters) {
        ++iterations;
        // Step 1: prosumers project their shifted profiles in parallel.
        for (int i = 0; i < prosumers; ++i) {
            targets.row(i) = z.row(i) - pi.transpose();
        }
        parallel_for(prosumers, [&](int i) {
            z.row(i) = endpoints[i]->update(targets.row(i).transpose()).transpose();
        });

        // Step 2: aggregate, CE update, dual ascent, broadcast.
        z_bar = z.colwise().mean().transpose();
        ce_sol = ce(z_bar, lambda);
        lambda += rho * (z_bar - ce_sol.a_bar);
        pi = z_bar - ce_sol.a_bar + lambda / rho;

        if (!z_bar.allFinite() || !ce_sol.a_bar.allFinite() || !lambda.allFinite()) {
            throw std::runtime_error(
                "run_admm: non-finite iterate (mis-scaled rho or corrupt input data)");
        }

        const double primal = (z_bar - ce_sol.a_bar).norm();
        const double dual = a_prev.size() > 0
                                ? rho * (ce_sol.a_bar - a_prev).norm()
                                : std::numeric_limits<double>::infinity();
        primal_history.push_back(primal);
        dual_history.push_back(dual);
        a_prev = ce_sol.a_bar;

        if (config.record_history) {
            AdmmState state;
            state.iteration = iterations;
            state.z = z;
            state.z_bar = z_bar;
            state.a_bar = ce_sol.a_bar;
            state.s = ce_sol.s;
            state.lambda_bar = lambda;
            state.pi = pi;
            state.primal_residual = primal;
            state.dual_residual = dual;
            state.g_val = g_of(ce_sol.a_bar, zeta_bar);
            state.h_val = h_of(ce_sol.s);
            state.g_hat_val = g_hat(z_bar, zeta_bar);
            state.h_hat_val = h_hat(z_bar, tube);
            state.penalty = 0.5 * rho * prosumers * pi.squaredNorm();
            result.history.push_back(std::move(state));
        }

        if (primal <= primal_tol && dual <= dual_tol) {
            converged = true;
            break;
        }
    }

    result.converged = converged;
    result.reason = converged ? "residual tolerances reached" : "iteration budget exhausted";
    result.iterations = iterations;
    result.z = z;
    result.z_bar = z_bar;
    result.a_bar = ce_sol.a_bar;
    result.s = ce_sol.s;
    result.lambda_bar = lambda;
    result.pi = pi;
    result.g_val = g_of(ce_sol.a_bar, zeta_bar);
    result.h_val = h_of(ce_sol.s);
    result.g_hat_val = g_hat(z_bar, zeta_bar);
    result.h_hat_val = h_hat(z_bar, tube);
    result.penalty_term = 0.5 * rho * prosumers * pi.squaredNorm();
    result.primal_residuals =
        Eigen::Map<const Eigen::VectorXd>(primal_history.data(), primal_history.size());
    result.dual_residuals =
        Eigen::Map<const Eigen::VectorXd>(dual_history.data(), dual_history.size());

    // Materialize the controls realizing the final profiles.
    result.locals.resize(static_cast<size_t>(prosumers));
    parallel_for(prosumers, [&](int i) {
        result.locals[static_cast<size_t>(i)] = endpoints[i]->finalize(targets.row(i).transpose());
    });
    return result;
}

AdmmResult run_admm(const HorizonProblem& horizon, const AdmmConfig& config,
                    const AdmmWarmStart* warm) {
    horizon.validate();
    config.validate();
    const double kappa = config.kappa >= 0.0 ? config.kappa : horizon.kappa;

    LocalSolverOptions local_options;
    local_options.kkt_tol = config.local_kkt_tol(horizon.grid.horizon);
    auto endpoints = make_prosumer_endpoints(horizon, local_options);
    return run_admm_core(endpoints, horizon.zeta_bar, horizon.tube, config, kappa, warm, {});
}

ConvergenceReport diagnose_convergence(std::span<const AdmmState> history, double rho,
                                       int prosumers) {
    if (history.empty()) throw std::invalid_argument("diagnose_convergence: empty history");

    ConvergenceReport report;
    report.iterations = static_cast<int>(history.size());
    const AdmmState& last = history.back();
    report.final_primal_residual = last.primal_residual;
    report.final_dual_residual = last.dual_residual;

    // Least-squares fit of log10(primal residual) against the iteration
    // index; clipped below to keep exact zeros out of the log.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const int n = report.iterations;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        const double y = std::log10(std::max(history[static_cast<size_t>(i)].primal_residual, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    report.primal_slope_log10 = denom > 0.0 ? (n * sxy - sx * sy) / denom : 0.0;

    report.penalty_term = last.penalty;
    report.dual_norm_term =
        static_cast<double>(prosumers) / (2.0 * rho) * last.lambda_bar.squaredNorm();
    report.penalty_rel_deviation = std::abs(report.penalty_term - report.dual_norm_term) /
                                   (1.0 + std::abs(report.penalty_term));

    report.g_gap.resize(n);
    report.h_gap.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& state = history[static_cast<size_t>(i)];
        report.g_gap[i] = std::abs(state.g_val - state.g_hat_val);
        report.h_gap[i] = std::abs(state.h_val - state.h_hat_val);
    }
    return report;
}

}  // namespace gridmop
