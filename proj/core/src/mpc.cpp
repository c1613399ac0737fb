#include "gridmop/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "gridmop/pareto.hpp"

namespace gridmop {

namespace {

struct HorizonSolve {
    AdmmResult main;
    AdmmResult refined;  // populated only for kappa == 0
    bool used_refinement = false;
    double g_report = 0.0;
    double h_report = 0.0;
    bool converged = true;
    int iterations = 0;

    const AdmmResult& control_source() const { return used_refinement ? refined : main; }
};

/// Solves one window and applies the extremal-kappa refinement so that the
/// reported pair matches the efficient point the controls realize.
HorizonSolve solve_horizon(const HorizonProblem& horizon, const AdmmConfig& config, double kappa,
                           const AdmmWarmStart* warm) {
    LocalSolverOptions local_options;
    local_options.kkt_tol = config.local_kkt_tol(horizon.grid.horizon);
    auto endpoints = make_prosumer_endpoints(horizon, local_options);

    AdmmConfig point_config = config;
    point_config.kappa = kappa;

    HorizonSolve solve;
    solve.main = run_admm_core(endpoints, horizon.zeta_bar, horizon.tube, point_config, kappa,
                               warm, {});
    solve.converged = solve.main.converged;
    solve.iterations = solve.main.iterations;

    if (kappa == 0.0) {
        AdmmWarmStart refine_warm;
        refine_warm.z0 = solve.main.z;
        refine_warm.lambda0 = solve.main.lambda_bar;
        refine_warm.pi0 = solve.main.pi;
        solve.refined = refine_kappa0_run(endpoints, horizon.zeta_bar, horizon.tube, solve.main.s,
                                          point_config, &refine_warm);
        solve.used_refinement = true;
        solve.g_report = g_hat(solve.refined.z_bar, horizon.zeta_bar);
        solve.h_report = h_of(solve.main.s);
        solve.converged = solve.converged && solve.refined.converged;
        solve.iterations += solve.refined.iterations;
    } else if (kappa == 1.0) {
        solve.g_report = g_hat(solve.main.z_bar, horizon.zeta_bar);
        solve.h_report = h_of(refine_kappa1(solve.main.z_bar, horizon.tube));
    } else {
        solve.g_report = solve.main.g_val;
        solve.h_report = solve.main.h_val;
    }
    return solve;
}

AdmmWarmStart shift_warm(const AdmmResult& result) {
    AdmmWarmStart warm;
    const Eigen::Index n = result.z_bar.size();
    warm.z0.resize(result.z.rows(), n);
    warm.z0.leftCols(n - 1) = result.z.rightCols(n - 1);
    warm.z0.col(n - 1) = result.z.col(n - 1);
    warm.lambda0.resize(n);
    warm.lambda0.head(n - 1) = result.lambda_bar.tail(n - 1);
    warm.lambda0[n - 1] = result.lambda_bar[n - 1];
    warm.pi0.resize(n);
    warm.pi0.head(n - 1) = result.pi.tail(n - 1);
    warm.pi0[n - 1] = result.pi[n - 1];
    return warm;
}

}  // namespace

ClosedLoopTrace run_mpc(const NetConsumptionSeries& scenario,
                        const std::vector<ProsumerParams>& params, const TubeSpec& full_tube,
                        const TimeGrid& grid, const Eigen::VectorXd& x0, double kappa,
                        long steps, const AdmmConfig& config, const MpcOptions& options) {
    scenario.validate();
    grid.validate();
    if (grid.horizon < 2) throw std::invalid_argument("run_mpc: horizon must be >= 2");
    if (steps < 1) throw std::invalid_argument("run_mpc: steps must be >= 1");
    if (steps + grid.horizon - 1 > scenario.length()) {
        throw std::invalid_argument("run_mpc: scenario exhausted before step " +
                                    std::to_string(steps));
    }
    if (steps + grid.horizon - 1 > full_tube.lower.size()) {
        throw std::invalid_argument("run_mpc: tube specification shorter than the run");
    }
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("run_mpc: kappa out of range");

    const int prosumer_count = scenario.prosumers();
    const NetConsumptionSeries forecast_series =
        options.forecast_noise > 0.0
            ? perturb_forecast(scenario, options.forecast_seed, options.forecast_noise)
            : scenario;

    ClosedLoopTrace trace;
    trace.steps.reserve(static_cast<size_t>(steps));
    trace.soc.resize(prosumer_count, steps + 1);
    trace.soc.col(0) = x0;

    Eigen::VectorXd x = x0;
    AdmmWarmStart warm;
    bool have_warm = false;

    for (long k = 0; k < steps; ++k) {
        const double step_kappa =
            options.kappa_schedule ? options.kappa_schedule(k, kappa) : kappa;

        // Step 1: forecast window, reference values and measured SOC.
        Eigen::VectorXd x_measured = x;
        for (int i = 0; i < prosumer_count; ++i) {
            const double cap = params[static_cast<size_t>(i)].capacity;
            if (x_measured[i] < -10.0 * kFeasTol || x_measured[i] > cap + 10.0 * kFeasTol) {
                trace.events.push_back({k, "SOC of prosumer " + std::to_string(i) +
                                               " left its box: " + std::to_string(x_measured[i])});
            }
            x_measured[i] = std::clamp(x_measured[i], 0.0, cap);
        }
        // Step 2: one multiobjective solve. Any failure falls back to idle
        // batteries, which are always feasible.
        ClosedLoopStep record;
        record.k = k;
        record.soc = x;
        record.applied.assign(static_cast<size_t>(prosumer_count), ControlStep{});
        record.zeta_bar = reference_values(forecast_series, k, grid.horizon)[0];
        record.tube_lower = full_tube.lower[k];
        record.tube_upper = full_tube.upper[k];
        bool solved = true;
        HorizonSolve solve;
        try {
            const HorizonProblem horizon =
                make_horizon(forecast_series, params, full_tube, k, grid, x_measured, step_kappa);
            solve = solve_horizon(horizon, config, step_kappa,
                                  have_warm ? &warm : nullptr);
        } catch (const std::exception& e) {
            solved = false;
            trace.events.push_back({k, std::string("solver failure, idle fallback: ") + e.what()});
        }

        if (solved) {
            const AdmmResult& source = solve.control_source();
            for (int i = 0; i < prosumer_count; ++i) {
                record.applied[static_cast<size_t>(i)] = source.locals[static_cast<size_t>(i)].u[0];
            }
            record.g_val = solve.g_report;
            record.h_val = solve.h_report;
            record.admm_iterations = solve.iterations;
            record.solver_converged = solve.converged;
            if (!solve.converged) {
                trace.events.push_back({k, "solver stopped on iteration budget"});
            }
            warm = shift_warm(solve.main);
            have_warm = true;
        } else {
            record.solver_converged = false;
            have_warm = false;
        }
        trace.all_converged = trace.all_converged && record.solver_converged;

        // Step 3: implement the first control at the plant (true data).
        record.demand.resize(prosumer_count);
        for (int i = 0; i < prosumer_count; ++i) {
            const auto& p = params[static_cast<size_t>(i)];
            const ControlStep& u = record.applied[static_cast<size_t>(i)];
            record.demand[i] = scenario.demand(i, k) + u.charge + p.gamma * u.discharge;
            x[i] = p.alpha * x[i] + grid.step_hours * (p.beta * u.charge + u.discharge);
        }
        trace.soc.col(k + 1) = x;

        record.z_bar = record.demand.mean();
        const double dev = record.z_bar - record.zeta_bar;
        record.deviation_sq = dev * dev;
        const double below = std::max(0.0, record.tube_lower - record.z_bar);
        const double above = std::max(0.0, record.z_bar - record.tube_upper);
        record.violation_sq = below * below + above * above;
        trace.deviation_sq_total += record.deviation_sq;
        trace.violation_sq_total += record.violation_sq;

        trace.steps.push_back(std::move(record));
    }
    return trace;
}

OpenLoopResult open_loop_run(const HorizonProblem& horizon, const AdmmConfig& config) {
    horizon.validate();
    const double kappa = config.kappa >= 0.0 ? config.kappa : horizon.kappa;
    HorizonSolve solve = solve_horizon(horizon, config, kappa, nullptr);

    OpenLoopResult out;
    const AdmmResult& source = solve.control_source();
    const int prosumer_count = horizon.prosumers();
    const int n = horizon.grid.horizon;

    out.controls.reserve(static_cast<size_t>(prosumer_count));
    out.demand.resize(prosumer_count, n);
    out.soc.resize(prosumer_count, n + 1);
    for (int i = 0; i < prosumer_count; ++i) {
        const LocalSolution& local = source.locals[static_cast<size_t>(i)];
        out.controls.push_back(local.u);
        out.demand.row(i) = local.z.transpose();
        out.soc.row(i) = local.soc.values.transpose();
    }
    out.z_bar = aggregate_demand(out.demand);
    out.g_report = solve.g_report;
    out.h_report = solve.h_report;
    out.converged = solve.converged;
    out.iterations = solve.iterations;
    out.solve = std::move(solve.used_refinement ? solve.refined : solve.main);
    return out;
}

}  // namespace gridmop
