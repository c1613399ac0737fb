#include "gridmop/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace gridmop {

namespace {

constexpr double kRidge = 1e-9;
constexpr double kTinyCapacity = 1e-12;

int default_max_iters(int horizon) { return std::max(10 * horizon * horizon, 50); }

}  // namespace

void FeasibleOutputProblem::validate() const {
    params.validate();
    grid.validate();
    if (target.size() != grid.horizon || net_consumption.size() != grid.horizon) {
        throw std::invalid_argument("FeasibleOutputProblem: profile lengths must equal the horizon");
    }
    if (!(x0 >= 0.0 && x0 <= params.capacity)) {
        throw std::invalid_argument("FeasibleOutputProblem: x0 outside [0, capacity]");
    }
}

DiProjector::DiProjector(Eigen::VectorXd net_consumption, double x0, ProsumerParams params,
                         TimeGrid grid, LocalSolverOptions options)
    : w_(std::move(net_consumption)),
      x0_(x0),
      params_(std::move(params)),
      grid_(grid),
      options_(options) {
    params_.validate();
    grid_.validate();
    if (w_.size() != grid_.horizon) {
        throw std::invalid_argument("DiProjector: net consumption length must equal the horizon");
    }
    if (!(x0_ >= 0.0 && x0_ <= params_.capacity)) {
        throw std::invalid_argument("DiProjector: x0 outside [0, capacity]");
    }
    if (options_.max_iters <= 0) options_.max_iters = default_max_iters(grid_.horizon);

    const int steps = grid_.horizon;
    const int dim = 2 * steps;  // (discharge, charge) per step
    const double gamma = params_.gamma;
    const bool bind_capacity = params_.capacity < kTinyCapacity;

    output_rows_.setZero(steps, dim);
    for (int n = 0; n < steps; ++n) {
        output_rows_(n, 2 * n) = gamma;
        output_rows_(n, 2 * n + 1) = 1.0;
    }

    // Quadratic part of ||z(u) - target||^2 plus the tie-break ridge along
    // the per-step cancellation direction.
    phase1_.hessian = 2.0 * (output_rows_.transpose() * output_rows_);
    phase1_.hessian.diagonal().array() += 2.0 * kRidge * (1.0 + gamma * gamma);
    phase1_.linear.setZero(dim);

    // Per-step rate constraints: u- <= 0, -u+ <= 0, combined ratio <= 1.
    const int rate_rows = 3 * steps;
    const int soc_rows = bind_capacity ? 0 : 2 * steps;
    phase1_.in_matrix.setZero(rate_rows + soc_rows, dim);
    phase1_.in_rhs.setZero(rate_rows + soc_rows);
    for (int n = 0; n < steps; ++n) {
        phase1_.in_matrix(3 * n, 2 * n) = 1.0;
        phase1_.in_matrix(3 * n + 1, 2 * n + 1) = -1.0;
        phase1_.in_matrix(3 * n + 2, 2 * n) = 1.0 / params_.u_min;
        phase1_.in_matrix(3 * n + 2, 2 * n + 1) = 1.0 / params_.u_max;
        phase1_.in_rhs[3 * n + 2] = 1.0;
    }

    // SOC rows: x(n+1) = alpha^{n+1} x0 + L_n(u) with
    // L_n(u) = sum_j alpha^{n-j} T (beta u+(j) + u-(j)).
    Eigen::MatrixXd soc(steps, dim);
    soc.setZero();
    Eigen::VectorXd decay(steps);  // alpha^{n+1} x0
    for (int n = 0; n < steps; ++n) {
        if (n > 0) soc.row(n) = params_.alpha * soc.row(n - 1);
        soc(n, 2 * n) = grid_.step_hours;
        soc(n, 2 * n + 1) = grid_.step_hours * params_.beta;
        decay[n] = std::pow(params_.alpha, n + 1) * x0_;
    }
    if (bind_capacity) {
        // Zero-width SOC box: pin the trajectory with equalities so the
        // active-set method never sees a dependent +/- row pair. L_n = 0
        // forces every per-step increment to zero.
        phase1_.eq_matrix = soc;
        phase1_.eq_rhs.setZero(steps);
    } else {
        for (int n = 0; n < steps; ++n) {
            phase1_.in_matrix.row(rate_rows + 2 * n) = -soc.row(n);
            phase1_.in_rhs[rate_rows + 2 * n] = decay[n];
            phase1_.in_matrix.row(rate_rows + 2 * n + 1) = soc.row(n);
            phase1_.in_rhs[rate_rows + 2 * n + 1] = params_.capacity - decay[n];
        }
        phase1_.eq_matrix.resize(0, dim);
        phase1_.eq_rhs.resize(0);
    }

    u_.setZero(dim);  // idle battery, always feasible
    z_ = w_;
}

void DiProjector::solve_phase1(const Eigen::VectorXd& target) {
    if (target.size() != grid_.horizon) {
        throw std::invalid_argument("DiProjector: target length must equal the horizon");
    }
    const Eigen::VectorXd tau = target - w_;
    phase1_.linear = -2.0 * (output_rows_.transpose() * tau);

    QpOptions qp_options;
    qp_options.kkt_tol = options_.kkt_tol;
    qp_options.max_iters = options_.max_iters;
    QpResult result = solve_qp(phase1_, u_, qp_options, &working_set_);
    if (!result.converged) {
        // A poisoned warm start is the usual cause; the cold solve from the
        // idle point is reliable.
        QpResult retry = solve_qp(phase1_, Eigen::VectorXd::Zero(u_.size()), qp_options, nullptr);
        if (retry.kkt_residual < result.kkt_residual) result = std::move(retry);
    }
    if (!result.x.allFinite()) {
        throw std::runtime_error("DiProjector: non-finite iterate");
    }
    u_ = result.x;
    working_set_ = result.working_set;
    z_ = w_ + output_rows_ * u_;
    last_kkt_residual_ = result.kkt_residual;
    last_iterations_ = result.iterations;
    last_converged_ = result.converged;
}

const Eigen::VectorXd& DiProjector::project(const Eigen::VectorXd& target) {
    solve_phase1(target);
    return z_;
}

LocalSolution DiProjector::finalize(const Eigen::VectorXd& target) {
    solve_phase1(target);

    // Minimum-norm control among those realizing the projected profile.
    const int dim = static_cast<int>(u_.size());
    QpProblem phase2;
    phase2.hessian = 2.0 * Eigen::MatrixXd::Identity(dim, dim);
    phase2.linear.setZero(dim);
    phase2.in_matrix = phase1_.in_matrix;
    phase2.in_rhs = phase1_.in_rhs;
    const int extra = static_cast<int>(phase1_.eq_matrix.rows());
    phase2.eq_matrix.resize(grid_.horizon + extra, dim);
    phase2.eq_rhs.resize(grid_.horizon + extra);
    phase2.eq_matrix.topRows(grid_.horizon) = output_rows_;
    phase2.eq_rhs.head(grid_.horizon) = output_rows_ * u_;
    if (extra > 0) {
        phase2.eq_matrix.bottomRows(extra) = phase1_.eq_matrix;
        phase2.eq_rhs.tail(extra) = phase1_.eq_rhs;
    }

    QpOptions qp_options;
    qp_options.kkt_tol = options_.kkt_tol;
    qp_options.max_iters = options_.max_iters;
    QpResult tie = solve_qp(phase2, u_, qp_options, &working_set_);
    if (tie.converged && tie.x.allFinite()) {
        u_ = tie.x;
        working_set_ = tie.working_set;
    }

    LocalSolution solution;
    solution.u.resize(grid_.horizon);
    for (int n = 0; n < grid_.horizon; ++n) {
        solution.u[n].discharge = u_[2 * n];
        solution.u[n].charge = u_[2 * n + 1];
    }
    solution.z = demand_output(w_, solution.u, params_);
    z_ = solution.z;
    solution.soc = simulate_soc(x0_, solution.u, params_, grid_);
    solution.kkt_residual = last_kkt_residual_;
    solution.iterations = last_iterations_ + tie.iterations;
    solution.converged = last_converged_;
    return solution;
}

LocalSolution project_onto_Di(const FeasibleOutputProblem& problem,
                              const LocalSolverOptions& options) {
    problem.validate();
    DiProjector projector(problem.net_consumption, problem.x0, problem.params, problem.grid,
                          options);
    return projector.finalize(problem.target);
}

namespace {

struct Point {
    double discharge;
    double charge;
};

// Clips a convex polygon against {coeff_d * d + coeff_c * c <= bound}.
std::vector<Point> clip(const std::vector<Point>& polygon, double coeff_d, double coeff_c,
                        double bound) {
    std::vector<Point> out;
    const size_t n = polygon.size();
    for (size_t i = 0; i < n; ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % n];
        const double fa = coeff_d * a.discharge + coeff_c * a.charge - bound;
        const double fb = coeff_d * b.discharge + coeff_c * b.charge - bound;
        if (fa <= 1e-12) out.push_back(a);
        if ((fa < -1e-12 && fb > 1e-12) || (fa > 1e-12 && fb < -1e-12)) {
            const double t = fa / (fa - fb);
            out.push_back({a.discharge + t * (b.discharge - a.discharge),
                           a.charge + t * (b.charge - a.charge)});
        }
    }
    return out;
}

}  // namespace

DemandEnvelope max_demand_envelope(const FeasibleOutputProblem& problem) {
    problem.validate();
    const auto& p = problem.params;
    const double T = problem.grid.step_hours;
    const int steps = problem.grid.horizon;

    DemandEnvelope env;
    env.z_min.resize(steps);
    env.z_max.resize(steps);

    double x_lo = problem.x0;
    double x_hi = problem.x0;
    for (int n = 0; n < steps; ++n) {
        // SOC increment bounds available at this step for some reachable SOC.
        const double e_lo = std::max(p.u_min, -p.alpha * x_hi / T);
        const double e_hi = std::min(p.beta * p.u_max, (p.capacity - p.alpha * x_lo) / T);

        std::vector<Point> polygon = {{0.0, 0.0}, {p.u_min, 0.0}, {0.0, p.u_max}};
        polygon = clip(polygon, -1.0, -p.beta, -e_lo);  // e >= e_lo
        polygon = clip(polygon, 1.0, p.beta, e_hi);     // e <= e_hi
        double v_min = 0.0;
        double v_max = 0.0;
        for (const Point& q : polygon) {
            const double v = p.gamma * q.discharge + q.charge;
            v_min = std::min(v_min, v);
            v_max = std::max(v_max, v);
        }
        env.z_min[n] = problem.net_consumption[n] + v_min;
        env.z_max[n] = problem.net_consumption[n] + v_max;

        x_lo = std::max(p.alpha * x_lo + T * p.u_min, 0.0);
        x_hi = std::min(p.alpha * x_hi + T * p.beta * p.u_max, p.capacity);
    }
    return env;
}

}  // namespace gridmop
