#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

namespace gridmop::testing {

namespace {

double barrier_value(const BarrierProblem& p, double t, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& slack) {
    double phi = 0.0;
    for (Eigen::Index i = 0; i < slack.size(); ++i) phi -= std::log(slack[i]);
    return t * (0.5 * y.dot(p.P * y) + p.q.dot(y)) + phi;
}

}  // namespace

Eigen::VectorXd barrier_solve(const BarrierProblem& p, Eigen::VectorXd y, double gap_tol) {
    const Eigen::Index m = p.A.rows();
    Eigen::VectorXd slack = p.b - p.A * y;
    if ((slack.array() <= 0.0).any()) {
        throw std::invalid_argument("barrier_solve: start point not strictly feasible");
    }

    double t = 1.0;
    const double mu = 20.0;
    while (static_cast<double>(m) / t >= gap_tol) {
        // Centering: damped Newton on t*f + phi.
        for (int newton = 0; newton < 80; ++newton) {
            slack = p.b - p.A * y;
            const Eigen::VectorXd inv_slack = slack.cwiseInverse();
            Eigen::VectorXd grad = t * (p.P * y + p.q) + p.A.transpose() * inv_slack;
            Eigen::MatrixXd hess = t * p.P;
            hess += p.A.transpose() * inv_slack.array().square().matrix().asDiagonal() * p.A;

            const Eigen::VectorXd step = -Eigen::LDLT<Eigen::MatrixXd>(hess).solve(grad);
            const double decrement = -grad.dot(step);
            if (!(decrement > 1e-18)) break;

            // Largest feasible step, then backtracking.
            double alpha = 1.0;
            const Eigen::VectorXd rate = p.A * step;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (rate[i] > 0.0) alpha = std::min(alpha, 0.99 * slack[i] / rate[i]);
            }
            const double f0 = barrier_value(p, t, y, slack);
            for (int bt = 0; bt < 60; ++bt) {
                const Eigen::VectorXd trial = y + alpha * step;
                const Eigen::VectorXd trial_slack = p.b - p.A * trial;
                if ((trial_slack.array() > 0.0).all() &&
                    barrier_value(p, t, trial, trial_slack) <= f0 - 0.25 * alpha * decrement) {
                    y = trial;
                    break;
                }
                alpha *= 0.5;
            }
            if (decrement * 0.5 < 1e-12) break;
        }
        t *= mu;
    }
    return y;
}

GridResult grid_polish(const GridSpec& spec,
                       const std::function<double(const Eigen::VectorXd&)>& objective,
                       const std::function<bool(const Eigen::VectorXd&)>& feasible) {
    const int dim = static_cast<int>(spec.lower.size());
    Eigen::VectorXd lo = spec.lower;
    Eigen::VectorXd hi = spec.upper;

    GridResult best;
    best.value = std::numeric_limits<double>::infinity();

    const int k = spec.points_per_dim;
    std::vector<int> idx(static_cast<size_t>(dim), 0);
    Eigen::VectorXd point(dim);

    for (int round = 0; round < spec.rounds; ++round) {
        std::fill(idx.begin(), idx.end(), 0);
        bool done = false;
        while (!done) {
            for (int d = 0; d < dim; ++d) {
                const double t = k == 1 ? 0.5 : static_cast<double>(idx[static_cast<size_t>(d)]) / (k - 1);
                point[d] = lo[d] + t * (hi[d] - lo[d]);
            }
            if (feasible(point)) {
                const double value = objective(point);
                if (value < best.value) {
                    best.value = value;
                    best.x = point;
                }
            }
            int d = 0;
            for (; d < dim; ++d) {
                if (++idx[static_cast<size_t>(d)] < k) break;
                idx[static_cast<size_t>(d)] = 0;
            }
            done = d == dim;
        }
        if (!best.x.size()) break;  // nothing feasible on the grid
        // Shrink around the incumbent, clamped to the original box.
        for (int d = 0; d < dim; ++d) {
            const double half = 0.5 * spec.shrink * (hi[d] - lo[d]);
            double new_lo = best.x[d] - half;
            double new_hi = best.x[d] + half;
            new_lo = std::max(new_lo, spec.lower[d]);
            new_hi = std::min(new_hi, spec.upper[d]);
            lo[d] = new_lo;
            hi[d] = new_hi;
        }
    }
    return best;
}

double scalarized_value_of_controls(const HorizonProblem& horizon, double kappa,
                                    const Eigen::VectorXd& u) {
    const int prosumers = horizon.prosumers();
    const int n_steps = horizon.grid.horizon;
    double value_g = 0.0;
    double value_h = 0.0;
    for (int n = 0; n < n_steps; ++n) {
        double total = 0.0;
        for (int i = 0; i < prosumers; ++i) {
            const double ud = u[2 * (i * n_steps + n)];
            const double uc = u[2 * (i * n_steps + n) + 1];
            total += horizon.forecast(i, n) + uc + horizon.params[static_cast<size_t>(i)].gamma * ud;
        }
        const double z_bar = total / prosumers;
        const double dev = z_bar - horizon.zeta_bar[n];
        value_g += dev * dev;
        const double below = std::max(0.0, horizon.tube.lower[n] - z_bar);
        const double above = std::max(0.0, z_bar - horizon.tube.upper[n]);
        value_h += below * below + above * above;
    }
    return kappa * value_g + (1.0 - kappa) * value_h;
}

bool controls_feasible(const HorizonProblem& horizon, const Eigen::VectorXd& u, double tol) {
    const int prosumers = horizon.prosumers();
    const int n_steps = horizon.grid.horizon;
    for (int i = 0; i < prosumers; ++i) {
        const auto& p = horizon.params[static_cast<size_t>(i)];
        double x = horizon.x0[i];
        for (int n = 0; n < n_steps; ++n) {
            const double ud = u[2 * (i * n_steps + n)];
            const double uc = u[2 * (i * n_steps + n) + 1];
            if (ud < p.u_min - tol || ud > tol) return false;
            if (uc < -tol || uc > p.u_max + tol) return false;
            if (ud / p.u_min + uc / p.u_max > 1.0 + tol) return false;
            x = p.alpha * x + horizon.grid.step_hours * (p.beta * uc + ud);
            if (x < -tol || x > p.capacity + tol) return false;
        }
    }
    return true;
}

namespace {

// Shared constraint assembly: triangle and SOC rows of one prosumer over
// columns [offset, offset + 2N).
void append_prosumer_rows(const ProsumerParams& p, const TimeGrid& grid, double x0, int offset,
                          std::vector<Eigen::VectorXd>& rows, std::vector<double>& rhs, int dim) {
    const int n_steps = grid.horizon;
    const double T = grid.step_hours;
    for (int n = 0; n < n_steps; ++n) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(dim);
        row[offset + 2 * n] = 1.0;  // u- <= 0
        rows.push_back(row);
        rhs.push_back(0.0);

        row.setZero();
        row[offset + 2 * n + 1] = -1.0;  // -u+ <= 0
        rows.push_back(row);
        rhs.push_back(0.0);

        row.setZero();
        row[offset + 2 * n] = 1.0 / p.u_min;
        row[offset + 2 * n + 1] = 1.0 / p.u_max;
        rows.push_back(row);
        rhs.push_back(1.0);
    }
    Eigen::VectorXd soc_row = Eigen::VectorXd::Zero(dim);
    double decay = x0;
    for (int n = 0; n < n_steps; ++n) {
        soc_row *= p.alpha;
        soc_row[offset + 2 * n] = T;
        soc_row[offset + 2 * n + 1] = T * p.beta;
        decay *= p.alpha;
        rows.push_back(-soc_row);  // -L_n <= decay
        rhs.push_back(decay);
        rows.push_back(soc_row);  // L_n <= C - decay
        rhs.push_back(p.capacity - decay);
    }
}

BarrierProblem assemble_centralized(const HorizonProblem& horizon, double kappa, int* dim_out) {
    const int prosumers = horizon.prosumers();
    const int n_steps = horizon.grid.horizon;
    const int u_dim = 2 * n_steps * prosumers;
    const bool with_slack = kappa < 1.0;
    const int dim = with_slack ? u_dim + 2 * n_steps : u_dim;

    // z_bar(n) = Z_n . y + mean forecast.
    Eigen::MatrixXd zmap = Eigen::MatrixXd::Zero(n_steps, dim);
    Eigen::VectorXd zoff(n_steps);
    for (int n = 0; n < n_steps; ++n) {
        double base = 0.0;
        for (int i = 0; i < prosumers; ++i) {
            zmap(n, 2 * (i * n_steps + n)) = horizon.params[static_cast<size_t>(i)].gamma / prosumers;
            zmap(n, 2 * (i * n_steps + n) + 1) = 1.0 / prosumers;
            base += horizon.forecast(i, n);
        }
        zoff[n] = base / prosumers;
    }

    BarrierProblem p;
    p.P = 2.0 * kappa * zmap.transpose() * zmap;
    p.q = 2.0 * kappa * zmap.transpose() * (zoff - horizon.zeta_bar);
    if (with_slack) {
        for (int j = 0; j < 2 * n_steps; ++j) p.P(u_dim + j, u_dim + j) += 2.0 * (1.0 - kappa);
    }

    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (int i = 0; i < prosumers; ++i) {
        append_prosumer_rows(horizon.params[static_cast<size_t>(i)], horizon.grid, horizon.x0[i],
                             2 * i * n_steps, rows, rhs, dim);
    }
    if (with_slack) {
        for (int j = 0; j < 2 * n_steps; ++j) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(dim);
            row[u_dim + j] = -1.0;  // s >= 0
            rows.push_back(row);
            rhs.push_back(0.0);
        }
        for (int n = 0; n < n_steps; ++n) {
            Eigen::VectorXd row = zmap.row(n);  // z_bar(n) - s_up(n) <= upper(n)
            row[u_dim + n_steps + n] = -1.0;
            rows.push_back(row);
            rhs.push_back(horizon.tube.upper[n] - zoff[n]);

            row = -zmap.row(n);  // -z_bar(n) - s_lo(n) <= -lower(n)
            row[u_dim + n] = -1.0;
            rows.push_back(row);
            rhs.push_back(zoff[n] - horizon.tube.lower[n]);
        }
    }

    p.A.resize(static_cast<Eigen::Index>(rows.size()), dim);
    p.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        p.A.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
        p.b[static_cast<Eigen::Index>(r)] = rhs[r];
    }
    if (dim_out) *dim_out = dim;
    return p;
}

Eigen::VectorXd strict_interior_controls(const HorizonProblem& horizon) {
    const int prosumers = horizon.prosumers();
    const int n_steps = horizon.grid.horizon;
    Eigen::VectorXd u(2 * n_steps * prosumers);
    for (int i = 0; i < prosumers; ++i) {
        const auto& p = horizon.params[static_cast<size_t>(i)];
        const double margin = 0.2 * std::min(horizon.x0[i], p.capacity - horizon.x0[i]);
        double delta = margin / (n_steps * horizon.grid.step_hours *
                                 (p.beta * p.u_max - p.u_min) + 1e-12);
        delta = std::min(delta, 0.05);
        if (!(delta > 0.0)) {
            throw std::invalid_argument("strict_interior_controls: x0 on the SOC boundary");
        }
        for (int n = 0; n < n_steps; ++n) {
            u[2 * (i * n_steps + n)] = delta * p.u_min;
            u[2 * (i * n_steps + n) + 1] = delta * p.u_max;
        }
    }
    return u;
}

}  // namespace

double centralized_optimum_barrier(const HorizonProblem& horizon, double kappa, double gap_tol) {
    int dim = 0;
    const BarrierProblem p = assemble_centralized(horizon, kappa, &dim);
    const int u_dim = 2 * horizon.grid.horizon * horizon.prosumers();

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(dim);
    y0.head(u_dim) = strict_interior_controls(horizon);
    if (dim > u_dim) {
        // Strictly positive slack clearing the tube rows.
        const int n_steps = horizon.grid.horizon;
        for (int n = 0; n < n_steps; ++n) {
            double z_bar = 0.0;
            for (int i = 0; i < horizon.prosumers(); ++i) {
                z_bar += horizon.forecast(i, n) +
                         y0[2 * (i * n_steps + n) + 1] +
                         horizon.params[static_cast<size_t>(i)].gamma * y0[2 * (i * n_steps + n)];
            }
            z_bar /= horizon.prosumers();
            y0[u_dim + n] = std::max(0.0, horizon.tube.lower[n] - z_bar) + 1.0;
            y0[u_dim + n_steps + n] = std::max(0.0, z_bar - horizon.tube.upper[n]) + 1.0;
        }
    }

    const Eigen::VectorXd y = barrier_solve(p, y0, gap_tol);
    return scalarized_value_of_controls(horizon, kappa, y.head(u_dim));
}

double centralized_optimum_grid(const HorizonProblem& horizon, double kappa) {
    const int prosumers = horizon.prosumers();
    const int n_steps = horizon.grid.horizon;
    const int dim = 2 * n_steps * prosumers;

    GridSpec spec;
    spec.lower.resize(dim);
    spec.upper.resize(dim);
    for (int i = 0; i < prosumers; ++i) {
        const auto& p = horizon.params[static_cast<size_t>(i)];
        for (int n = 0; n < n_steps; ++n) {
            spec.lower[2 * (i * n_steps + n)] = p.u_min;
            spec.upper[2 * (i * n_steps + n)] = 0.0;
            spec.lower[2 * (i * n_steps + n) + 1] = 0.0;
            spec.upper[2 * (i * n_steps + n) + 1] = p.u_max;
        }
    }
    spec.points_per_dim = dim <= 4 ? 11 : (dim <= 6 ? 7 : 5);
    spec.rounds = 26;
    spec.shrink = 0.5;

    const GridResult best = grid_polish(
        spec, [&](const Eigen::VectorXd& u) { return scalarized_value_of_controls(horizon, kappa, u); },
        [&](const Eigen::VectorXd& u) { return controls_feasible(horizon, u); });
    return best.value;
}

namespace {

HorizonProblem single_prosumer_horizon(const FeasibleOutputProblem& problem) {
    // Reuses the joint-instance machinery with I = 1 and the projection
    // target in place of the reference; tube wide open so only g remains.
    HorizonProblem horizon;
    horizon.k = 0;
    horizon.grid = problem.grid;
    horizon.x0 = Eigen::VectorXd::Constant(1, problem.x0);
    horizon.forecast = problem.net_consumption.transpose();
    horizon.zeta_bar = problem.target;
    horizon.tube.lower = Eigen::VectorXd::Constant(problem.grid.horizon, -1e9);
    horizon.tube.upper = Eigen::VectorXd::Constant(problem.grid.horizon, 1e9);
    horizon.kappa = 1.0;
    horizon.params = {problem.params};
    return horizon;
}

}  // namespace

double projection_distance_barrier(const FeasibleOutputProblem& problem, double gap_tol) {
    return centralized_optimum_barrier(single_prosumer_horizon(problem), 1.0, gap_tol);
}

double projection_distance_grid(const FeasibleOutputProblem& problem) {
    return centralized_optimum_grid(single_prosumer_horizon(problem), 1.0);
}

HorizonProblem random_instance(std::mt19937_64& rng, int prosumers, int horizon,
                               bool conflicting) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    HorizonProblem h;
    h.k = 0;
    h.grid.step_hours = 0.5;
    h.grid.horizon = horizon;
    h.x0.resize(prosumers);
    h.forecast.resize(prosumers, horizon);
    h.params.resize(static_cast<size_t>(prosumers));
    for (int i = 0; i < prosumers; ++i) {
        auto& p = h.params[static_cast<size_t>(i)];
        p.alpha = 0.9 + 0.1 * unit(rng);
        p.beta = 0.75 + 0.23 * unit(rng);
        p.gamma = 0.75 + 0.23 * unit(rng);
        p.capacity = 0.5 + 1.5 * unit(rng);
        p.u_min = -(0.2 + 0.4 * unit(rng));
        p.u_max = 0.2 + 0.4 * unit(rng);
        h.x0[i] = (0.25 + 0.5 * unit(rng)) * p.capacity;
        for (int n = 0; n < horizon; ++n) {
            h.forecast(i, n) = 0.1 + 0.7 * unit(rng);
        }
    }

    const double base = h.forecast.mean();
    h.zeta_bar.resize(horizon);
    h.tube.lower.resize(horizon);
    h.tube.upper.resize(horizon);
    if (conflicting) {
        // Tube strictly below the demand level, reference strictly above.
        for (int n = 0; n < horizon; ++n) {
            h.tube.lower[n] = base - 0.45;
            h.tube.upper[n] = base - 0.2;
            h.zeta_bar[n] = base + 0.15 + 0.1 * unit(rng);
        }
    } else {
        for (int n = 0; n < horizon; ++n) {
            h.tube.lower[n] = base - 0.2 - 0.3 * unit(rng);
            h.tube.upper[n] = h.tube.lower[n] + 0.1 + 0.5 * unit(rng);
            h.zeta_bar[n] = base + 0.6 * (unit(rng) - 0.5);
        }
    }
    h.kappa = 0.5;
    h.validate();
    return h;
}

ControlSequence random_feasible_controls(std::mt19937_64& rng, const ProsumerParams& params,
                                         const TimeGrid& grid, double x0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ControlSequence u(static_cast<size_t>(grid.horizon));
    for (auto& step : u) {
        // Barycentric sample of the feasible triangle.
        double a = unit(rng);
        double b = unit(rng);
        if (a + b > 1.0) {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        step.discharge = a * params.u_min;
        step.charge = b * params.u_max;
    }
    for (int scale = 0; scale < 60; ++scale) {
        if (check_feasible(x0, u, params, grid)) return u;
        for (auto& step : u) {
            step.discharge *= 0.5;
            step.charge *= 0.5;
        }
    }
    for (auto& step : u) step = ControlStep{};
    return u;
}

}  // namespace gridmop::testing
