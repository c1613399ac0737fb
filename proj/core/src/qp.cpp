#include "gridmop/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace gridmop {

namespace {

constexpr double kStepTol = 1e-12;
constexpr double kActiveTol = 1e-9;
constexpr double kRankTol = 1e-11;

struct WorkingSet {
    std::vector<int> rows;  // inequality row indices, sorted

    bool contains(int row) const {
        return std::binary_search(rows.begin(), rows.end(), row);
    }
    void insert(int row) {
        rows.insert(std::upper_bound(rows.begin(), rows.end(), row), row);
    }
    void erase(int row) {
        rows.erase(std::lower_bound(rows.begin(), rows.end(), row));
    }
};

Eigen::MatrixXd stack_active(const QpProblem& p, const WorkingSet& ws) {
    const int me = static_cast<int>(p.eq_matrix.rows());
    Eigen::MatrixXd a(me + static_cast<int>(ws.rows.size()), p.dim());
    if (me > 0) a.topRows(me) = p.eq_matrix;
    for (size_t i = 0; i < ws.rows.size(); ++i) {
        a.row(me + static_cast<int>(i)) = p.in_matrix.row(ws.rows[i]);
    }
    return a;
}

}  // namespace

double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& eq_multipliers,
                    const Eigen::VectorXd& in_multipliers) {
    Eigen::VectorXd stat = p.hessian * x + p.linear;
    if (p.eq_matrix.rows() > 0) stat += p.eq_matrix.transpose() * eq_multipliers;
    if (p.in_matrix.rows() > 0) stat += p.in_matrix.transpose() * in_multipliers;
    double res = stat.lpNorm<Eigen::Infinity>();

    if (p.eq_matrix.rows() > 0) {
        res = std::max(res, (p.eq_matrix * x - p.eq_rhs).lpNorm<Eigen::Infinity>());
    }
    if (p.in_matrix.rows() > 0) {
        const Eigen::VectorXd slack = p.in_rhs - p.in_matrix * x;
        for (Eigen::Index j = 0; j < slack.size(); ++j) {
            res = std::max(res, -slack[j]);                           // primal feasibility
            res = std::max(res, -in_multipliers[j]);                  // dual feasibility
            res = std::max(res, std::abs(in_multipliers[j] * slack[j]));  // complementarity
        }
    }
    return res;
}

QpResult solve_qp(const QpProblem& p, const Eigen::VectorXd& x0, const QpOptions& options,
                  const std::vector<int>* working_set_hint) {
    const int n = p.dim();
    const int me = static_cast<int>(p.eq_matrix.rows());
    const int mi = static_cast<int>(p.in_matrix.rows());
    if (x0.size() != n) throw std::invalid_argument("solve_qp: start point has wrong dimension");

    const int max_iters = options.max_iters > 0 ? options.max_iters : 10 * n * n + 30;

    QpResult result;
    result.x = x0;
    result.eq_multipliers = Eigen::VectorXd::Zero(me);
    result.in_multipliers = Eigen::VectorXd::Zero(mi);

    WorkingSet ws;
    if (working_set_hint) {
        for (int row : *working_set_hint) {
            if (row < 0 || row >= mi || ws.contains(row)) continue;
            const double slack = p.in_rhs[row] - p.in_matrix.row(row).dot(x0);
            if (std::abs(slack) <= kActiveTol) ws.insert(row);
        }
    }

    Eigen::LLT<Eigen::MatrixXd> full_llt;
    bool full_llt_ready = false;

    // Degenerate vertices (long runs of active SOC and rate bounds) can make
    // the default most-negative-multiplier rule cycle. After a streak of
    // zero-length steps the solver switches to least-index selection, which
    // breaks those cycles.
    int zero_steps = 0;
    bool least_index_mode = false;

    for (int iter = 0; iter < max_iters; ++iter) {
        result.iterations = iter + 1;
        const Eigen::VectorXd grad = p.hessian * result.x + p.linear;
        const int m = me + static_cast<int>(ws.rows.size());

        Eigen::VectorXd step(n);
        Eigen::VectorXd multipliers;  // filled only when the step vanishes
        if (m == 0) {
            if (!full_llt_ready) {
                full_llt.compute(p.hessian);
                if (full_llt.info() != Eigen::Success) {
                    throw std::runtime_error("solve_qp: Hessian is not positive definite");
                }
                full_llt_ready = true;
            }
            step = -full_llt.solve(grad);
        } else {
            const Eigen::MatrixXd active = stack_active(p, ws);
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(active.transpose());
            qr.setThreshold(kRankTol);
            const int rank = static_cast<int>(qr.rank());
            if (rank < n) {
                const Eigen::MatrixXd q = qr.householderQ();
                const Eigen::MatrixXd null_basis = q.rightCols(n - rank);
                const Eigen::MatrixXd reduced = null_basis.transpose() * p.hessian * null_basis;
                Eigen::LLT<Eigen::MatrixXd> llt(reduced);
                if (llt.info() != Eigen::Success) {
                    throw std::runtime_error("solve_qp: reduced Hessian is not positive definite");
                }
                step = null_basis * llt.solve(-null_basis.transpose() * grad);
            } else {
                step.setZero();
            }
            if (step.lpNorm<Eigen::Infinity>() <= kStepTol * (1.0 + result.x.lpNorm<Eigen::Infinity>())) {
                multipliers = qr.solve(-grad);
            }
        }

        const bool stationary =
            step.lpNorm<Eigen::Infinity>() <= kStepTol * (1.0 + result.x.lpNorm<Eigen::Infinity>());
        if (stationary && m == 0) {
            result.converged = true;
            result.kkt_residual =
                kkt_residual(p, result.x, result.eq_multipliers, result.in_multipliers);
            result.working_set = ws.rows;
            return result;
        }
        if (stationary) {
            // Multiplier check: drop the most negative inequality multiplier
            // (or the lowest-index negative one in least-index mode).
            int worst = -1;
            double worst_value = -kStepTol;
            for (size_t i = 0; i < ws.rows.size(); ++i) {
                const double mu = multipliers[me + static_cast<int>(i)];
                if (least_index_mode) {
                    if (mu < -kStepTol && (worst < 0 || ws.rows[i] < worst)) worst = ws.rows[i];
                } else if (mu < worst_value) {
                    worst_value = mu;
                    worst = ws.rows[i];
                }
            }
            if (worst < 0) {
                result.eq_multipliers = multipliers.head(me);
                result.in_multipliers.setZero();
                for (size_t i = 0; i < ws.rows.size(); ++i) {
                    result.in_multipliers[ws.rows[i]] =
                        std::max(0.0, multipliers[me + static_cast<int>(i)]);
                }
                result.kkt_residual =
                    kkt_residual(p, result.x, result.eq_multipliers, result.in_multipliers);
                result.converged = result.kkt_residual <= options.kkt_tol;
                result.working_set = ws.rows;
                return result;
            }
            ws.erase(worst);
            continue;
        }

        // Ratio test against inactive inequality rows.
        double alpha = 1.0;
        int blocking = -1;
        double blocking_rate = 0.0;
        for (int j = 0; j < mi; ++j) {
            if (ws.contains(j)) continue;
            const double rate = p.in_matrix.row(j).dot(step);
            if (rate <= kStepTol) continue;
            const double slack = std::max(0.0, p.in_rhs[j] - p.in_matrix.row(j).dot(result.x));
            const double limit = slack / rate;
            if (limit >= alpha - 1e-15) {
                // Tie with the current blocking row: prefer the steeper one,
                // or the lowest index once in least-index mode.
                if (blocking >= 0 && limit < alpha + 1e-15 &&
                    (least_index_mode ? j < blocking : rate > blocking_rate)) {
                    blocking = j;
                    blocking_rate = rate;
                }
                continue;
            }
            alpha = limit;
            blocking = j;
            blocking_rate = rate;
        }
        result.x += alpha * step;
        if (blocking >= 0) {
            ws.insert(blocking);
        }
        if (alpha <= 1e-13) {
            if (++zero_steps >= 12) least_index_mode = true;
        } else {
            zero_steps = 0;
        }
    }

    result.working_set = ws.rows;
    result.kkt_residual = kkt_residual(p, result.x, result.eq_multipliers, result.in_multipliers);
    result.converged = false;
    return result;
}

}  // namespace gridmop
