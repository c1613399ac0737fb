#ifndef GRIDMOP_HORIZON_HPP_
#define GRIDMOP_HORIZON_HPP_

#include <vector>

#include <Eigen/Core>

#include "gridmop/dataset.hpp"
#include "gridmop/objectives.hpp"
#include "gridmop/prosumer.hpp"

namespace gridmop {

/// Snapshot of one receding-horizon step: forecasts, reference values,
/// tube window and initial SOC per prosumer, ready for the solver.
struct HorizonProblem {
    long k = 0;
    Eigen::VectorXd x0;        ///< per-prosumer SOC at step k
    Eigen::MatrixXd forecast;  ///< I x N net consumption, steps k..k+N-1
    Eigen::VectorXd zeta_bar;  ///< reference values for the window
    TubeSpec tube;             ///< tube bounds for the window
    double kappa = 0.5;
    std::vector<ProsumerParams> params;
    TimeGrid grid;

    int prosumers() const { return static_cast<int>(forecast.rows()); }
    void validate() const;
};

/// Assembles the step-k problem from scenario data: slices the forecast
/// window and the tube, computes the trailing-average reference values
/// (truncated at the start of history), and reads off the SOC vector.
HorizonProblem make_horizon(const NetConsumptionSeries& scenario,
                            const std::vector<ProsumerParams>& params, const TubeSpec& full_tube,
                            long k, const TimeGrid& grid, const Eigen::VectorXd& x0,
                            double kappa);

}  // namespace gridmop

#endif  // GRIDMOP_HORIZON_HPP_
