#include "gridmop/horizon.hpp"

#include <stdexcept>

namespace gridmop {

void HorizonProblem::validate() const {
    grid.validate();
    if (prosumers() < 1) throw std::invalid_argument("HorizonProblem: no prosumers");
    if (static_cast<int>(params.size()) != prosumers()) {
        throw std::invalid_argument("HorizonProblem: one parameter set per prosumer required");
    }
    if (x0.size() != prosumers()) {
        throw std::invalid_argument("HorizonProblem: one initial SOC per prosumer required");
    }
    if (forecast.cols() != grid.horizon || zeta_bar.size() != grid.horizon ||
        tube.lower.size() != grid.horizon) {
        throw std::invalid_argument("HorizonProblem: window lengths must equal the horizon");
    }
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
        throw std::invalid_argument("HorizonProblem: kappa must be in [0, 1]");
    }
    tube.validate();
    for (int i = 0; i < prosumers(); ++i) {
        params[static_cast<size_t>(i)].validate();
        if (!(x0[i] >= 0.0 && x0[i] <= params[static_cast<size_t>(i)].capacity)) {
            throw std::invalid_argument("HorizonProblem: x0 outside [0, capacity] for prosumer " +
                                        std::to_string(i));
        }
    }
    if (k < 0) throw std::invalid_argument("HorizonProblem: k must be >= 0");
}

HorizonProblem make_horizon(const NetConsumptionSeries& scenario,
                            const std::vector<ProsumerParams>& params, const TubeSpec& full_tube,
                            long k, const TimeGrid& grid, const Eigen::VectorXd& x0,
                            double kappa) {
    scenario.validate();
    if (k < 0) throw std::invalid_argument("make_horizon: k must be >= 0");
    if (k + grid.horizon > scenario.length()) {
        throw std::invalid_argument("make_horizon: scenario too short to supply the forecast window");
    }

    HorizonProblem horizon;
    horizon.k = k;
    horizon.grid = grid;
    horizon.grid.start_index = k;
    horizon.forecast = scenario.demand.middleCols(k, grid.horizon);
    horizon.zeta_bar = reference_values(scenario, k, grid.horizon);
    horizon.tube = full_tube.slice(k, grid.horizon);
    horizon.x0 = x0;
    horizon.params = params;
    horizon.kappa = kappa;
    horizon.validate();
    return horizon;
}

}  // namespace gridmop
