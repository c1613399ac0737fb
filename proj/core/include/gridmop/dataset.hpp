#ifndef GRIDMOP_DATASET_HPP_
#define GRIDMOP_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gridmop {

/// Net consumption (load minus generation) per prosumer over time.
/// Row i holds w_i(0..L-1) in kW; negative values mean generation surplus.
struct NetConsumptionSeries {
    Eigen::MatrixXd demand;
    double step_hours = 0.5;
    std::vector<std::string> prosumer_ids;

    int prosumers() const { return static_cast<int>(demand.rows()); }
    long length() const { return demand.cols(); }
    void validate() const;
};

/// Column mapping for load_csv. With Layout::autodetect, a header that
/// contains an id column and a value column is read as long format
/// (timestamp, prosumer_id, w); anything else is read as wide format
/// (timestamp followed by one column per prosumer).
struct CsvSchema {
    enum class Layout { autodetect, wide, long_form };
    Layout layout = Layout::autodetect;
    std::string timestamp_column = "timestamp";
    std::string id_column = "prosumer_id";
    std::string value_column = "w";
    /// Step length to use when timestamps are bare indices; ignored when
    /// wall-clock timestamps are present (then T comes from the data).
    double index_step_hours = 0.5;
};

/// Reads a meter export. Requires gap-free, uniformly spaced timestamps;
/// reports missing values, ragged rows and non-uniform steps with their
/// row number.
NetConsumptionSeries load_csv(const std::string& path, const CsvSchema& schema = {});

/// Synthetic scenario shape: daily-periodic base load, a midday generation
/// bump subtracted from it, and bounded uniform noise.
struct SynthProfile {
    double base_load = 0.35;
    double solar_amplitude = 0.5;
    double noise_level = 0.05;
};

/// Deterministic for a fixed seed. Values may go negative when the solar
/// amplitude exceeds the load.
NetConsumptionSeries synth_scenario(std::uint64_t seed, int prosumers, long length,
                                    const SynthProfile& profile = {},
                                    double step_hours = 0.5);

/// Additive seeded perturbation for forecast-robustness experiments.
NetConsumptionSeries perturb_forecast(const NetConsumptionSeries& series,
                                      std::uint64_t seed, double noise_level);

/// Reference values for the window [k, k+N-1]: the average of the overall
/// mean net consumption over the trailing min{N, n+1} steps,
///
///   zeta(n) = 1/(I * min{N, n+1}) * sum_{j=n-min{n,N-1}}^{n} sum_i w_i(j).
///
/// Requires the series to cover indices 0..k+N-1 (the forecast part
/// included). Throws on insufficient length.
Eigen::VectorXd reference_values(const NetConsumptionSeries& history, long k, int horizon);

}  // namespace gridmop

#endif  // GRIDMOP_DATASET_HPP_
