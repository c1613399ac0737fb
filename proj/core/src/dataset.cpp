#include "gridmop/dataset.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gridmop/csv.hpp"

namespace gridmop {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail_row(const std::string& path, long line, const std::string& message) {
    std::ostringstream out;
    out << path << ":" << line << ": " << message;
    throw std::runtime_error(out.str());
}

double parse_value(const std::string& path, long line, const std::string& field) {
    if (field.empty()) fail_row(path, line, "missing value");
    try {
        size_t pos = 0;
        const double v = std::stod(field, &pos);
        if (pos != field.size()) fail_row(path, line, "unparsable number '" + field + "'");
        if (!std::isfinite(v)) fail_row(path, line, "non-finite value");
        return v;
    } catch (const std::invalid_argument&) {
        fail_row(path, line, "unparsable number '" + field + "'");
    } catch (const std::out_of_range&) {
        fail_row(path, line, "number out of range '" + field + "'");
    }
}

struct TimeAxis {
    std::vector<Timestamp> stamps;
    double step_hours = 0.0;
};

// Validates strictly increasing, uniformly spaced timestamps and infers T.
TimeAxis check_axis(const std::string& path, const std::vector<Timestamp>& stamps,
                    const std::vector<long>& lines, double index_step_hours) {
    TimeAxis axis;
    axis.stamps = stamps;
    if (stamps.empty()) throw std::runtime_error(path + ": no data rows");
    for (size_t r = 1; r < stamps.size(); ++r) {
        if (stamps[r].is_index != stamps[0].is_index) {
            fail_row(path, lines[r], "mixed timestamp formats");
        }
    }
    if (stamps[0].is_index) {
        for (size_t r = 1; r < stamps.size(); ++r) {
            if (stamps[r].index - stamps[r - 1].index != 1) {
                fail_row(path, lines[r], "non-uniform step at row " + std::to_string(r + 1));
            }
        }
        axis.step_hours = index_step_hours;
        return axis;
    }
    if (stamps.size() < 2) {
        axis.step_hours = index_step_hours;
        return axis;
    }
    const double dt = stamps[1].hours - stamps[0].hours;
    if (dt <= 0.0) fail_row(path, lines[1], "timestamps not increasing");
    for (size_t r = 1; r < stamps.size(); ++r) {
        const double step = stamps[r].hours - stamps[r - 1].hours;
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
            fail_row(path, lines[r], "non-uniform step at row " + std::to_string(r + 1));
        }
    }
    axis.step_hours = dt;
    return axis;
}

NetConsumptionSeries load_wide(const std::string& path, const CsvTable& table,
                               const CsvSchema& schema, int ts_col) {
    const int cols = static_cast<int>(table.header.size());
    if (cols < 2) throw std::runtime_error(path + ": wide format needs at least one prosumer column");

    NetConsumptionSeries series;
    std::vector<int> value_cols;
    for (int c = 0; c < cols; ++c) {
        if (c == ts_col) continue;
        value_cols.push_back(c);
        series.prosumer_ids.push_back(table.header[c]);
    }

    std::vector<Timestamp> stamps;
    stamps.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        auto ts = parse_timestamp(table.rows[r][ts_col]);
        if (!ts) fail_row(path, table.line[r], "unparsable timestamp '" + table.rows[r][ts_col] + "'");
        stamps.push_back(*ts);
    }
    const TimeAxis axis = check_axis(path, stamps, table.line, schema.index_step_hours);

    series.demand.resize(static_cast<int>(value_cols.size()), static_cast<long>(table.rows.size()));
    for (size_t r = 0; r < table.rows.size(); ++r) {
        for (size_t i = 0; i < value_cols.size(); ++i) {
            series.demand(static_cast<int>(i), static_cast<long>(r)) =
                parse_value(path, table.line[r], table.rows[r][value_cols[i]]);
        }
    }
    series.step_hours = axis.step_hours;
    return series;
}

NetConsumptionSeries load_long(const std::string& path, const CsvTable& table,
                               const CsvSchema& schema, int ts_col, int id_col, int value_col) {
    // Collect prosumer ids in first-appearance order and timestamps in
    // first-appearance order, then require a dense grid.
    std::vector<std::string> ids;
    std::map<std::string, int> id_index;
    std::vector<Timestamp> stamps;
    std::vector<long> stamp_lines;
    std::map<std::string, long> stamp_index;

    auto stamp_key = [](const Timestamp& ts) {
        return ts.is_index ? "i" + std::to_string(ts.index) : "h" + format_g9(ts.hours);
    };

    for (size_t r = 0; r < table.rows.size(); ++r) {
        auto ts = parse_timestamp(table.rows[r][ts_col]);
        if (!ts) fail_row(path, table.line[r], "unparsable timestamp '" + table.rows[r][ts_col] + "'");
        const std::string key = stamp_key(*ts);
        if (stamp_index.find(key) == stamp_index.end()) {
            stamp_index[key] = static_cast<long>(stamps.size());
            stamps.push_back(*ts);
            stamp_lines.push_back(table.line[r]);
        }
        const std::string& id = table.rows[r][id_col];
        if (id.empty()) fail_row(path, table.line[r], "missing prosumer id");
        if (id_index.find(id) == id_index.end()) {
            id_index[id] = static_cast<int>(ids.size());
            ids.push_back(id);
        }
    }

    const TimeAxis axis = check_axis(path, stamps, stamp_lines, schema.index_step_hours);

    NetConsumptionSeries series;
    series.prosumer_ids = ids;
    series.step_hours = axis.step_hours;
    series.demand.resize(static_cast<int>(ids.size()), static_cast<long>(stamps.size()));

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen(ids.size(), stamps.size());
    seen.setConstant(false);
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const long t = stamp_index.at(stamp_key(*parse_timestamp(table.rows[r][ts_col])));
        const int i = id_index.at(table.rows[r][id_col]);
        if (seen(i, t)) fail_row(path, table.line[r], "duplicate (timestamp, prosumer) pair");
        seen(i, t) = true;
        series.demand(i, t) = parse_value(path, table.line[r], table.rows[r][value_col]);
    }
    for (int i = 0; i < series.prosumers(); ++i) {
        for (long t = 0; t < series.length(); ++t) {
            if (!seen(i, t)) {
                fail_row(path, stamp_lines[static_cast<size_t>(t)],
                         "missing value for prosumer '" + ids[static_cast<size_t>(i)] + "'");
            }
        }
    }
    return series;
}

}  // namespace

void NetConsumptionSeries::validate() const {
    if (demand.rows() < 1 || demand.cols() < 1) {
        throw std::invalid_argument("series must contain at least one prosumer and one step");
    }
    if (!(step_hours > 0.0)) throw std::invalid_argument("step_hours must be > 0");
    if (!demand.allFinite()) throw std::invalid_argument("series contains non-finite values");
    if (!prosumer_ids.empty() && static_cast<int>(prosumer_ids.size()) != prosumers()) {
        throw std::invalid_argument("prosumer id count does not match series rows");
    }
}

NetConsumptionSeries load_csv(const std::string& path, const CsvSchema& schema) {
    const CsvTable table = read_csv_file(path);
    if (table.rows.empty()) throw std::runtime_error(path + ": no data rows");

    const auto ts_col = table.column(schema.timestamp_column);
    const auto id_col = table.column(schema.id_column);
    const auto value_col = table.column(schema.value_column);

    bool long_form = false;
    switch (schema.layout) {
        case CsvSchema::Layout::wide: long_form = false; break;
        case CsvSchema::Layout::long_form: long_form = true; break;
        case CsvSchema::Layout::autodetect: long_form = id_col && value_col; break;
    }

    if (long_form) {
        if (!ts_col || !id_col || !value_col) {
            throw std::runtime_error(path + ": long format needs columns '" + schema.timestamp_column +
                                     "', '" + schema.id_column + "', '" + schema.value_column + "'");
        }
        auto series = load_long(path, table, schema, *ts_col, *id_col, *value_col);
        series.validate();
        return series;
    }
    const int ts = ts_col ? *ts_col : 0;  // fall back to the first column
    auto series = load_wide(path, table, schema, ts);
    series.validate();
    return series;
}

NetConsumptionSeries synth_scenario(std::uint64_t seed, int prosumers, long length,
                                    const SynthProfile& profile, double step_hours) {
    if (prosumers < 1) throw std::invalid_argument("synth_scenario: prosumers must be >= 1");
    if (length < 1) throw std::invalid_argument("synth_scenario: length must be >= 1");
    if (!(step_hours > 0.0)) throw std::invalid_argument("synth_scenario: step_hours must be > 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    NetConsumptionSeries series;
    series.step_hours = step_hours;
    series.demand.resize(prosumers, length);
    series.prosumer_ids.reserve(static_cast<size_t>(prosumers));

    // When a day is an integer number of steps, index within the day so the
    // noise-free profile repeats bit for bit.
    const double steps_per_day = 24.0 / step_hours;
    const long day_steps = std::abs(steps_per_day - std::round(steps_per_day)) < 1e-9
                               ? static_cast<long>(std::llround(steps_per_day))
                               : 0;

    for (int i = 0; i < prosumers; ++i) {
        series.prosumer_ids.push_back("p" + std::to_string(i + 1));
        // Per-household variation of load scale, solar scale and phase.
        const double load_scale = 0.7 + 0.6 * unit(rng);
        const double solar_scale = 0.7 + 0.6 * unit(rng);
        const double phase = 2.0 * (unit(rng) - 0.5);  // hours
        for (long n = 0; n < length; ++n) {
            const long step_in_day = day_steps > 0 ? n % day_steps : n;
            const double hour =
                std::fmod(static_cast<double>(step_in_day) * step_hours + phase + 24.0, 24.0);
            // Morning and evening consumption peaks on top of a base level.
            const double load =
                profile.base_load * load_scale *
                (0.75 + 0.35 * std::exp(-0.5 * std::pow((hour - 7.5) / 1.8, 2)) +
                 0.55 * std::exp(-0.5 * std::pow((hour - 19.0) / 2.2, 2)));
            // Generation bump centered at noon, zero outside daylight.
            double solar = 0.0;
            if (hour > 6.0 && hour < 18.0) {
                solar = profile.solar_amplitude * solar_scale *
                        std::pow(std::cos(kPi * (hour - 12.0) / 12.0), 2);
            }
            const double noise = profile.noise_level * 2.0 * (unit(rng) - 0.5);
            series.demand(i, n) = load - solar + noise;
        }
    }
    return series;
}

NetConsumptionSeries perturb_forecast(const NetConsumptionSeries& series,
                                      std::uint64_t seed, double noise_level) {
    NetConsumptionSeries out = series;
    if (noise_level == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < out.prosumers(); ++i) {
        for (long n = 0; n < out.length(); ++n) {
            out.demand(i, n) += noise_level * unit(rng);
        }
    }
    return out;
}

Eigen::VectorXd reference_values(const NetConsumptionSeries& history, long k, int horizon) {
    if (horizon < 1) throw std::invalid_argument("reference_values: horizon must be >= 1");
    if (k < 0) throw std::invalid_argument("reference_values: k must be >= 0");
    if (k + horizon > history.length()) {
        std::ostringstream out;
        out << "reference_values: series of length " << history.length()
            << " cannot supply window [" << k << ", " << k + horizon - 1 << "]";
        throw std::invalid_argument(out.str());
    }

    const int prosumer_count = history.prosumers();
    Eigen::VectorXd zeta(horizon);
    for (int offset = 0; offset < horizon; ++offset) {
        const long n = k + offset;
        const long window = std::min<long>(horizon, n + 1);
        double sum = 0.0;
        for (long j = n - std::min<long>(n, horizon - 1); j <= n; ++j) {
            sum += history.demand.col(j).sum();
        }
        zeta[offset] = sum / (static_cast<double>(prosumer_count) * static_cast<double>(window));
    }
    return zeta;
}

}  // namespace gridmop
