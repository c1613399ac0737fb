#ifndef GRIDMOP_CSV_HPP_
#define GRIDMOP_CSV_HPP_

#include <optional>
#include <string>
#include <vector>

namespace gridmop {

/// A parsed CSV file: header row plus data rows. `line` records the
/// 1-based line a row started on, for error reporting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<long> line;

    std::optional<int> column(const std::string& name) const;
};

/// Reads an RFC 4180 file: quoted fields may contain commas, doubled
/// quotes and line breaks. Requires a header row. Throws std::runtime_error
/// with the offending line number on ragged or malformed rows.
CsvTable read_csv_file(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>");

/// Timestamp of a data row: either an ISO-8601 wall-clock time (converted
/// to hours) or a bare integer step index.
struct Timestamp {
    bool is_index = false;
    double hours = 0.0;
    long index = 0;
};

/// Accepts "YYYY-MM-DD[T| ]HH:MM[:SS]" or a plain integer. Returns nullopt
/// on anything else.
std::optional<Timestamp> parse_timestamp(const std::string& field);

/// Shortest representation with 9 significant digits ("%.9g").
std::string format_g9(double value);

std::string csv_escape(const std::string& field);

}  // namespace gridmop

#endif  // GRIDMOP_CSV_HPP_
