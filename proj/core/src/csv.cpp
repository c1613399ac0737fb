#include "gridmop/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridmop {

namespace {

[[noreturn]] void csv_fail(const std::string& origin, long line, const std::string& message) {
    std::ostringstream out;
    out << origin << ":" << line << ": " << message;
    throw std::runtime_error(out.str());
}

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil).
long days_from_civil(long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

}  // namespace

std::optional<int> CsvTable::column(const std::string& name) const {
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    };
    const std::string want = lower(name);
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (lower(header[i]) == want) return i;
    }
    return std::nullopt;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    long line = 1;
    long record_line = 1;
    bool any_field = false;

    auto push_field = [&]() {
        record.push_back(field);
        field.clear();
        field_was_quoted = false;
        any_field = true;
    };
    auto push_record = [&]() {
        push_field();
        if (table.header.empty()) {
            table.header = record;
        } else {
            if (record.size() != table.header.size()) {
                std::ostringstream msg;
                msg << "expected " << table.header.size() << " fields, got " << record.size();
                csv_fail(origin, record_line, msg.str());
            }
            table.rows.push_back(record);
            table.line.push_back(record_line);
        }
        record.clear();
        any_field = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) csv_fail(origin, line, "stray quote inside unquoted field");
                in_quotes = true;
                field_was_quoted = true;
                break;
            case ',':
                push_field();
                break;
            case '\r':
                break;
            case '\n':
                push_record();
                ++line;
                record_line = line;
                break;
            default:
                field += c;
        }
    }
    if (in_quotes) csv_fail(origin, line, "unterminated quoted field");
    if (any_field || !field.empty() || !record.empty()) push_record();

    if (table.header.empty()) csv_fail(origin, 1, "missing header row");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), path);
}

std::optional<Timestamp> parse_timestamp(const std::string& field) {
    if (field.empty()) return std::nullopt;

    bool all_digits = true;
    for (size_t i = (field[0] == '-' || field[0] == '+') ? 1 : 0; i < field.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(field[i]))) {
            all_digits = false;
            break;
        }
    }
    if (all_digits) {
        Timestamp ts;
        ts.is_index = true;
        try {
            ts.index = std::stol(field);
        } catch (const std::exception&) {
            return std::nullopt;
        }
        return ts;
    }

    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    char sep = 0;
    const int n = std::sscanf(field.c_str(), "%d-%d-%d%c%d:%d:%d",
                              &year, &month, &day, &sep, &hour, &minute, &second);
    if (n < 6 || (sep != 'T' && sep != ' ')) return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 60) {
        return std::nullopt;
    }
    Timestamp ts;
    ts.hours = 24.0 * static_cast<double>(days_from_civil(year, static_cast<unsigned>(month),
                                                          static_cast<unsigned>(day))) +
               hour + minute / 60.0 + second / 3600.0;
    return ts;
}

std::string format_g9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace gridmop
