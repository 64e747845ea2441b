#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/errors.hpp"

// CSV formats (UTF-8, LF line endings):
//   forcing:    hour,temperature_K
//   trajectory: hour,<state labels...>,U   (the final row leaves U empty)
// Either may start with `# key=value` metadata lines, which readers skip.

namespace spdsysid::data {

namespace csv {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("not a number: '" + std::string(field) + "'", line);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite value", line);
    return v;
}

inline std::int64_t parse_hour(std::string_view field, std::size_t line) {
    field = trim(field);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("hour is not an integer: '" + std::string(field) + "'", line);
    }
    return v;
}

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

inline void check_hour(std::int64_t hour, std::int64_t expected, std::size_t line) {
    if (hour != expected) {
        throw GapError("expected hour " + std::to_string(expected) + ", found " + std::to_string(hour), line);
    }
}

using Metadata = std::map<std::string, std::string>;

inline void write_metadata(std::ostream& out, const Metadata& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
}

/// Reads the first line that is not a `#` comment; false at end of input.
inline bool read_header(std::istream& in, std::string& line, std::size_t& line_no) {
    line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.starts_with('#')) return true;
    }
    return false;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace csv

inline ForcingSeries read_forcing_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::read_header(in, line, line_no)) throw ParseError("empty forcing file", line_no + 1);
    if (csv::trim(line) != "hour,temperature_K") {
        throw ParseError("expected header 'hour,temperature_K'", line_no);
    }
    ForcingSeries out;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != 2) throw ParseError("expected 2 fields, found " + std::to_string(fields.size()), line_no);
        const std::int64_t hour = csv::parse_hour(fields[0], line_no);
        if (out.values.empty()) {
            out.start_hour = hour;
        } else {
            csv::check_hour(hour, out.hour(out.values.size()), line_no);
        }
        out.values.push_back(csv::parse_double(fields[1], line_no));
    }
    return out;
}

/// @throws IoError, ParseError (with line number), GapError on non-consecutive hours.
inline ForcingSeries load_forcing_csv(const std::string& path) {
    auto in = csv::open_input(path);
    return read_forcing_csv(in);
}

inline void write_forcing_csv(std::ostream& out, const ForcingSeries& f, const csv::Metadata& meta = {}) {
    csv::write_metadata(out, meta);
    out << "hour,temperature_K\n";
    for (std::size_t i = 0; i < f.size(); ++i) out << f.hour(i) << ',' << csv::format_double(f.values[i]) << '\n';
}

inline void save_forcing_csv(const std::string& path, const ForcingSeries& f, const csv::Metadata& meta = {}) {
    auto out = csv::open_output(path);
    write_forcing_csv(out, f, meta);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const csv::Metadata& meta = {}) {
    csv::write_metadata(out, meta);
    out << "hour";
    for (const auto& l : traj.labels) out << ',' << l;
    out << ",U\n";
    for (std::size_t t = 0; t < traj.states.rows(); ++t) {
        out << traj.forcing.hour(t);
        for (std::size_t j = 0; j < traj.states.cols(); ++j) out << ',' << csv::format_double(traj.states(t, j));
        out << ',';
        if (t < traj.length()) out << csv::format_double(traj.forcing.values[t]);
        out << '\n';
    }
}

inline void save_trajectory_csv(const std::string& path, const Trajectory& traj, const csv::Metadata& meta = {}) {
    auto out = csv::open_output(path);
    write_trajectory_csv(out, traj, meta);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::read_header(in, line, line_no)) throw ParseError("empty trajectory file", line_no + 1);
    const auto header = csv::split_fields(csv::trim(line));
    if (header.size() < 3 || csv::trim(header.front()) != "hour" || csv::trim(header.back()) != "U") {
        throw ParseError("expected header 'hour,<states...>,U'", line_no);
    }
    std::vector<std::string> labels;
    for (std::size_t k = 1; k + 1 < header.size(); ++k) labels.emplace_back(csv::trim(header[k]));
    const std::size_t n = labels.size();

    std::vector<double> flat;
    ForcingSeries forcing;
    bool finished = false;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        if (finished) throw ParseError("rows after the final (forcing-free) row", line_no);
        const auto fields = csv::split_fields(line);
        if (fields.size() != n + 2) {
            throw ParseError("expected " + std::to_string(n + 2) + " fields, found " + std::to_string(fields.size()),
                             line_no);
        }
        const std::int64_t hour = csv::parse_hour(fields[0], line_no);
        if (rows == 0) {
            forcing.start_hour = hour;
        } else {
            csv::check_hour(hour, forcing.start_hour + static_cast<std::int64_t>(rows), line_no);
        }
        for (std::size_t j = 0; j < n; ++j) flat.push_back(csv::parse_double(fields[j + 1], line_no));
        if (csv::trim(fields.back()).empty()) {
            finished = true;
        } else {
            forcing.values.push_back(csv::parse_double(fields.back(), line_no));
        }
        ++rows;
    }
    if (!finished) throw ParseError("trajectory must end with a row whose U field is empty", line_no);
    Matrix states(rows, n);
    std::copy(flat.begin(), flat.end(), states.data().begin());
    return {std::move(states), std::move(forcing), std::move(labels)};
}

inline Trajectory load_trajectory_csv(const std::string& path) {
    auto in = csv::open_input(path);
    return read_trajectory_csv(in);
}

}  // namespace spdsysid::data
