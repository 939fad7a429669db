#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "geo.hpp"
#include "temporal.hpp"

namespace urban_pulse {

/// One input event, already projected into city meters.
struct DataPoint {
    ProjectedPoint location;
    Timestamp timestamp = 0;
    double weight = 1.0;
};

/// Counters from parse_points. Malformed rows and out-of-bounds rows are
/// counted separately; neither stops the parse.
struct RejectionReport {
    std::size_t rows = 0;
    std::size_t accepted = 0;
    std::size_t malformed = 0;
    std::size_t out_of_bounds = 0;
    std::vector<std::string> warnings;
};

struct ParsedPoints {
    std::vector<DataPoint> points;
    RejectionReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

/// Splits one CSV line. Quoted cells may contain commas; doubled quotes are
/// not unescaped since none of the accepted columns need them.
inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == ',' && !quoted) {
            cells.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    cells.push_back(trim(line.substr(start)));
    return cells;
}

inline std::optional<double> parse_double(std::string_view s) noexcept {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace detail

/// Reads `lat,lon,timestamp[,weight]` CSV (header required, column order free).
/// Points farther than the kernel radius outside the city bounds are dropped.
/// Throws FormatError when a required column is missing.
inline ParsedPoints parse_points(std::istream& in, const CityConfig& city) {
    ParsedPoints out;
    std::string line;
    if (!std::getline(in, line)) {
        out.report.warnings.emplace_back("input is empty; no points accepted");
        return out;
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }

    int col_lat = -1, col_lon = -1, col_time = -1, col_weight = -1;
    const auto header = detail::split_csv(line);
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = detail::lower(header[i]);
        const int idx = static_cast<int>(i);
        if (name == "lat" || name == "latitude") col_lat = idx;
        else if (name == "lon" || name == "lng" || name == "longitude") col_lon = idx;
        else if (name == "timestamp" || name == "time") col_time = idx;
        else if (name == "weight") col_weight = idx;
    }
    if (col_lat < 0 || col_lon < 0 || col_time < 0) {
        throw FormatError("input CSV header must contain lat, lon and timestamp columns");
    }
    const auto needed = static_cast<std::size_t>(std::max({col_lat, col_lon, col_time}) + 1);

    const LocalProjection projection = city.bounds.projection();
    const ProjectedPoint far_corner = projection.project({city.bounds.north, city.bounds.east});
    const double margin = city.radius_m();

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        ++out.report.rows;

        const auto cells = detail::split_csv(line);
        const bool has_weight = col_weight >= 0 && static_cast<int>(cells.size()) > col_weight &&
                                !cells[static_cast<std::size_t>(col_weight)].empty();
        if (cells.size() < needed) {
            ++out.report.malformed;
            continue;
        }
        const auto lat = detail::parse_double(cells[static_cast<std::size_t>(col_lat)]);
        const auto lon = detail::parse_double(cells[static_cast<std::size_t>(col_lon)]);
        const auto ts = parse_timestamp(cells[static_cast<std::size_t>(col_time)]);
        std::optional<double> weight = 1.0;
        if (has_weight) weight = detail::parse_double(cells[static_cast<std::size_t>(col_weight)]);
        if (!lat || !lon || !ts || !weight || *weight < 0.0 || !is_valid({*lat, *lon})) {
            ++out.report.malformed;
            continue;
        }

        const ProjectedPoint p = projection.project({*lat, *lon});
        if (p.x < -margin || p.y < -margin || p.x > far_corner.x + margin ||
            p.y > far_corner.y + margin) {
            ++out.report.out_of_bounds;
            continue;
        }
        out.points.push_back({p, *ts, *weight});
    }
    out.report.accepted = out.points.size();
    if (out.points.empty()) out.report.warnings.emplace_back("no points accepted");
    return out;
}

} // namespace urban_pulse
