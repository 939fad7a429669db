#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "digest.hpp"
#include "error.hpp"

namespace urban_pulse {

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// WGS84 position in degrees.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Planar position in meters, east (x) and north (y) of a city origin.
struct ProjectedPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const ProjectedPoint&, const ProjectedPoint&) = default;
};

inline bool is_valid(GeoPoint p) noexcept {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

inline double distance(ProjectedPoint a, ProjectedPoint b) noexcept {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance_squared(ProjectedPoint a, ProjectedPoint b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline constexpr double to_radians(double degrees) noexcept {
    return degrees * std::numbers::pi / 180.0;
}

/// Local equirectangular projection. Offsets are measured from `origin`; the
/// east-west scale uses the cosine of `reference_lat`.
class LocalProjection {
public:
    LocalProjection() = default;
    LocalProjection(GeoPoint origin, double reference_lat)
        : origin_(origin), reference_lat_(reference_lat),
          meters_per_rad_x_(kEarthRadiusM * std::cos(to_radians(reference_lat))) {
        if (!is_valid(origin) || !std::isfinite(reference_lat) || std::abs(reference_lat) >= 90.0) {
            throw InvalidArgument("projection origin must be a valid, non-polar position");
        }
    }

    [[nodiscard]] ProjectedPoint project(GeoPoint p) const {
        if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
            throw InvalidArgument("cannot project a non-finite position");
        }
        return {meters_per_rad_x_ * to_radians(p.lon - origin_.lon),
                kEarthRadiusM * to_radians(p.lat - origin_.lat)};
    }

    [[nodiscard]] GeoPoint unproject(ProjectedPoint p) const {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw InvalidArgument("cannot unproject a non-finite position");
        }
        constexpr double deg_per_rad = 180.0 / std::numbers::pi;
        return {origin_.lat + p.y / kEarthRadiusM * deg_per_rad,
                origin_.lon + p.x / meters_per_rad_x_ * deg_per_rad};
    }

    [[nodiscard]] GeoPoint origin() const noexcept { return origin_; }
    [[nodiscard]] double reference_lat() const noexcept { return reference_lat_; }

private:
    GeoPoint origin_{};
    double reference_lat_ = 0.0;
    double meters_per_rad_x_ = kEarthRadiusM;
};

/// x = R cos(origin.lat) dlon, y = R dlat, both in radians.
inline ProjectedPoint project(GeoPoint p, GeoPoint origin) {
    return LocalProjection(origin, origin.lat).project(p);
}

inline GeoPoint unproject(ProjectedPoint p, GeoPoint origin) {
    return LocalProjection(origin, origin.lat).unproject(p);
}

struct GeoBounds {
    double south = 0.0;
    double west = 0.0;
    double north = 0.0;
    double east = 0.0;

    [[nodiscard]] GeoPoint south_west() const noexcept { return {south, west}; }
    [[nodiscard]] GeoPoint center() const noexcept {
        return {(south + north) / 2.0, (west + east) / 2.0};
    }
    /// Projection anchored at the south-west corner, scaled at the center latitude.
    [[nodiscard]] LocalProjection projection() const {
        return LocalProjection(south_west(), center().lat);
    }
    [[nodiscard]] bool contains(GeoPoint p) const noexcept {
        return p.lat >= south && p.lat <= north && p.lon >= west && p.lon <= east;
    }
};

/// Per-city settings, read from the city config JSON.
struct CityConfig {
    std::string name;
    GeoBounds bounds;
    double spacing_m = 50.0;
    double epsilon_m = 100.0;
    int utc_offset_minutes = 0;

    /// Kernel truncation radius, fixed at five influence lengths.
    [[nodiscard]] double radius_m() const noexcept { return 5.0 * epsilon_m; }

    void validate() const {
        if (name.empty()) throw FormatError("city config: name must not be empty");
        if (!is_valid(bounds.south_west()) || !is_valid({bounds.north, bounds.east}) ||
            !(bounds.north > bounds.south) || !(bounds.east > bounds.west)) {
            throw FormatError("city config: bounds must satisfy south < north and west < east");
        }
        if (!(spacing_m > 0.0) || !std::isfinite(spacing_m)) {
            throw FormatError("city config: spacing_m must be positive");
        }
        if (!(epsilon_m > 0.0) || !std::isfinite(epsilon_m)) {
            throw FormatError("city config: epsilon_m must be positive");
        }
        if (utc_offset_minutes < -14 * 60 || utc_offset_minutes > 14 * 60) {
            throw FormatError("city config: utc_offset_minutes out of range");
        }
    }

    [[nodiscard]] nlohmann::json to_json() const {
        return {{"name", name},
                {"bounds",
                 {{"south", bounds.south},
                  {"west", bounds.west},
                  {"north", bounds.north},
                  {"east", bounds.east}}},
                {"spacing_m", spacing_m},
                {"epsilon_m", epsilon_m},
                {"utc_offset_minutes", utc_offset_minutes}};
    }

    static CityConfig from_json(const nlohmann::json& j) {
        CityConfig c;
        try {
            c.name = j.at("name").get<std::string>();
            const auto& b = j.at("bounds");
            c.bounds = {b.at("south").get<double>(), b.at("west").get<double>(),
                        b.at("north").get<double>(), b.at("east").get<double>()};
            c.spacing_m = j.value("spacing_m", 50.0);
            c.epsilon_m = j.value("epsilon_m", 100.0);
            c.utc_offset_minutes = j.value("utc_offset_minutes", 0);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("city config: ") + e.what());
        }
        c.validate();
        return c;
    }

    static CityConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open city config " + path.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("city config " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }

    /// Fingerprint of the canonical JSON form (keys sorted by nlohmann::json).
    [[nodiscard]] std::uint64_t digest() const { return fnv1a(to_json().dump()); }
};

} // namespace urban_pulse
