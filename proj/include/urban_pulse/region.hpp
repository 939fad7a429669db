#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "geo.hpp"

namespace urban_pulse {

/// Simple polygon in lon/lat, tested with the even-odd rule.
class Polygon {
public:
    /// Accepts an open or closed ring. Throws InvalidArgument for fewer than
    /// three distinct vertices, invalid positions or zero area.
    static Polygon from_ring(std::vector<GeoPoint> ring) {
        if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
        std::vector<GeoPoint> cleaned;
        for (const GeoPoint& p : ring) {
            if (!is_valid(p)) throw InvalidArgument("polygon vertex is not a valid lon/lat position");
            if (cleaned.empty() || !(cleaned.back() == p)) cleaned.push_back(p);
        }
        if (cleaned.size() >= 2 && cleaned.front() == cleaned.back()) cleaned.pop_back();
        if (cleaned.size() < 3) throw InvalidArgument("polygon needs at least three distinct vertices");
        double twice_area = 0.0;
        for (std::size_t i = 0; i < cleaned.size(); ++i) {
            const GeoPoint& a = cleaned[i];
            const GeoPoint& b = cleaned[(i + 1) % cleaned.size()];
            twice_area += a.lon * b.lat - b.lon * a.lat;
        }
        if (std::abs(twice_area) <= 1e-18) throw InvalidArgument("polygon has zero area");
        Polygon poly;
        poly.ring_ = std::move(cleaned);
        return poly;
    }

    [[nodiscard]] bool contains(GeoPoint p) const noexcept {
        bool inside = false;
        const std::size_t n = ring_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const GeoPoint& a = ring_[i];
            const GeoPoint& b = ring_[j];
            if ((a.lat > p.lat) != (b.lat > p.lat) &&
                p.lon < (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon) {
                inside = !inside;
            }
        }
        return inside;
    }

    [[nodiscard]] const std::vector<GeoPoint>& ring() const noexcept { return ring_; }

private:
    std::vector<GeoPoint> ring_;
};

/// Ring given as `[[lon, lat], ...]`.
inline Polygon polygon_from_lonlat(const nlohmann::json& coords) {
    if (!coords.is_array()) throw InvalidArgument("polygon ring must be an array of [lon, lat]");
    std::vector<GeoPoint> ring;
    for (const auto& c : coords) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
            throw InvalidArgument("polygon vertex must be [lon, lat]");
        }
        ring.push_back({c[1].get<double>(), c[0].get<double>()});
    }
    return Polygon::from_ring(std::move(ring));
}

/// Outer ring of a GeoJSON Polygon, Feature or FeatureCollection (first feature).
inline Polygon polygon_from_geojson(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("GeoJSON must be an object");
    const std::string type = j.value("type", "");
    if (type == "FeatureCollection") {
        const auto& features = j.at("features");
        if (!features.is_array() || features.empty()) throw InvalidArgument("FeatureCollection is empty");
        return polygon_from_geojson(features.front());
    }
    if (type == "Feature") return polygon_from_geojson(j.at("geometry"));
    if (type == "Polygon") {
        const auto& rings = j.at("coordinates");
        if (!rings.is_array() || rings.empty()) throw InvalidArgument("Polygon has no rings");
        return polygon_from_lonlat(rings.front());
    }
    throw InvalidArgument("unsupported GeoJSON type '" + type + "'");
}

} // namespace urban_pulse
