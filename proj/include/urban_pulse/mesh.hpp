#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "geo.hpp"

namespace urban_pulse {

using VertexId = std::uint32_t;

/// Ordered link of a vertex. Interior vertices have a closed cycle of six
/// neighbors; boundary vertices have an open path.
struct VertexLink {
    std::array<VertexId, 6> vertices{};
    std::uint8_t size = 0;
    bool cyclic = false;

    [[nodiscard]] std::span<const VertexId> neighbors() const noexcept {
        return {vertices.data(), size};
    }
};

/// Regular grid over a city's bounding box, triangulated by splitting every
/// cell along its (i, j)-(i+1, j+1) diagonal. Vertex ids are row-major:
/// id = j * nx + i, position = (i * spacing, j * spacing).
class Mesh {
public:
    Mesh(LocalProjection projection, int nx, int ny, double spacing)
        : projection_(projection), nx_(nx), ny_(ny), spacing_(spacing) {
        if (nx < 2 || ny < 2) throw InvalidArgument("mesh needs at least 2x2 vertices");
        if (!(spacing > 0.0) || !std::isfinite(spacing)) {
            throw InvalidArgument("mesh spacing must be positive");
        }
        if (static_cast<std::uint64_t>(nx) * static_cast<std::uint64_t>(ny) > 0xffffffffull) {
            throw InvalidArgument("mesh too large");
        }
    }

    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] int ny() const noexcept { return ny_; }
    [[nodiscard]] double spacing() const noexcept { return spacing_; }
    [[nodiscard]] const LocalProjection& projection() const noexcept { return projection_; }

    [[nodiscard]] std::size_t vertex_count() const noexcept {
        return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
    }
    [[nodiscard]] std::size_t triangle_count() const noexcept {
        return 2u * static_cast<std::size_t>(nx_ - 1) * static_cast<std::size_t>(ny_ - 1);
    }
    [[nodiscard]] std::size_t edge_count() const noexcept {
        const auto nx = static_cast<std::size_t>(nx_);
        const auto ny = static_cast<std::size_t>(ny_);
        return (nx - 1) * ny + nx * (ny - 1) + (nx - 1) * (ny - 1);
    }

    [[nodiscard]] bool contains(VertexId v) const noexcept { return v < vertex_count(); }

    [[nodiscard]] VertexId vertex_id(int i, int j) const noexcept {
        return static_cast<VertexId>(j) * static_cast<VertexId>(nx_) + static_cast<VertexId>(i);
    }
    [[nodiscard]] int column(VertexId v) const noexcept { return static_cast<int>(v % nx_); }
    [[nodiscard]] int row(VertexId v) const noexcept { return static_cast<int>(v / nx_); }

    [[nodiscard]] ProjectedPoint position(VertexId v) const noexcept {
        return {column(v) * spacing_, row(v) * spacing_};
    }
    [[nodiscard]] GeoPoint geo_position(VertexId v) const { return projection_.unproject(position(v)); }

    /// Extent of the vertex grid in meters.
    [[nodiscard]] double width_m() const noexcept { return (nx_ - 1) * spacing_; }
    [[nodiscard]] double height_m() const noexcept { return (ny_ - 1) * spacing_; }

    /// Ordered link of `v`. Throws InvalidArgument for an unknown id.
    [[nodiscard]] VertexLink link(VertexId v) const {
        if (!contains(v)) throw InvalidArgument("vertex id " + std::to_string(v) + " out of range");
        const int i = column(v);
        const int j = row(v);

        // Triangle k of the fan spans link slots k and k+1 (mod 6).
        std::array<bool, 6> tri{};
        for (int k = 0; k < 6; ++k) {
            const auto [ci, cj] = kTriangleCell[k];
            tri[k] = has_cell(i + ci, j + cj);
        }

        VertexLink out;
        int start = -1;
        for (int k = 0; k < 6; ++k) {
            if (tri[k] && !tri[(k + 5) % 6]) {
                start = k;
                break;
            }
        }
        auto slot_vertex = [&](int k) {
            return vertex_id(i + kSlotOffset[k][0], j + kSlotOffset[k][1]);
        };
        if (start < 0) {
            // Every triangle present: closed fan.
            out.cyclic = true;
            for (int k = 0; k < 6; ++k) out.vertices[out.size++] = slot_vertex(k);
            return out;
        }
        out.vertices[out.size++] = slot_vertex(start);
        for (int k = start; tri[k % 6] && out.size < 6; ++k) {
            out.vertices[out.size++] = slot_vertex((k + 1) % 6);
            if ((k + 1) % 6 == start) break;
        }
        return out;
    }

private:
    [[nodiscard]] bool has_cell(int ci, int cj) const noexcept {
        return ci >= 0 && cj >= 0 && ci < nx_ - 1 && cj < ny_ - 1;
    }

    // Link slots in counter-clockwise order: E, NE, N, W, SW, S.
    static constexpr int kSlotOffset[6][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}};
    // Grid cell (relative to the vertex) that holds fan triangle k.
    static constexpr std::array<std::array<int, 2>, 6> kTriangleCell = {
        {{0, 0}, {0, 0}, {-1, 0}, {-1, -1}, {-1, -1}, {0, -1}}};

    LocalProjection projection_;
    int nx_;
    int ny_;
    double spacing_;
};

/// nx = floor(width / spacing) + 1, likewise ny; the last row and column never
/// pass the bounds.
inline Mesh build_mesh(const GeoBounds& bounds, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw InvalidArgument("spacing must be positive");
    if (!(bounds.north > bounds.south) || !(bounds.east > bounds.west)) {
        throw InvalidArgument("degenerate bounds");
    }
    const LocalProjection projection = bounds.projection();
    const ProjectedPoint ne = projection.project({bounds.north, bounds.east});
    if (ne.x < spacing || ne.y < spacing) {
        throw InvalidArgument("bounds smaller than mesh spacing");
    }
    const auto nx = static_cast<long long>(std::floor(ne.x / spacing)) + 1;
    const auto ny = static_cast<long long>(std::floor(ne.y / spacing)) + 1;
    if (nx > 1'000'000 || ny > 1'000'000) throw InvalidArgument("mesh too large");
    return Mesh(projection, static_cast<int>(nx), static_cast<int>(ny), spacing);
}

inline Mesh build_mesh(const CityConfig& city) { return build_mesh(city.bounds, city.spacing_m); }

inline std::vector<VertexId> vertex_link(const Mesh& mesh, VertexId v) {
    const VertexLink link = mesh.link(v);
    return {link.neighbors().begin(), link.neighbors().end()};
}

} // namespace urban_pulse
