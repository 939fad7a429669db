#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"
#include "points.hpp"
#include "temporal.hpp"

namespace urban_pulse {

/// Gaussian kernel scale and truncation radius, in meters.
struct DensityParams {
    double epsilon_m = 100.0;
    double radius_m = 500.0;

    static DensityParams for_epsilon(double epsilon_m) { return {epsilon_m, 5.0 * epsilon_m}; }

    void validate() const {
        if (!(epsilon_m > 0.0) || !std::isfinite(epsilon_m) || !std::isfinite(radius_m) ||
            radius_m < epsilon_m) {
            throw InvalidArgument("density params need radius >= epsilon > 0");
        }
    }
};

/// How point weights combine at a vertex. Mean keeps the kernel-weighted sum
/// and the kernel-weighted count and divides them.
enum class Aggregate : std::uint8_t { Sum = 0, Mean = 1 };

/// Scalar function for one (resolution, step).
struct ScalarField {
    Resolution resolution = Resolution::All;
    int step = 0;
    /// Raw function value per vertex.
    std::vector<double> values;
    /// Aggregate::Mean only: kernel-weighted weight sums and point counts.
    std::vector<double> sums;
    std::vector<double> counts;
    /// Largest raw value over every step of this resolution.
    double resolution_max = 0.0;

    [[nodiscard]] double normalized(VertexId v) const noexcept {
        return resolution_max > 0.0 ? values[v] / resolution_max : 0.0;
    }

    [[nodiscard]] std::vector<double> normalized_values() const {
        std::vector<double> out(values.size(), 0.0);
        if (resolution_max > 0.0) {
            std::transform(values.begin(), values.end(), out.begin(),
                           [m = resolution_max](double v) { return v / m; });
        }
        return out;
    }
};

/// Every field of one scenario part, ordered by resolution then step.
struct FieldCollection {
    Scenario scenario;
    Aggregate aggregate = Aggregate::Sum;
    int nx = 0;
    int ny = 0;
    double spacing = 0.0;
    std::uint64_t config_digest = 0;
    std::vector<ScalarField> fields;
    /// Non-fatal notes from computation; not persisted.
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t vertex_count() const noexcept {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }

    [[nodiscard]] const ScalarField* find(Resolution r, int step) const noexcept {
        for (const ScalarField& f : fields) {
            if (f.resolution == r && f.step == step) return &f;
        }
        return nullptr;
    }

    [[nodiscard]] const ScalarField& field(Resolution r, int step) const {
        if (const ScalarField* f = find(r, step)) return *f;
        throw NotFound("no field for " + std::string(to_string(r)) + " step " + std::to_string(step));
    }

    [[nodiscard]] double resolution_max(Resolution r) const {
        return field(r, 0).resolution_max;
    }
};

/// Grid index over mesh vertices with square cells of side `cell_size`.
/// The cells a point's radius touches are found in O(1); vertices of a cell
/// form a rectangular id range, so no per-cell lists are stored.
class GridIndex {
public:
    GridIndex(const Mesh& mesh, double cell_size) : mesh_(&mesh), cell_(cell_size) {
        if (!(cell_size > 0.0)) throw InvalidArgument("grid index cell size must be positive");
        cells_x_ = cell_of(mesh.width_m()) + 1;
        cells_y_ = cell_of(mesh.height_m()) + 1;
    }

    [[nodiscard]] long cell_of(double coord) const noexcept {
        return static_cast<long>(std::floor(coord / cell_));
    }
    [[nodiscard]] long cells_x() const noexcept { return cells_x_; }
    [[nodiscard]] long cells_y() const noexcept { return cells_y_; }

    /// Calls `fn(i_first, i_last, j)` for every vertex row segment inside the
    /// cells overlapped by the square [p - reach, p + reach].
    template <class Fn>
    void for_each_candidate_row(ProjectedPoint p, double reach, Fn&& fn) const {
        const long cx0 = std::max(cell_of(p.x - reach), 0L);
        const long cx1 = std::min(cell_of(p.x + reach), cells_x_ - 1);
        const long cy0 = std::max(cell_of(p.y - reach), 0L);
        const long cy1 = std::min(cell_of(p.y + reach), cells_y_ - 1);
        if (cx0 > cx1 || cy0 > cy1) return;
        const int i0 = first_index(cx0, mesh_->nx());
        const int i1 = first_index(cx1 + 1, mesh_->nx()) - 1;
        const int j0 = first_index(cy0, mesh_->ny());
        const int j1 = first_index(cy1 + 1, mesh_->ny()) - 1;
        for (int j = j0; j <= j1; ++j) fn(i0, i1, j);
    }

private:
    // First vertex index whose coordinate lies in cell `c` or beyond.
    [[nodiscard]] int first_index(long c, int n) const noexcept {
        const double idx = std::ceil(static_cast<double>(c) * cell_ / mesh_->spacing());
        return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(n)));
    }

    const Mesh* mesh_;
    double cell_;
    long cells_x_ = 0;
    long cells_y_ = 0;
};

struct FieldOptions {
    int utc_offset_minutes = 0;
    Aggregate aggregate = Aggregate::Sum;
};

/// Sets each field's resolution_max to the largest raw value over all steps of
/// its resolution. An all-zero resolution keeps resolution_max = 0.
inline FieldCollection normalize(FieldCollection collection) {
    for (Resolution r : kResolutions) {
        double m = 0.0;
        for (const ScalarField& f : collection.fields) {
            if (f.resolution != r) continue;
            for (double v : f.values) m = std::max(m, v);
        }
        for (ScalarField& f : collection.fields) {
            if (f.resolution == r) f.resolution_max = m;
        }
    }
    return collection;
}

namespace detail {

inline FieldCollection empty_collection(const Mesh& mesh, const Scenario& scenario, Aggregate aggregate) {
    FieldCollection c;
    c.scenario = scenario;
    c.aggregate = aggregate;
    c.nx = mesh.nx();
    c.ny = mesh.ny();
    c.spacing = mesh.spacing();
    for (Resolution r : scenario.resolutions()) {
        for (int t = 0; t < step_count(r); ++t) {
            ScalarField f;
            f.resolution = r;
            f.step = t;
            f.values.assign(mesh.vertex_count(), 0.0);
            if (aggregate == Aggregate::Mean) {
                f.sums.assign(mesh.vertex_count(), 0.0);
                f.counts.assign(mesh.vertex_count(), 0.0);
            }
            c.fields.push_back(std::move(f));
        }
    }
    return c;
}

inline std::size_t field_offset(const Scenario& scenario, Resolution r) noexcept {
    std::size_t offset = 0;
    for (Resolution x : scenario.resolutions()) {
        if (x == r) break;
        offset += static_cast<std::size_t>(step_count(x));
    }
    return offset;
}

/// Accumulates every point into the collection `route(point)` names (nullptr
/// skips the point). All collections share one scenario family.
template <class Route>
void accumulate(std::span<const DataPoint> points, const Mesh& mesh, ScenarioFamily family,
                const DensityParams& params, const FieldOptions& options, Route&& route) {
    params.validate();
    const auto res = resolutions(family);
    const Scenario layout{family, std::string(parts(family).front())};
    std::array<std::size_t, 4> offsets{};
    for (std::size_t k = 0; k < res.size(); ++k) offsets[k] = field_offset(layout, res[k]);

    const GridIndex index(mesh, params.radius_m);
    const double r2 = params.radius_m * params.radius_m;
    const double inv_eps2 = 1.0 / (params.epsilon_m * params.epsilon_m);
    const double spacing = mesh.spacing();
    const auto nx = static_cast<std::size_t>(mesh.nx());
    const bool mean = options.aggregate == Aggregate::Mean;
    const std::size_t nres = res.size();

    std::array<double*, 4> values{};
    std::array<double*, 4> sums{};
    std::array<double*, 4> counts{};
    for (const DataPoint& pt : points) {
        if (!(pt.weight >= 0.0) || !std::isfinite(pt.weight)) {
            throw InvalidArgument("point weight must be finite and non-negative");
        }
        FieldCollection* target = route(pt);
        if (target == nullptr) continue;
        for (std::size_t k = 0; k < nres; ++k) {
            const int step = bucket(pt.timestamp, res[k], options.utc_offset_minutes);
            ScalarField& f = target->fields[offsets[k] + static_cast<std::size_t>(step)];
            values[k] = f.values.data();
            if (mean) {
                sums[k] = f.sums.data();
                counts[k] = f.counts.data();
            }
        }
        const double w = pt.weight;
        index.for_each_candidate_row(pt.location, params.radius_m, [&](int i0, int i1, int j) {
            const double dy = j * spacing - pt.location.y;
            const double dy2 = dy * dy;
            if (dy2 > r2) return;
            const std::size_t row = static_cast<std::size_t>(j) * nx;
            for (int i = i0; i <= i1; ++i) {
                const double dx = i * spacing - pt.location.x;
                const double d2 = dx * dx + dy2;
                if (d2 > r2) continue;
                const double kernel = std::exp(-d2 * inv_eps2);
                const std::size_t v = row + static_cast<std::size_t>(i);
                if (mean) {
                    for (std::size_t k = 0; k < nres; ++k) {
                        sums[k][v] += w * kernel;
                        counts[k][v] += kernel;
                    }
                } else {
                    for (std::size_t k = 0; k < nres; ++k) values[k][v] += w * kernel;
                }
            }
        });
    }
}

inline FieldCollection finish(FieldCollection c, bool any_points) {
    if (c.aggregate == Aggregate::Mean) {
        for (ScalarField& f : c.fields) {
            for (std::size_t v = 0; v < f.values.size(); ++v) {
                f.values[v] = f.counts[v] > 0.0 ? f.sums[v] / f.counts[v] : 0.0;
            }
        }
    }
    if (!any_points) c.warnings.emplace_back("no points: all fields are zero");
    return normalize(std::move(c));
}

} // namespace detail

/// Density fields for every part of `family` in one pass over `points`.
/// Raw value at vertex p for step t is the sum, over points x of step t with
/// d(p, x) <= radius, of weight * exp(-d^2 / epsilon^2). Points are accumulated
/// in input order. The result is normalized; parts are ordered as parts(family).
inline std::vector<FieldCollection> compute_family_fields(std::span<const DataPoint> points,
                                                          const Mesh& mesh, ScenarioFamily family,
                                                          const DensityParams& params,
                                                          const FieldOptions& options = {}) {
    std::vector<FieldCollection> out;
    for (std::string_view part : parts(family)) {
        out.push_back(detail::empty_collection(mesh, Scenario{family, std::string(part)}, options.aggregate));
    }
    std::vector<bool> touched(out.size(), false);
    detail::accumulate(points, mesh, family, params, options, [&](const DataPoint& p) {
        const auto part = static_cast<std::size_t>(
            scenario_part_index(p.timestamp, family, options.utc_offset_minutes));
        touched[part] = true;
        return &out[part];
    });
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = detail::finish(std::move(out[k]), touched[k]);
    return out;
}

/// Density fields of a single scenario part; points outside the part are ignored.
inline FieldCollection compute_fields(std::span<const DataPoint> points, const Mesh& mesh,
                                      const Scenario& scenario, const DensityParams& params,
                                      const FieldOptions& options = {}) {
    const int part = scenario.part_index();
    if (part < 0) throw InvalidArgument("unknown scenario part '" + scenario.part + "'");
    FieldCollection c = detail::empty_collection(mesh, scenario, options.aggregate);
    bool touched = false;
    detail::accumulate(points, mesh, scenario.family, params, options,
                       [&](const DataPoint& p) -> FieldCollection* {
                           if (scenario_part_index(p.timestamp, scenario.family,
                                                   options.utc_offset_minutes) != part) {
                               return nullptr;
                           }
                           touched = true;
                           return &c;
                       });
    return detail::finish(std::move(c), touched);
}

} // namespace urban_pulse
