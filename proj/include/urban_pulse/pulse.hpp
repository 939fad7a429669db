#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "density.hpp"
#include "error.hpp"
#include "geo.hpp"
#include "mesh.hpp"
#include "region.hpp"
#include "temporal.hpp"
#include "topology.hpp"

namespace urban_pulse {

/// Persistence above which a maximum counts as high-persistent (normalized units).
inline constexpr double kDefaultThreshold = 0.2;

/// Persistence pairs of one field, with creator lookup.
struct FieldTopology {
    Resolution resolution = Resolution::All;
    int step = 0;
    std::vector<PersistencePair> pairs;

    /// Persistence of `v` if it is a maximum of this field.
    [[nodiscard]] std::optional<double> persistence_of(VertexId v) const noexcept {
        const auto it = std::lower_bound(by_creator_.begin(), by_creator_.end(), v,
                                         [](const PersistencePair& p, VertexId x) { return p.creator < x; });
        if (it == by_creator_.end() || it->creator != v) return std::nullopt;
        return it->persistence;
    }

    void index() {
        by_creator_ = pairs;
        std::sort(by_creator_.begin(), by_creator_.end(),
                  [](const PersistencePair& a, const PersistencePair& b) { return a.creator < b.creator; });
    }

private:
    std::vector<PersistencePair> by_creator_;
};

/// Topology of every field in a collection, in the collection's field order.
struct ScenarioTopology {
    std::vector<FieldTopology> fields;

    [[nodiscard]] const FieldTopology& field(Resolution r, int step) const {
        for (const FieldTopology& f : fields) {
            if (f.resolution == r && f.step == step) return f;
        }
        throw NotFound("no topology for " + std::string(to_string(r)) + " step " + std::to_string(step));
    }
};

inline ScenarioTopology analyze_topology(const FieldCollection& fields, const Mesh& mesh) {
    if (fields.nx != mesh.nx() || fields.ny != mesh.ny()) {
        throw DimensionMismatch("field collection does not match mesh");
    }
    ScenarioTopology out;
    out.fields.reserve(fields.fields.size());
    for (const ScalarField& f : fields.fields) {
        FieldTopology t;
        t.resolution = f.resolution;
        t.step = f.step;
        t.pairs = sweep_persistence(f, mesh);
        t.index();
        out.fields.push_back(std::move(t));
    }
    return out;
}

/// Vertices that are a high-persistent maximum of at least one field.
inline std::vector<VertexId> prominent_locations(const ScenarioTopology& topology, double threshold) {
    std::vector<VertexId> out;
    for (const FieldTopology& f : topology.fields) {
        const auto hp = high_persistent_maxima(f.pairs, threshold);
        out.insert(out.end(), hp.begin(), hp.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct PulseLocation {
    std::uint32_t id = 0;
    /// Ascending vertex ids.
    std::vector<VertexId> members;
    /// Centroid of the members.
    ProjectedPoint representative;
    GeoPoint representative_geo;
};

/// Single-linkage clustering: vertices within `epsilon` meters are joined and
/// the transitive closure defines a location. Ids follow representative
/// (y, x) order; extract_pulses renumbers them by rank.
inline std::vector<PulseLocation> cluster_locations(std::span<const VertexId> vertices, const Mesh& mesh,
                                                    double epsilon) {
    if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
    const std::size_t n = vertices.size();
    std::vector<std::size_t> by_x(n);
    std::iota(by_x.begin(), by_x.end(), std::size_t{0});
    std::vector<ProjectedPoint> pos(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!mesh.contains(vertices[k])) throw InvalidArgument("vertex id out of range");
        pos[k] = mesh.position(vertices[k]);
    }
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return pos[a].x < pos[b].x; });

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const double eps2 = epsilon * epsilon;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const std::size_t u = by_x[a];
            const std::size_t v = by_x[b];
            if (pos[v].x - pos[u].x > epsilon) break;
            if (distance_squared(pos[u], pos[v]) <= eps2) parent[find(u)] = find(v);
        }
    }

    std::vector<PulseLocation> out;
    std::vector<std::size_t> slot(n, std::numeric_limits<std::size_t>::max());
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t root = find(k);
        if (slot[root] == std::numeric_limits<std::size_t>::max()) {
            slot[root] = out.size();
            out.emplace_back();
        }
        out[slot[root]].members.push_back(vertices[k]);
    }
    for (PulseLocation& loc : out) {
        std::sort(loc.members.begin(), loc.members.end());
        double sx = 0.0, sy = 0.0;
        for (VertexId v : loc.members) {
            const ProjectedPoint p = mesh.position(v);
            sx += p.x;
            sy += p.y;
        }
        const auto m = static_cast<double>(loc.members.size());
        loc.representative = {sx / m, sy / m};
        loc.representative_geo = mesh.projection().unproject(loc.representative);
    }
    std::sort(out.begin(), out.end(), [](const PulseLocation& a, const PulseLocation& b) {
        if (a.representative.y != b.representative.y) return a.representative.y < b.representative.y;
        if (a.representative.x != b.representative.x) return a.representative.x < b.representative.x;
        return a.members.front() < b.members.front();
    });
    for (std::size_t k = 0; k < out.size(); ++k) out[k].id = static_cast<std::uint32_t>(k);
    return out;
}

/// Beats of one resolution; every sequence has step_count(resolution) entries.
struct ResolutionBeats {
    Resolution resolution = Resolution::All;
    std::vector<std::uint8_t> significant;
    std::vector<std::uint8_t> maxima;
    /// Normalized function values (the resolution's maximum maps to 1).
    std::vector<double> function;
    std::vector<double> function_raw;
};

struct Beats {
    /// Canonical resolution order.
    std::vector<ResolutionBeats> resolutions;

    [[nodiscard]] const ResolutionBeats* find(Resolution r) const noexcept {
        for (const ResolutionBeats& b : resolutions) {
            if (b.resolution == r) return &b;
        }
        return nullptr;
    }
};

/// Bit beats OR over the member vertices; the function beat takes their max.
/// A maximum with raw value 0 does not count: it only exists because of the
/// tie-breaking order on an empty field.
inline Beats compute_beats(const PulseLocation& location, const FieldCollection& fields,
                           const ScenarioTopology& topology, double threshold) {
    Beats beats;
    for (Resolution r : fields.scenario.resolutions()) {
        ResolutionBeats rb;
        rb.resolution = r;
        const auto steps = static_cast<std::size_t>(step_count(r));
        rb.significant.assign(steps, 0);
        rb.maxima.assign(steps, 0);
        rb.function.assign(steps, 0.0);
        rb.function_raw.assign(steps, 0.0);
        for (int t = 0; t < step_count(r); ++t) {
            const ScalarField& f = fields.field(r, t);
            const FieldTopology& topo = topology.field(r, t);
            const auto ts = static_cast<std::size_t>(t);
            for (VertexId v : location.members) {
                rb.function[ts] = std::max(rb.function[ts], f.normalized(v));
                rb.function_raw[ts] = std::max(rb.function_raw[ts], f.values[v]);
                if (const auto pi = topo.persistence_of(v)) {
                    if (f.values[v] > 0.0) rb.maxima[ts] = 1;
                    if (*pi > threshold) rb.significant[ts] = 1;
                }
            }
        }
        beats.resolutions.push_back(std::move(rb));
    }
    return beats;
}

/// Three entries per resolution in canonical order: fraction of significant
/// steps, fraction of maxima steps, peak normalized function value.
struct FeatureVector {
    std::vector<Resolution> resolutions;
    std::vector<double> values;

    [[nodiscard]] std::span<const double> of(Resolution r) const {
        for (std::size_t k = 0; k < resolutions.size(); ++k) {
            if (resolutions[k] == r) return std::span{values}.subspan(3 * k, 3);
        }
        throw NotFound("feature vector has no " + std::string(to_string(r)) + " entries");
    }
};

inline FeatureVector feature_vector(const Beats& beats) {
    FeatureVector fv;
    auto mean_bits = [](const std::vector<std::uint8_t>& bits) {
        if (bits.empty()) return 0.0;
        const double ones = std::accumulate(bits.begin(), bits.end(), 0.0);
        return ones / static_cast<double>(bits.size());
    };
    for (Resolution r : kResolutions) {
        const ResolutionBeats* b = beats.find(r);
        if (b == nullptr) continue;
        fv.resolutions.push_back(r);
        fv.values.push_back(mean_bits(b->significant));
        fv.values.push_back(mean_bits(b->maxima));
        fv.values.push_back(b->function.empty() ? 0.0 : *std::max_element(b->function.begin(), b->function.end()));
    }
    return fv;
}

namespace detail {
inline double l2(std::span<const double> xs) noexcept {
    double s = 0.0;
    for (double x : xs) s += x * x;
    return std::sqrt(s);
}
} // namespace detail

/// L2 norm of the whole feature vector.
inline double rank(const FeatureVector& fv) noexcept { return detail::l2(fv.values); }

/// L2 norm of one resolution's three entries.
inline double resolution_rank(const FeatureVector& fv, Resolution r) { return detail::l2(fv.of(r)); }

struct Pulse {
    PulseLocation location;
    Beats beats;
    FeatureVector feature;
    double rank = 0.0;
    std::vector<std::pair<Resolution, double>> resolution_ranks;

    [[nodiscard]] std::uint32_t id() const noexcept { return location.id; }

    [[nodiscard]] double resolution_rank(Resolution r) const {
        for (const auto& [res, value] : resolution_ranks) {
            if (res == r) return value;
        }
        throw NotFound("pulse has no " + std::string(to_string(r)) + " beats");
    }
};

inline Pulse make_pulse(PulseLocation location, Beats beats) {
    Pulse p;
    p.location = std::move(location);
    p.beats = std::move(beats);
    p.feature = feature_vector(p.beats);
    p.rank = rank(p.feature);
    for (Resolution r : p.feature.resolutions) p.resolution_ranks.emplace_back(r, resolution_rank(p.feature, r));
    return p;
}

struct SimilarityOptions {
    /// Compare raw instead of normalized function beats.
    bool raw_function = false;
};

namespace detail {
template <class T>
double series_distance(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) throw InvalidArgument("beat sequences differ in length");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        s += d * d;
    }
    return s;
}
} // namespace detail

/// L2 norm of the per-beat Euclidean distances over the resolutions both
/// pulses have. Lower is more similar. Throws InvalidArgument without a
/// common resolution.
inline double similarity(const Beats& a, const Beats& b, const SimilarityOptions& options = {}) {
    double sum = 0.0;
    bool any = false;
    for (const ResolutionBeats& ra : a.resolutions) {
        const ResolutionBeats* rb = b.find(ra.resolution);
        if (rb == nullptr) continue;
        any = true;
        sum += detail::series_distance(ra.significant, rb->significant);
        sum += detail::series_distance(ra.maxima, rb->maxima);
        sum += options.raw_function ? detail::series_distance(ra.function_raw, rb->function_raw)
                                    : detail::series_distance(ra.function, rb->function);
    }
    if (!any) throw InvalidArgument("pulses share no resolution");
    return std::sqrt(sum);
}

inline double similarity(const Pulse& a, const Pulse& b, const SimilarityOptions& options = {}) {
    return similarity(a.beats, b.beats, options);
}

/// Full extraction for one scenario part: persistence of every field,
/// prominent vertices, epsilon clustering, beats and ranks. Pulses come back
/// ordered by id, i.e. descending rank with ties broken by representative (y, x).
inline std::vector<Pulse> extract_pulses(const FieldCollection& fields, const Mesh& mesh, double epsilon,
                                         double threshold, const ScenarioTopology& topology) {
    const auto prominent = prominent_locations(topology, threshold);
    auto locations = cluster_locations(prominent, mesh, epsilon);
    std::vector<Pulse> pulses;
    pulses.reserve(locations.size());
    for (PulseLocation& loc : locations) {
        Beats beats = compute_beats(loc, fields, topology, threshold);
        pulses.push_back(make_pulse(std::move(loc), std::move(beats)));
    }
    // Clustering already ordered ties by (y, x); a stable sort keeps that.
    std::stable_sort(pulses.begin(), pulses.end(), [](const Pulse& a, const Pulse& b) { return a.rank > b.rank; });
    for (std::size_t k = 0; k < pulses.size(); ++k) pulses[k].location.id = static_cast<std::uint32_t>(k);
    return pulses;
}

inline std::vector<Pulse> extract_pulses(const FieldCollection& fields, const Mesh& mesh, double epsilon,
                                         double threshold = kDefaultThreshold) {
    return extract_pulses(fields, mesh, epsilon, threshold, analyze_topology(fields, mesh));
}

struct SimilarityMatch {
    std::uint32_t target_id = 0;
    double measure = 0.0;
};

struct SimilarityResult {
    std::uint32_t source_id = 0;
    /// Ascending measure, ties by target id.
    std::vector<SimilarityMatch> matches;
};

/// Every target pulse joins the source it is most similar to (ties go to the
/// higher-ranked source). Groups come in descending source rank; sources with
/// no match keep an empty group. Throws InvalidArgument when `sources` is empty.
inline std::vector<SimilarityResult> assign_to_sources(std::vector<const Pulse*> sources,
                                                       std::span<const Pulse> targets,
                                                       const SimilarityOptions& options = {}) {
    if (sources.empty()) throw InvalidArgument("no source pulse selected");
    std::stable_sort(sources.begin(), sources.end(), [](const Pulse* a, const Pulse* b) {
        if (a->rank != b->rank) return a->rank > b->rank;
        return a->id() < b->id();
    });

    std::vector<SimilarityResult> out(sources.size());
    for (std::size_t k = 0; k < sources.size(); ++k) out[k].source_id = sources[k]->id();
    for (const Pulse& t : targets) {
        std::size_t best = 0;
        double best_measure = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < sources.size(); ++k) {
            const double m = similarity(*sources[k], t, options);
            if (m < best_measure) {
                best_measure = m;
                best = k;
            }
        }
        out[best].matches.push_back({t.id(), best_measure});
    }
    for (SimilarityResult& r : out) {
        std::sort(r.matches.begin(), r.matches.end(), [](const SimilarityMatch& a, const SimilarityMatch& b) {
            if (a.measure != b.measure) return a.measure < b.measure;
            return a.target_id < b.target_id;
        });
    }
    return out;
}

/// Stethoscope query: the sources whose representative lies in `region`
/// (even-odd rule) are matched against `targets` with assign_to_sources.
/// Throws InvalidArgument when the region selects nothing.
inline std::vector<SimilarityResult> similar_pulses(const Polygon& region, std::span<const Pulse> sources,
                                                    std::span<const Pulse> targets,
                                                    const SimilarityOptions& options = {}) {
    std::vector<const Pulse*> selected;
    for (const Pulse& p : sources) {
        if (region.contains(p.location.representative_geo)) selected.push_back(&p);
    }
    if (selected.empty()) throw InvalidArgument("region selects no source pulse");
    return assign_to_sources(std::move(selected), targets, options);
}

} // namespace urban_pulse
