#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "density.hpp"
#include "error.hpp"
#include "mesh.hpp"

namespace urban_pulse {

/// Simulated perturbation: u is above v when f(u) > f(v), or the values tie
/// and u has the smaller id. Strict and total over one field.
class TotalOrder {
public:
    explicit TotalOrder(std::span<const double> values) noexcept : values_(values) {}

    [[nodiscard]] bool above(VertexId u, VertexId v) const noexcept {
        const double fu = values_[u];
        const double fv = values_[v];
        return fu > fv || (fu == fv && u < v);
    }

    /// All vertices, highest first.
    [[nodiscard]] std::vector<VertexId> descending() const {
        std::vector<VertexId> order(values_.size());
        std::iota(order.begin(), order.end(), VertexId{0});
        std::sort(order.begin(), order.end(), [this](VertexId a, VertexId b) { return above(a, b); });
        return order;
    }

private:
    std::span<const double> values_;
};

enum class CriticalType : std::uint8_t { Regular, Maximum, Minimum, Saddle };

struct CriticalPoint {
    CriticalType type = CriticalType::Regular;
    /// Saddles only: components merged or split minus one.
    int multiplicity = 0;
    int upper_components = 0;
    int lower_components = 0;
};

namespace detail {

template <class Pred>
int link_components(const VertexLink& link, Pred&& marked) {
    const int n = link.size;
    int runs = 0;
    int count = 0;
    for (int k = 0; k < n; ++k) {
        const bool here = marked(link.vertices[static_cast<std::size_t>(k)]);
        if (!here) continue;
        ++count;
        const bool prev = k > 0 ? marked(link.vertices[static_cast<std::size_t>(k - 1)])
                                : (link.cyclic && marked(link.vertices[static_cast<std::size_t>(n - 1)]));
        if (!prev) ++runs;
    }
    // A fully marked cycle has no run start but is one component.
    if (runs == 0 && count > 0) runs = 1;
    return runs;
}

} // namespace detail

/// Critical type of `v` from the component counts of its upper and lower link.
inline CriticalPoint classify(std::span<const double> values, const Mesh& mesh, VertexId v) {
    if (values.size() != mesh.vertex_count()) throw InvalidArgument("field does not match mesh");
    const VertexLink link = mesh.link(v);
    const TotalOrder order(values);
    CriticalPoint cp;
    cp.upper_components = detail::link_components(link, [&](VertexId u) { return order.above(u, v); });
    cp.lower_components = detail::link_components(link, [&](VertexId u) { return order.above(v, u); });
    if (cp.upper_components == 0) {
        cp.type = CriticalType::Maximum;
    } else if (cp.lower_components == 0) {
        cp.type = CriticalType::Minimum;
    } else if (cp.upper_components == 1 && cp.lower_components == 1) {
        cp.type = CriticalType::Regular;
    } else {
        cp.type = CriticalType::Saddle;
        cp.multiplicity = std::max(cp.upper_components, cp.lower_components) - 1;
    }
    return cp;
}

inline CriticalPoint classify(const ScalarField& field, const Mesh& mesh, VertexId v) {
    const auto normalized = field.normalized_values();
    return classify(normalized, mesh, v);
}

/// Maximum paired with the vertex that ends its super-level set component.
struct PersistencePair {
    VertexId creator = 0;
    VertexId destroyer = 0;
    double persistence = 0.0;

    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

/// 0-dimensional super-level set persistence with the global maximum paired
/// to the global minimum. Vertices are swept highest first; a vertex with no
/// swept neighbor opens a component, a vertex touching k >= 2 components
/// closes all but the one with the highest creator. Pairs are listed in the
/// order their components die, the global pair last.
inline std::vector<PersistencePair> sweep_persistence(std::span<const double> values, const Mesh& mesh) {
    if (values.size() != mesh.vertex_count()) throw InvalidArgument("field does not match mesh");
    for (double x : values) {
        if (!std::isfinite(x)) throw InvalidArgument("field values must be finite");
    }
    const TotalOrder order(values);
    const std::vector<VertexId> sweep = order.descending();

    constexpr VertexId kUnseen = ~VertexId{0};
    std::vector<VertexId> parent(values.size(), kUnseen);
    std::vector<VertexId> creator(values.size(), kUnseen);
    auto find = [&](VertexId x) {
        VertexId root = x;
        while (parent[root] != root) root = parent[root];
        while (parent[x] != root) {
            const VertexId next = parent[x];
            parent[x] = root;
            x = next;
        }
        return root;
    };

    std::vector<PersistencePair> pairs;
    for (VertexId v : sweep) {
        const VertexLink link = mesh.link(v);
        std::array<VertexId, 6> roots{};
        std::size_t nroots = 0;
        for (VertexId u : link.neighbors()) {
            if (parent[u] == kUnseen) continue;
            const VertexId r = find(u);
            if (std::find(roots.begin(), roots.begin() + static_cast<std::ptrdiff_t>(nroots), r) ==
                roots.begin() + static_cast<std::ptrdiff_t>(nroots)) {
                roots[nroots++] = r;
            }
        }
        if (nroots == 0) {
            parent[v] = v;
            creator[v] = v;
            continue;
        }
        // Elder rule: the component whose creator is highest survives.
        std::sort(roots.begin(), roots.begin() + static_cast<std::ptrdiff_t>(nroots),
                  [&](VertexId a, VertexId b) { return order.above(creator[a], creator[b]); });
        const VertexId survivor = roots[0];
        for (std::size_t k = 1; k < nroots; ++k) {
            const VertexId dying = creator[roots[k]];
            pairs.push_back({dying, v, values[dying] - values[v]});
            parent[roots[k]] = survivor;
        }
        parent[v] = survivor;
    }
    const VertexId global_max = sweep.front();
    const VertexId global_min = sweep.back();
    pairs.push_back({global_max, global_min, values[global_max] - values[global_min]});
    return pairs;
}

/// Persistence of a field's normalized values.
inline std::vector<PersistencePair> sweep_persistence(const ScalarField& field, const Mesh& mesh) {
    const auto normalized = field.normalized_values();
    return sweep_persistence(normalized, mesh);
}

/// Creators whose persistence exceeds `threshold`, ascending by id.
inline std::vector<VertexId> high_persistent_maxima(std::span<const PersistencePair> pairs, double threshold) {
    std::vector<VertexId> out;
    for (const PersistencePair& p : pairs) {
        if (p.persistence > threshold) out.push_back(p.creator);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Debug dump: `creator_vertex,destroyer_vertex,persistence`.
inline void write_persistence_csv(std::ostream& out, std::span<const PersistencePair> pairs) {
    out << "creator_vertex,destroyer_vertex,persistence\n";
    const auto precision = out.precision(17);
    for (const PersistencePair& p : pairs) {
        out << p.creator << ',' << p.destroyer << ',' << p.persistence << '\n';
    }
    out.precision(precision);
}

} // namespace urban_pulse
