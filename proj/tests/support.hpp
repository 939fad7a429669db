#pragma once

// Independent oracles and random generators shared by the unit and
// acceptance tests. Nothing here calls into the code under test except
// for plain value types and Mesh geometry.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "urban_pulse/urban_pulse.hpp"

namespace up_test {

using urban_pulse::Mesh;
using urban_pulse::VertexId;

inline Mesh grid(int nx, int ny, double spacing = 50.0) {
    return Mesh(urban_pulse::LocalProjection({40.7, -74.0}, 40.7), nx, ny, spacing);
}

// Six-neighborhood of the uniform-diagonal triangulation, written from the
// cell picture rather than from Mesh::link.
inline std::vector<VertexId> grid_neighbors(int nx, int ny, VertexId v) {
    static constexpr int kOff[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}};
    const int i = static_cast<int>(v) % nx;
    const int j = static_cast<int>(v) / nx;
    std::vector<VertexId> out;
    for (const auto& o : kOff) {
        const int a = i + o[0];
        const int b = j + o[1];
        if (a >= 0 && a < nx && b >= 0 && b < ny) out.push_back(static_cast<VertexId>(b * nx + a));
    }
    return out;
}

struct OraclePair {
    VertexId creator;
    VertexId destroyer;
    double persistence;
};

// Brute-force super-level-set persistence. For every prefix of the vertex
// order the components are recomputed from scratch by BFS; a component is
// named by its highest vertex. When adding a vertex joins several old
// components, the one with the highest name survives and the rest die at the
// added vertex. The surviving component is finally paired with the lowest
// vertex.
inline std::vector<OraclePair> brute_force_persistence(const std::vector<double>& f, int nx, int ny) {
    const std::size_t n = f.size();
    std::vector<VertexId> order(n);
    std::iota(order.begin(), order.end(), VertexId{0});
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
        return std::make_pair(-f[a], a) < std::make_pair(-f[b], b);
    });
    std::vector<std::size_t> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;

    // head_of[v] = name of v's component in the previous prefix (or n if absent).
    std::vector<std::size_t> prev_head(n, n);
    std::vector<OraclePair> out;
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<std::size_t> head(n, n);
        for (std::size_t s = 0; s < k; ++s) {
            const VertexId start = order[s];
            if (head[start] != n) continue;
            // BFS from the highest unlabelled vertex, so its rank names the component.
            std::queue<VertexId> q;
            q.push(start);
            head[start] = s;
            while (!q.empty()) {
                const VertexId u = q.front();
                q.pop();
                for (VertexId w : grid_neighbors(nx, ny, u)) {
                    if (rank[w] < k && head[w] == n) {
                        head[w] = s;
                        q.push(w);
                    }
                }
            }
        }
        const VertexId added = order[k - 1];
        std::set<std::size_t> merged;
        for (std::size_t s = 0; s + 1 < k; ++s) {
            if (head[order[s]] == head[added]) merged.insert(prev_head[order[s]]);
        }
        if (merged.size() >= 2) {
            const std::size_t survivor = *merged.begin();
            for (std::size_t name : merged) {
                if (name == survivor) continue;
                const VertexId creator = order[name];
                out.push_back({creator, added, f[creator] - f[added]});
            }
        }
        prev_head = head;
    }
    out.push_back({order.front(), order.back(), f[order.front()] - f[order.back()]});
    return out;
}

// Unindexed density: every point against every vertex.
inline std::vector<double> naive_density(const std::vector<urban_pulse::DataPoint>& points, const Mesh& mesh,
                                         double epsilon, double radius) {
    std::vector<double> out(mesh.vertex_count(), 0.0);
    for (const auto& p : points) {
        for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
            const double dx = mesh.column(v) * mesh.spacing() - p.location.x;
            const double dy = mesh.row(v) * mesh.spacing() - p.location.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 <= radius * radius) out[v] += p.weight * std::exp(-d2 / (epsilon * epsilon));
        }
    }
    return out;
}

// Random field with deliberate ties: values are drawn from `levels`
// distinct values when levels > 0, continuous otherwise.
inline std::vector<double> random_field(std::mt19937_64& rng, std::size_t n, int levels) {
    std::vector<double> f(n);
    if (levels > 0) {
        std::uniform_int_distribution<int> d(0, levels - 1);
        for (double& x : f) x = static_cast<double>(d(rng)) / levels;
    } else {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        for (double& x : f) x = d(rng);
    }
    return f;
}

inline urban_pulse::ResolutionBeats random_resolution_beats(std::mt19937_64& rng, urban_pulse::Resolution r) {
    using namespace urban_pulse;
    ResolutionBeats b;
    b.resolution = r;
    const auto steps = static_cast<std::size_t>(step_count(r));
    std::bernoulli_distribution bit(0.4);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (std::size_t t = 0; t < steps; ++t) {
        const bool m = bit(rng);
        b.maxima.push_back(m ? 1 : 0);
        b.significant.push_back(m && bit(rng) ? 1 : 0);
        const double f = val(rng);
        b.function.push_back(f);
        b.function_raw.push_back(f * 100.0);
    }
    return b;
}

inline urban_pulse::Beats random_beats(std::mt19937_64& rng,
                                       std::span<const urban_pulse::Resolution> resolutions) {
    urban_pulse::Beats b;
    for (auto r : resolutions) b.resolutions.push_back(random_resolution_beats(rng, r));
    return b;
}

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("urban-pulse-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace up_test
