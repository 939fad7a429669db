// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. `acceptance N [N...]` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace urban_pulse;

namespace {

// Tolerances and limits.
constexpr double kPersistenceTol = 1e-12;
constexpr double kPersistenceLimitS = 60.0;
constexpr double kKernelTol = 1e-9;
constexpr double kIndexTol = 1e-12;
constexpr double kScaleTol = 1e-9;
constexpr double kTriangleSlack = -1e-12;
constexpr double kScheduleAgreement = 0.95;
constexpr double kSyntheticLimitS = 120.0;
constexpr double kRankTol = 1e-12;
constexpr double kFieldsLimitS = 20.0 * 60.0;
constexpr double kExtractLimitS = 5.0 * 60.0;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Records the first failure reason; later ones only flip the flag.
struct Check {
    Outcome out;
    void expect(bool ok, const std::string& why) {
        if (!ok && out.pass) {
            out.pass = false;
            out.detail = why;
        }
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const Scenario kDefault{ScenarioFamily::Default, "all"};

// ---------------------------------------------------------------- 1

Outcome persistence_oracle() {
    Check c;
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> size(3, 12);
    std::uniform_int_distribution<int> levels(0, 8);
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t total_pairs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int nx = size(rng), ny = size(rng);
        const Mesh m = up_test::grid(nx, ny);
        const auto f = up_test::random_field(rng, m.vertex_count(), levels(rng));
        auto got = sweep_persistence(f, m);
        auto want = up_test::brute_force_persistence(f, nx, ny);
        std::set<std::pair<VertexId, VertexId>> gs, ws;
        std::map<VertexId, double> gp;
        for (const auto& p : got) {
            gs.emplace(p.creator, p.destroyer);
            gp[p.creator] = p.persistence;
        }
        for (const auto& p : want) ws.emplace(p.creator, p.destroyer);
        c.expect(got.size() == want.size() && gs == ws,
                 fmt("field %d (%dx%d): pairing differs from threshold oracle", trial, nx, ny));
        for (const auto& p : want) {
            const auto it = gp.find(p.creator);
            if (it == gp.end()) continue;
            worst = std::max(worst, std::abs(it->second - p.persistence));
        }
        total_pairs += got.size();
    }
    const double secs = since(t0);
    c.expect(worst <= kPersistenceTol, fmt("max |d pi| = %.3g > %.0e", worst, kPersistenceTol));
    c.expect(secs < kPersistenceLimitS, fmt("took %.1f s", secs));
    if (c.out.pass) {
        c.out.detail = fmt("200 fields, %zu pairs identical, max |d pi| = %.1g, %.2f s", total_pairs, worst, secs);
    }
    return c.out;
}

// ---------------------------------------------------------------- 2

Outcome kernel_truncation() {
    Check c;
    constexpr double eps = 100.0, radius = 500.0;
    double worst = 0.0;
    std::size_t inside = 0, outside = 0;
    // Spacing 50 puts lattice points exactly on the radius; 30 and 37 do not.
    for (double spacing : {50.0, 30.0, 37.0}) {
        const int n = static_cast<int>(std::ceil(1400.0 / spacing)) + 1;
        const Mesh m = up_test::grid(n, n, spacing);
        for (VertexId src : {m.vertex_id(n / 2, n / 2), m.vertex_id(3, n - 2)}) {
            const std::vector<DataPoint> pts{{m.position(src), 0, 1.0}};
            const auto fields = compute_fields(pts, m, kDefault, DensityParams::for_epsilon(eps));
            const auto& f = fields.field(Resolution::All, 0);
            for (VertexId v = 0; v < m.vertex_count(); ++v) {
                const double dx = (m.column(v) - m.column(src)) * spacing;
                const double dy = (m.row(v) - m.row(src)) * spacing;
                const double d = std::hypot(dx, dy);
                if (d <= radius) {
                    ++inside;
                    worst = std::max(worst, std::abs(f.values[v] - std::exp(-(d * d) / (eps * eps))));
                } else {
                    ++outside;
                    c.expect(f.values[v] == 0.0, fmt("vertex %u at %.3f m has value %.3g", v, d, f.values[v]));
                }
            }
        }
    }
    c.expect(worst <= kKernelTol, fmt("max abs error %.3g > %.0e", worst, kKernelTol));
    if (c.out.pass) {
        c.out.detail =
            fmt("%zu vertices within r, max abs error %.1g; %zu beyond r, all exactly 0", inside, worst, outside);
    }
    return c.out;
}

// ---------------------------------------------------------------- 3

Outcome grid_index_equivalence() {
    Check c;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> size(2, 20);
    std::uniform_int_distribution<int> count(1, 1000);
    std::uniform_real_distribution<double> spacing_d(10.0, 200.0);
    double worst = 0.0;
    int trials = 0;
    for (; trials < 60; ++trials) {
        const Mesh m = up_test::grid(size(rng), size(rng), spacing_d(rng));
        std::uniform_real_distribution<double> ux(-700.0, m.width_m() + 700.0);
        std::uniform_real_distribution<double> uy(-700.0, m.height_m() + 700.0);
        std::uniform_real_distribution<double> uw(0.0, 3.0);
        std::vector<DataPoint> pts(static_cast<std::size_t>(count(rng)));
        for (auto& p : pts) p = {{ux(rng), uy(rng)}, 0, uw(rng)};
        const auto fields = compute_fields(pts, m, kDefault, DensityParams::for_epsilon(100.0));
        const auto naive = up_test::naive_density(pts, m, 100.0, 500.0);
        const auto& f = fields.field(Resolution::All, 0);
        for (VertexId v = 0; v < m.vertex_count(); ++v) worst = std::max(worst, std::abs(f.values[v] - naive[v]));
    }
    c.expect(worst <= kIndexTol, fmt("max abs difference %.3g > %.0e", worst, kIndexTol));
    if (c.out.pass) c.out.detail = fmt("%d random meshes, max abs difference %.1g", trials, worst);
    return c.out;
}

// ---------------------------------------------------------------- 4

struct PipelineRun {
    std::vector<Pulse> pulses;
};

PipelineRun run_pipeline(const std::vector<DataPoint>& pts, const Mesh& m, const CityConfig& city) {
    FieldOptions opt;
    opt.utc_offset_minutes = city.utc_offset_minutes;
    const auto fields = compute_fields(pts, m, kDefault, DensityParams::for_epsilon(city.epsilon_m), opt);
    return {extract_pulses(fields, m, city.epsilon_m, kDefaultThreshold)};
}

Outcome scale_invariance() {
    Check c;
    SyntheticCity city = five_generator_city(30000);
    city.background_points = 6000;
    auto base = generate_points(city, 99);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uw(0.5, 2.0);
    for (auto& p : base) p.weight = uw(rng);
    const Mesh m = build_mesh(city.config);
    const auto ref = run_pipeline(base, m, city.config);
    c.expect(!ref.pulses.empty(), "reference run found no pulses");

    double worst = 0.0;
    for (double scale : {0.1, 3.0, 1000.0}) {
        auto pts = base;
        for (auto& p : pts) p.weight *= scale;
        const auto run = run_pipeline(pts, m, city.config);
        c.expect(run.pulses.size() == ref.pulses.size(), fmt("c=%g: %zu pulses vs %zu", scale, run.pulses.size(),
                                                            ref.pulses.size()));
        if (run.pulses.size() != ref.pulses.size()) continue;
        for (std::size_t k = 0; k < ref.pulses.size(); ++k) {
            const Pulse& a = ref.pulses[k];
            const Pulse& b = run.pulses[k];
            c.expect(a.location.members == b.location.members, fmt("c=%g: pulse %zu members differ", scale, k));
            worst = std::max(worst, std::abs(a.rank - b.rank));
            for (std::size_t r = 0; r < a.beats.resolutions.size(); ++r) {
                const auto& x = a.beats.resolutions[r];
                const auto& y = b.beats.resolutions[r];
                c.expect(x.significant == y.significant && x.maxima == y.maxima,
                         fmt("c=%g: pulse %zu bit beats differ", scale, k));
                for (std::size_t t = 0; t < x.function.size(); ++t) {
                    worst = std::max(worst, std::abs(x.function[t] - y.function[t]));
                }
            }
            for (std::size_t j = 0; j < ref.pulses.size(); ++j) {
                worst = std::max(worst, std::abs(similarity(a, ref.pulses[j]) - similarity(b, run.pulses[j])));
            }
        }
    }
    c.expect(worst <= kScaleTol, fmt("max deviation %.3g > %.0e", worst, kScaleTol));
    if (c.out.pass) {
        c.out.detail = fmt("%zu pulses, c in {0.1, 3, 1000}: identical locations and bit beats, max deviation %.1g",
                           ref.pulses.size(), worst);
    }
    return c.out;
}

// ---------------------------------------------------------------- 5

Outcome similarity_suite() {
    Check c;
    std::mt19937_64 rng(123);
    const std::vector<std::span<const Resolution>> sets{
        resolutions(ScenarioFamily::Default), resolutions(ScenarioFamily::PartsOfWeek),
        resolutions(ScenarioFamily::Seasons), resolutions(ScenarioFamily::PartsOfDay)};
    std::uniform_int_distribution<std::size_t> pick_set(0, sets.size() - 1);
    std::bernoulli_distribution coin(0.1);
    double worst_slack = 0.0;
    int zero_pairs = 0;
    for (int k = 0; k < 10000; ++k) {
        const auto res = sets[pick_set(rng)];
        const Beats a = up_test::random_beats(rng, res);
        // Occasionally reuse a so identical and near-identical pairs occur.
        Beats b = coin(rng) ? a : up_test::random_beats(rng, res);
        if (coin(rng) && !b.resolutions.empty()) b = a, b.resolutions.back().maxima[0] ^= 1;
        const Beats d = up_test::random_beats(rng, res);
        const double ab = similarity(a, b), ba = similarity(b, a);
        const double bd = similarity(b, d), ad = similarity(a, d);
        c.expect(ab >= 0.0 && bd >= 0.0 && ad >= 0.0, fmt("triple %d: negative measure", k));
        c.expect(ab == ba, fmt("triple %d: asymmetric %.17g vs %.17g", k, ab, ba));
        c.expect(similarity(a, a) == 0.0, fmt("triple %d: s(a, a) != 0", k));
        bool same = true;
        for (std::size_t r = 0; r < a.resolutions.size(); ++r) {
            same = same && a.resolutions[r].significant == b.resolutions[r].significant &&
                   a.resolutions[r].maxima == b.resolutions[r].maxima &&
                   a.resolutions[r].function == b.resolutions[r].function;
        }
        c.expect((ab == 0.0) == same, fmt("triple %d: s = %.3g but beats %s", k, ab, same ? "equal" : "differ"));
        if (same) ++zero_pairs;
        const double slack = ab + bd - ad;
        worst_slack = std::min(worst_slack, slack);
        c.expect(slack >= kTriangleSlack, fmt("triple %d: triangle slack %.3g", k, slack));
    }
    if (c.out.pass) {
        c.out.detail = fmt("10000 triples (%d identical pairs), min triangle slack %.3g", zero_pairs, worst_slack);
    }
    return c.out;
}

// ---------------------------------------------------------------- 6

// Planted schedule bit of generator k at (resolution, step).
bool planted(const ActivityGenerator& g, Resolution r, int step) {
    const auto has = [](const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); };
    switch (r) {
    case Resolution::All: return true;
    case Resolution::Month: return has(g.months, step);
    case Resolution::Day: return has(g.weekdays, step);
    case Resolution::Hour: return has(g.hours, step);
    }
    return false;
}

std::string synthetic_catalog(const SyntheticCity& city, std::uint64_t seed, PulseCatalog* out) {
    // Through the CSV text format, as the CLI does.
    const auto generated = generate_points(city, seed);
    std::stringstream csv;
    write_points_csv(csv, generated, city.config.bounds.projection());
    const ParsedPoints parsed = parse_points(csv, city.config);
    const Mesh mesh = build_mesh(city.config);
    FieldOptions opt;
    opt.utc_offset_minutes = city.config.utc_offset_minutes;
    FieldCollection fields =
        compute_fields(parsed.points, mesh, kDefault, DensityParams::for_epsilon(city.config.epsilon_m), opt);
    fields.config_digest = city.config.digest();
    const auto digest = to_hex(fnv1a(csv.str()));
    *out = build_catalog(city.config, mesh, fields, kDefaultThreshold, digest);
    return dump_catalog(*out);
}

Outcome synthetic_city() {
    Check c;
    const SyntheticCity city = five_generator_city(100000);
    const auto t0 = Clock::now();
    PulseCatalog cat;
    const std::string first = synthetic_catalog(city, 2024, &cat);
    const double secs = since(t0);
    PulseCatalog again;
    const std::string second = synthetic_catalog(city, 2024, &again);

    c.expect(cat.pulses.size() == 5, fmt("%zu pulses, expected 5", cat.pulses.size()));
    c.expect(first == second, "catalog JSON differs between identical runs");
    c.expect(secs < kSyntheticLimitS, fmt("took %.1f s", secs));

    double worst_offset = 0.0, worst_agreement = 1.0;
    std::set<std::size_t> matched;
    for (const Pulse& p : cat.pulses) {
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t g = 0; g < city.generators.size(); ++g) {
            const double d = distance(p.location.representative, city.generators[g].center);
            if (d < best_d) best_d = d, best = g;
        }
        matched.insert(best);
        worst_offset = std::max(worst_offset, best_d);
        c.expect(best_d <= city.config.epsilon_m, fmt("pulse %u is %.1f m from its center", p.id(), best_d));
        int agree = 0, total = 0;
        for (const auto& b : p.beats.resolutions) {
            for (int t = 0; t < step_count(b.resolution); ++t) {
                agree += (b.significant[static_cast<std::size_t>(t)] == 1) ==
                         planted(city.generators[best], b.resolution, t);
                ++total;
            }
        }
        const double ratio = static_cast<double>(agree) / total;
        worst_agreement = std::min(worst_agreement, ratio);
        c.expect(ratio >= kScheduleAgreement, fmt("pulse %u agrees on %.1f%% of steps", p.id(), 100 * ratio));
    }
    c.expect(matched.size() == city.generators.size(), "some planted center has no pulse");
    if (c.out.pass) {
        c.out.detail = fmt("5 pulses, max center offset %.1f m, min schedule agreement %.1f%%, reproducible, %.1f s",
                           worst_offset, 100 * worst_agreement, secs);
    }
    return c.out;
}

// ---------------------------------------------------------------- 7

Outcome structural_constants() {
    Check c;
    const Mesh m = up_test::grid(5, 5);
    const std::vector<DataPoint> pts{{{100, 100}, 1'400'000'000, 1.0}};
    const auto params = DensityParams::for_epsilon(100.0);
    const auto def = compute_fields(pts, m, kDefault, params);
    c.expect(def.fields.size() == 1 + 12 + 7 + 24, fmt("Default has %zu fields", def.fields.size()));
    const auto seasons = compute_family_fields(pts, m, ScenarioFamily::Seasons, params);
    c.expect(seasons.size() == 4, "Seasons does not have 4 parts");
    for (const auto& s : seasons) c.expect(s.fields.size() == 1 + 7 + 24, fmt("%s has %zu fields", s.scenario.part.c_str(), s.fields.size()));

    Beats full;
    for (Resolution r : kResolutions) {
        ResolutionBeats b;
        b.resolution = r;
        const auto n = static_cast<std::size_t>(step_count(r));
        b.significant.assign(n, 1);
        b.maxima.assign(n, 1);
        b.function.assign(n, 1.0);
        b.function_raw.assign(n, 1.0);
        full.resolutions.push_back(b);
    }
    const Pulse p = make_pulse({}, full);
    const double err = std::abs(p.rank - std::sqrt(12.0));
    c.expect(err <= kRankTol, fmt("saturated rank %.17g", p.rank));
    c.expect(kDefaultThreshold == 0.2, "default threshold is not 0.2");
    if (c.out.pass) {
        c.out.detail = fmt("44 Default fields, 4 x 32 Seasons fields, saturated rank error %.1g, threshold %.1f", err,
                           kDefaultThreshold);
    }
    return c.out;
}

// ---------------------------------------------------------------- 8

Outcome throughput() {
    Check c;
    // 377 x 377 = 142,129 vertices at 50 m spacing.
    SyntheticCity city;
    city.config.name = "throughput";
    city.config.spacing_m = 50.0;
    city.config.epsilon_m = 100.0;
    city.config.utc_offset_minutes = -300;
    const double side = 376 * 50.0 + 1.0;
    const double dlat = side / kEarthRadiusM * 180.0 / std::numbers::pi;
    const double mid = 40.70 + dlat / 2;
    const double dlon = side / (kEarthRadiusM * std::cos(to_radians(mid))) * 180.0 / std::numbers::pi;
    city.config.bounds = {40.70, -74.02, 40.70 + dlat, -74.02 + dlon};
    std::mt19937_64 layout(8);
    std::uniform_real_distribution<double> where(500.0, side - 500.0);
    std::uniform_int_distribution<int> phase(0, 4);
    for (int k = 0; k < 40; ++k) {
        ActivityGenerator g;
        g.center = {where(layout), where(layout)};
        g.sigma_m = 150.0;
        const int p = phase(layout);
        for (int m = p; m < 12; m += 2) g.months.push_back(m);
        for (int d = 0; d < 7; ++d) g.weekdays.push_back(d);
        for (int h = p; h < 24; h += 3) g.hours.push_back(h);
        g.points = 17'500;
        city.generators.push_back(g);
    }
    city.background_points = 300'000;
    const auto points = generate_points(city, 1);
    const Mesh mesh = build_mesh(city.config);
    c.expect(points.size() == 1'000'000, fmt("%zu points", points.size()));
    c.expect(mesh.vertex_count() >= 140'000 && mesh.vertex_count() <= 144'000,
             fmt("%zu vertices", mesh.vertex_count()));

    FieldOptions opt;
    opt.utc_offset_minutes = city.config.utc_offset_minutes;
    const auto t0 = Clock::now();
    const auto fields = compute_fields(points, mesh, kDefault, DensityParams::for_epsilon(100.0), opt);
    const double field_s = since(t0);
    c.expect(fields.fields.size() == 44, "expected 44 fields");
    const auto t1 = Clock::now();
    const auto pulses = extract_pulses(fields, mesh, 100.0, kDefaultThreshold);
    const double extract_s = since(t1);
    c.expect(field_s < kFieldsLimitS, fmt("fields took %.1f s", field_s));
    c.expect(extract_s < kExtractLimitS, fmt("extraction took %.1f s", extract_s));
    if (c.out.pass) {
        c.out.detail = fmt("1M points, %zu vertices: 44 fields in %.1f s, %zu pulses extracted in %.1f s",
                           mesh.vertex_count(), field_s, pulses.size(), extract_s);
    }
    return c.out;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"persistence matches brute-force threshold oracle", persistence_oracle},
        {"truncated Gaussian kernel", kernel_truncation},
        {"grid index equals naive double loop", grid_index_equivalence},
        {"weight scale invariance", scale_invariance},
        {"similarity is a pseudometric", similarity_suite},
        {"synthetic five-generator city", synthetic_city},
        {"structural constants", structural_constants},
        {"throughput at city scale", throughput},
    };
    std::set<int> only;
    for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int n = static_cast<int>(k) + 1;
        if (!only.empty() && !only.contains(n)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
