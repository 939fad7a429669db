// urban-pulse: batch pipeline and read-only HTTP service.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urban_pulse/service_http.hpp"
#include "urban_pulse/urban_pulse.hpp"

namespace fs = std::filesystem;
using namespace urban_pulse;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<ScenarioFamily> families_from(const std::string& name) {
    if (name == "all") return {kScenarioFamilies.begin(), kScenarioFamilies.end()};
    const auto f = parse_scenario_family(name);
    if (!f) throw InvalidArgument("unknown scenario '" + name + "' (Default, PartsOfWeek, Seasons, PartsOfDay, all)");
    return {*f};
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
    std::string city;
    std::string input;
    std::string scenario = "Default";
    std::string out;
    std::string aggregate = "sum";
};

int run_ingest(const IngestArgs& a) {
    const CityConfig config = CityConfig::load(a.city);
    FieldOptions options;
    options.utc_offset_minutes = config.utc_offset_minutes;
    if (a.aggregate == "sum") {
        options.aggregate = Aggregate::Sum;
    } else if (a.aggregate == "mean") {
        options.aggregate = Aggregate::Mean;
    } else {
        throw InvalidArgument("--aggregate must be sum or mean");
    }
    const auto families = families_from(a.scenario);

    const auto t0 = Clock::now();
    std::ifstream in(a.input, std::ios::binary);
    if (!in) throw NotFound("cannot open input " + a.input);
    const ParsedPoints parsed = parse_points(in, config);
    const RejectionReport& r = parsed.report;
    std::cout << "rows " << r.rows << ", accepted " << r.accepted << ", malformed " << r.malformed
              << ", out of bounds " << r.out_of_bounds << "\n";
    for (const std::string& w : r.warnings) std::cerr << "warning: " << w << "\n";
    const double parse_s = seconds_since(t0);

    const Mesh mesh = build_mesh(config);
    std::cout << "mesh " << mesh.nx() << " x " << mesh.ny() << " = " << mesh.vertex_count() << " vertices\n";

    const fs::path out(a.out);
    fs::create_directories(out);
    {
        std::ofstream cfg(city_config_path(out), std::ios::trunc);
        if (!cfg) throw Error("cannot write " + city_config_path(out).string());
        cfg << config.to_json().dump(2) << "\n";
    }

    const auto t1 = Clock::now();
    const DensityParams params = DensityParams::for_epsilon(config.epsilon_m);
    std::size_t total_fields = 0;
    for (ScenarioFamily family : families) {
        auto collections = compute_family_fields(parsed.points, mesh, family, params, options);
        for (FieldCollection& c : collections) {
            c.config_digest = config.digest();
            for (const std::string& w : c.warnings) {
                std::cerr << "warning: " << to_string(family) << "/" << c.scenario.part << ": " << w << "\n";
            }
            const fs::path path = field_file_path(out, c.scenario);
            write_fields(c, path);
            total_fields += c.fields.size();
            std::cout << "wrote " << path.string() << " (" << c.fields.size() << " fields)\n";
        }
    }
    std::printf("%zu fields; parse %.2f s, fields %.2f s\n", total_fields, parse_s, seconds_since(t1));
    return 0;
}

// ---------------------------------------------------------------- pulses

// Looks for city.json next to the fields, walking up at most three levels.
std::optional<fs::path> find_city_config(fs::path start) {
    if (!fs::is_directory(start)) start = start.parent_path();
    for (int k = 0; k < 4 && !start.empty(); ++k) {
        if (fs::exists(city_config_path(start))) return city_config_path(start);
        if (!start.has_parent_path() || start.parent_path() == start) break;
        start = start.parent_path();
    }
    return std::nullopt;
}

std::vector<fs::path> field_files(const fs::path& root) {
    std::vector<fs::path> out;
    if (fs::is_regular_file(root)) return {root};
    if (!fs::is_directory(root)) throw NotFound("no such file or directory " + root.string());
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".upf") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct PulsesArgs {
    std::string fields;
    std::string city;
    std::string out;
    double threshold = kDefaultThreshold;
    std::string scenario;
    std::string part;
};

void print_summary(const PulseCatalog& c, const fs::path& path, double secs) {
    std::cout << to_string(c.scenario.family) << "/" << c.scenario.part << ": " << c.pulses.size()
              << " pulses -> " << path.string();
    std::printf(" (%.2f s)\n", secs);
    const std::size_t top = std::min<std::size_t>(10, c.pulses.size());
    for (std::size_t k = 0; k < top; ++k) {
        const Pulse& p = c.pulses[k];
        std::printf("  #%u rank %.6f at %.6f, %.6f\n", p.id(), p.rank, p.location.representative_geo.lat,
                    p.location.representative_geo.lon);
    }
}

int run_pulses(const PulsesArgs& a) {
    const fs::path root(a.fields);
    const auto cfg_path = a.city.empty() ? find_city_config(root) : std::optional<fs::path>(a.city);
    if (!cfg_path) throw InvalidArgument("no city.json found near " + root.string() + "; pass --city");
    const CityConfig config = CityConfig::load(*cfg_path);
    const Mesh mesh = build_mesh(config);

    std::optional<Scenario> only;
    if (!a.scenario.empty()) {
        const auto f = parse_scenario_family(a.scenario);
        if (!f) throw InvalidArgument("unknown scenario '" + a.scenario + "'");
        only = Scenario{*f, a.part};
    }

    std::vector<fs::path> files = field_files(root);
    std::vector<std::pair<fs::path, FieldCollection>> inputs;
    for (const fs::path& f : files) {
        FieldCollection c = read_fields(f, mesh);
        if (only && (c.scenario.family != only->family || (!only->part.empty() && c.scenario.part != only->part))) {
            continue;
        }
        inputs.emplace_back(f, std::move(c));
    }
    if (inputs.empty()) throw NotFound("no matching field files under " + root.string());

    // One input writes straight to --out; several make --out a directory laid
    // out as <Family>/<part>.json.
    const bool dataset_root = fs::is_directory(root) && fs::exists(city_config_path(root));
    fs::path out_root;
    if (!a.out.empty()) {
        out_root = a.out;
    } else if (dataset_root) {
        out_root = root / "pulses";
    } else {
        throw InvalidArgument("--out is required");
    }
    const bool single = inputs.size() == 1 && !a.out.empty() && !fs::is_directory(out_root);

    for (auto& [path, fields] : inputs) {
        if (fields.config_digest != config.digest()) {
            std::cerr << "warning: " << path.string() << " was computed with a different city config\n";
        }
        const auto t0 = Clock::now();
        const PulseCatalog c = build_catalog(config, mesh, fields, a.threshold, to_hex(file_digest(path)));
        const fs::path dest = single ? out_root
                                     : out_root / std::string(to_string(c.scenario.family)) /
                                           (c.scenario.part + ".json");
        write_catalog(c, dest);
        print_summary(c, dest, seconds_since(t0));
    }
    return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
    std::string a;
    std::string b;
    std::string region;
    bool raw = false;
};

Polygon load_region(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open region " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return j.is_object() ? polygon_from_geojson(j) : polygon_from_lonlat(j);
}

int run_compare(const CompareArgs& a) {
    const PulseCatalog src = read_catalog(a.a);
    const PulseCatalog dst = read_catalog(a.b);
    SimilarityOptions options;
    options.raw_function = a.raw;
    std::vector<SimilarityResult> results;
    if (a.region.empty()) {
        std::vector<const Pulse*> all;
        for (const Pulse& p : src.pulses) all.push_back(&p);
        results = assign_to_sources(std::move(all), dst.pulses, options);
    } else {
        results = similar_pulses(load_region(a.region), src.pulses, dst.pulses, options);
    }
    std::cout << "source_id,source_rank,target_id,target_rank,measure\n";
    for (const SimilarityResult& r : results) {
        for (const SimilarityMatch& m : r.matches) {
            std::printf("%u,%.17g,%u,%.17g,%.17g\n", r.source_id, src.pulse(r.source_id).rank, m.target_id,
                        dst.pulse(m.target_id).rank, m.measure);
        }
    }
    return 0;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    double threshold = kDefaultThreshold;
    std::vector<std::string> dirs;
};

std::vector<fs::path> dataset_dirs(const std::vector<std::string>& given) {
    std::vector<fs::path> out(given.begin(), given.end());
    if (!out.empty()) return out;
    const char* env = std::getenv("UP_DATA_DIR");
    if (env == nullptr || *env == '\0') throw InvalidArgument("no dataset directories given and UP_DATA_DIR unset");
    const fs::path root(env);
    if (fs::exists(city_config_path(root))) return {root};
    if (fs::is_directory(root)) {
        for (const auto& e : fs::directory_iterator(root)) {
            if (e.is_directory() && fs::exists(city_config_path(e.path()))) out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw NotFound("no datasets under " + root.string());
    return out;
}

int run_serve(const ServeArgs& a) {
    std::vector<CityDataset> cities;
    for (const fs::path& dir : dataset_dirs(a.dirs)) {
        const auto t0 = Clock::now();
        cities.push_back(CityDataset::load(dir, a.threshold));
        std::cout << "loaded " << cities.back().config().name << " from " << dir.string() << " ("
                  << cities.back().scenarios().size() << " scenario parts";
        std::printf(", %.2f s)\n", seconds_since(t0));
    }
    const Service service(std::move(cities));
    httplib::Server server;
    mount(server, service);
    std::cout << "listening on http://" << a.host << ":" << a.port << std::endl;
    if (!server.listen(a.host, a.port)) {
        std::cerr << "error: cannot listen on " << a.host << ":" << a.port << "\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------- persistence

struct PersistenceArgs {
    std::string fields;
    std::string city;
    std::string resolution = "All";
    int step = 0;
};

int run_persistence(const PersistenceArgs& a) {
    const auto cfg_path = a.city.empty() ? find_city_config(a.fields) : std::optional<fs::path>(a.city);
    if (!cfg_path) throw InvalidArgument("no city.json found near " + a.fields + "; pass --city");
    const Mesh mesh = build_mesh(CityConfig::load(*cfg_path));
    const FieldCollection c = read_fields(a.fields, mesh);
    const auto r = parse_resolution(a.resolution);
    if (!r) throw InvalidArgument("unknown resolution '" + a.resolution + "'");
    const auto pairs = sweep_persistence(c.field(*r, a.step), mesh);
    write_persistence_csv(std::cout, pairs);
    return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string out;
    std::string city_out;
    std::size_t points = 100'000;
    std::uint64_t seed = 1;
};

int run_synth(const SynthArgs& a) {
    const SyntheticCity city = five_generator_city(a.points);
    const auto points = generate_points(city, a.seed);
    std::ofstream out(a.out, std::ios::trunc);
    if (!out) throw Error("cannot write " + a.out);
    write_points_csv(out, points, city.config.bounds.projection());
    if (!a.city_out.empty()) {
        std::ofstream cfg(a.city_out, std::ios::trunc);
        if (!cfg) throw Error("cannot write " + a.city_out);
        cfg << city.config.to_json().dump(2) << "\n";
    }
    std::cout << "wrote " << points.size() << " points to " << a.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological pulse extraction for spatio-temporal urban data"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ing = app.add_subcommand("ingest", "Compute density fields from a point CSV");
    ing->add_option("--city", ingest.city, "City config JSON")->required()->check(CLI::ExistingFile);
    ing->add_option("--input", ingest.input, "Point CSV (lat, lon, timestamp[, weight])")->required();
    ing->add_option("--scenario", ingest.scenario, "Default, PartsOfWeek, Seasons, PartsOfDay or all")
        ->capture_default_str();
    ing->add_option("--out", ingest.out, "Dataset directory")->required();
    ing->add_option("--aggregate", ingest.aggregate, "sum or mean")->capture_default_str();

    PulsesArgs pulses;
    auto* pul = app.add_subcommand("pulses", "Extract pulse catalogs from field files");
    pul->add_option("--fields", pulses.fields, "Dataset directory, directory of .upf files, or one .upf")
        ->required();
    pul->add_option("--threshold", pulses.threshold, "Persistence threshold")->capture_default_str();
    pul->add_option("--out", pulses.out, "Catalog JSON (one input) or output directory");
    pul->add_option("--city", pulses.city, "City config JSON (default: city.json near the fields)");
    pul->add_option("--scenario", pulses.scenario, "Only this scenario family");
    pul->add_option("--part", pulses.part, "Only this scenario part");

    CompareArgs compare;
    auto* cmp = app.add_subcommand("compare", "Match pulses of catalog B to pulses of catalog A");
    cmp->add_option("--a", compare.a, "Source catalog")->required();
    cmp->add_option("--b", compare.b, "Target catalog")->required();
    cmp->add_option("--region", compare.region, "GeoJSON polygon or [[lon, lat], ...] ring selecting sources");
    cmp->add_flag("--raw", compare.raw, "Compare raw instead of normalized function beats");

    ServeArgs serve;
    auto* srv = app.add_subcommand("serve", "Serve datasets over HTTP");
    srv->add_option("--port", serve.port)->capture_default_str();
    srv->add_option("--host", serve.host)->capture_default_str();
    srv->add_option("--threshold", serve.threshold, "Threshold for catalogs rebuilt at load")->capture_default_str();
    srv->add_option("dirs", serve.dirs, "Dataset directories (default: UP_DATA_DIR)");

    PersistenceArgs persistence;
    auto* per = app.add_subcommand("persistence", "Dump one field's persistence pairs as CSV");
    per->add_option("--fields", persistence.fields, "Field file (.upf)")->required();
    per->add_option("--city", persistence.city, "City config JSON");
    per->add_option("--resolution", persistence.resolution)->capture_default_str();
    per->add_option("--step", persistence.step)->capture_default_str();

    SynthArgs synth;
    auto* syn = app.add_subcommand("synth", "Write a synthetic five-generator city");
    syn->add_option("--out", synth.out, "Point CSV")->required();
    syn->add_option("--city-out", synth.city_out, "City config JSON");
    syn->add_option("--points", synth.points)->capture_default_str();
    syn->add_option("--seed", synth.seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ing->parsed()) return run_ingest(ingest);
        if (pul->parsed()) return run_pulses(pulses);
        if (cmp->parsed()) return run_compare(compare);
        if (srv->parsed()) return run_serve(serve);
        if (per->parsed()) return run_persistence(persistence);
        if (syn->parsed()) return run_synth(synth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
