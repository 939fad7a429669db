#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "density.hpp"
#include "error.hpp"
#include "geo.hpp"
#include "mesh.hpp"
#include "pulse.hpp"

namespace urban_pulse {

inline constexpr std::string_view kCatalogFormat = "urban-pulse-catalog/1";

/// Every pulse of one (city, scenario part), as written to catalog JSON.
struct PulseCatalog {
    std::string city;
    Scenario scenario;
    double threshold = kDefaultThreshold;
    double epsilon_m = 100.0;
    std::string dataset_digest;
    /// Ordered by id.
    std::vector<Pulse> pulses;

    [[nodiscard]] const Pulse& pulse(std::uint32_t id) const {
        if (id >= pulses.size()) throw NotFound("no pulse " + std::to_string(id));
        return pulses[id];
    }
};

inline PulseCatalog build_catalog(const CityConfig& city, const Mesh& mesh, const FieldCollection& fields,
                                  double threshold, std::string dataset_digest) {
    PulseCatalog c;
    c.city = city.name;
    c.scenario = fields.scenario;
    c.threshold = threshold;
    c.epsilon_m = city.epsilon_m;
    c.dataset_digest = std::move(dataset_digest);
    c.pulses = extract_pulses(fields, mesh, city.epsilon_m, threshold);
    return c;
}

inline nlohmann::ordered_json to_json(const Pulse& p) {
    nlohmann::ordered_json j;
    j["id"] = p.id();
    j["members"] = p.location.members;
    j["representative"] = {{"lat", p.location.representative_geo.lat},
                           {"lon", p.location.representative_geo.lon},
                           {"x", p.location.representative.x},
                           {"y", p.location.representative.y}};
    j["rank"] = p.rank;
    nlohmann::ordered_json rr = nlohmann::ordered_json::object();
    for (const auto& [r, value] : p.resolution_ranks) rr[std::string(to_string(r))] = value;
    j["resolution_ranks"] = rr;
    j["feature"] = p.feature.values;
    nlohmann::ordered_json beats = nlohmann::ordered_json::object();
    for (const ResolutionBeats& b : p.beats.resolutions) {
        beats[std::string(to_string(b.resolution))] = {{"significant", b.significant},
                                                       {"maxima", b.maxima},
                                                       {"function", b.function},
                                                       {"function_raw", b.function_raw}};
    }
    j["beats"] = beats;
    return j;
}

inline nlohmann::ordered_json to_json(const PulseCatalog& c) {
    nlohmann::ordered_json j;
    j["format"] = kCatalogFormat;
    j["city"] = c.city;
    j["scenario"] = to_string(c.scenario.family);
    j["part"] = c.scenario.part;
    j["threshold"] = c.threshold;
    j["epsilon_m"] = c.epsilon_m;
    j["dataset_digest"] = c.dataset_digest;
    nlohmann::ordered_json res = nlohmann::ordered_json::array();
    for (Resolution r : c.scenario.resolutions()) res.push_back(to_string(r));
    j["resolutions"] = res;
    nlohmann::ordered_json pulses = nlohmann::ordered_json::array();
    for (const Pulse& p : c.pulses) pulses.push_back(to_json(p));
    j["pulses"] = pulses;
    return j;
}

namespace detail {

inline Resolution resolution_or_throw(const std::string& name) {
    const auto r = parse_resolution(name);
    if (!r) throw FormatError("unknown resolution '" + name + "'");
    return *r;
}

template <class Json>
Pulse pulse_from_json(const Json& j) {
    PulseLocation loc;
    loc.id = j.at("id").template get<std::uint32_t>();
    loc.members = j.at("members").template get<std::vector<VertexId>>();
    const auto& rep = j.at("representative");
    loc.representative = {rep.at("x").template get<double>(), rep.at("y").template get<double>()};
    loc.representative_geo = {rep.at("lat").template get<double>(), rep.at("lon").template get<double>()};

    Beats beats;
    const auto& jb = j.at("beats");
    for (Resolution r : kResolutions) {
        const std::string key(to_string(r));
        if (!jb.contains(key)) continue;
        const auto& b = jb.at(key);
        ResolutionBeats rb;
        rb.resolution = r;
        rb.significant = b.at("significant").template get<std::vector<std::uint8_t>>();
        rb.maxima = b.at("maxima").template get<std::vector<std::uint8_t>>();
        rb.function = b.at("function").template get<std::vector<double>>();
        rb.function_raw = b.at("function_raw").template get<std::vector<double>>();
        const auto steps = static_cast<std::size_t>(step_count(r));
        if (rb.significant.size() != steps || rb.maxima.size() != steps || rb.function.size() != steps ||
            rb.function_raw.size() != steps) {
            throw FormatError("beats for " + key + " must have " + std::to_string(steps) + " steps");
        }
        beats.resolutions.push_back(std::move(rb));
    }
    // Feature and ranks are derived, so recompute instead of trusting the file.
    return make_pulse(std::move(loc), std::move(beats));
}

} // namespace detail

inline PulseCatalog catalog_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", std::string{}) != kCatalogFormat) throw FormatError("not a pulse catalog");
        PulseCatalog c;
        c.city = j.at("city").get<std::string>();
        const auto family = parse_scenario_family(j.at("scenario").get<std::string>());
        if (!family) throw FormatError("unknown scenario family");
        c.scenario = make_scenario(*family, j.at("part").get<std::string>());
        c.threshold = j.at("threshold").get<double>();
        c.epsilon_m = j.at("epsilon_m").get<double>();
        c.dataset_digest = j.at("dataset_digest").get<std::string>();
        for (const auto& jp : j.at("pulses")) c.pulses.push_back(detail::pulse_from_json(jp));
        for (std::size_t k = 0; k < c.pulses.size(); ++k) {
            if (c.pulses[k].id() != k) throw FormatError("catalog pulse ids must be 0..n-1 in order");
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("pulse catalog: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("pulse catalog: ") + e.what());
    }
}

inline std::string dump_catalog(const PulseCatalog& c) { return to_json(c).dump(1) + "\n"; }

inline void write_catalog(const PulseCatalog& c, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << dump_catalog(c);
}

inline PulseCatalog read_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return catalog_from_json(j);
}

} // namespace urban_pulse
