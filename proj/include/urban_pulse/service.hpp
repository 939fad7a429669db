#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "dataset.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "pulse.hpp"
#include "region.hpp"

namespace urban_pulse {

struct HttpRequest {
    std::string method = "GET";
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::string if_none_match;
};

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
    std::string etag;
};

/// Read-only JSON API over a set of loaded cities. Transport-agnostic:
/// `handle` maps a request to a response and never mutates state, so the
/// same request always yields the same bytes.
class Service {
public:
    explicit Service(std::vector<CityDataset> cities) : cities_(std::move(cities)) {
        Fnv1a h;
        for (std::size_t k = 0; k < cities_.size(); ++k) {
            const CityDataset& c = cities_[k];
            if (index_.contains(c.config().name)) throw InvalidArgument("duplicate city " + c.config().name);
            index_.emplace(c.config().name, k);
            h.update(c.digest());
        }
        digest_ = to_hex(h.value());
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    [[nodiscard]] const std::vector<CityDataset>& cities() const noexcept { return cities_; }

    [[nodiscard]] HttpResponse handle(const HttpRequest& req) const {
        HttpResponse res;
        try {
            res = route(req);
        } catch (const NotFound& e) {
            res = error(404, e.what());
        } catch (const InvalidArgument& e) {
            res = error(400, e.what());
        } catch (const FormatError& e) {
            res = error(400, e.what());
        } catch (const nlohmann::json::exception& e) {
            res = error(400, std::string("malformed JSON: ") + e.what());
        }
        if (res.status == 200 && !res.etag.empty() && req.if_none_match == res.etag) {
            res.status = 304;
            res.body.clear();
        }
        return res;
    }

    static HttpResponse error(int status, std::string_view message) {
        nlohmann::ordered_json j;
        j["code"] = status;
        j["message"] = message;
        return {status, j.dump(), "application/json", {}};
    }

private:
    using Json = nlohmann::ordered_json;

    static std::vector<std::string_view> segments(std::string_view path) {
        std::vector<std::string_view> out;
        while (!path.empty()) {
            const auto slash = path.find('/');
            const auto seg = path.substr(0, slash);
            if (!seg.empty()) out.push_back(seg);
            if (slash == std::string_view::npos) break;
            path.remove_prefix(slash + 1);
        }
        return out;
    }

    static HttpResponse ok(const Json& body, std::string etag) {
        return {200, body.dump(), "application/json", "\"" + std::move(etag) + "\""};
    }

    HttpResponse route(const HttpRequest& req) const {
        const auto seg = segments(req.path);
        if (req.method == "POST") {
            if (seg.size() == 1 && seg[0] == "similarity") return similarity(req);
            if (!seg.empty() && seg[0] == "cities") return error(405, "method not allowed");
            throw NotFound("no route " + req.path);
        }
        if (req.method != "GET" && req.method != "HEAD") return error(405, "method not allowed");
        if (seg.empty() || seg[0] != "cities") throw NotFound("no route " + req.path);
        if (seg.size() == 1) return list_cities();
        const CityDataset& city = find_city(seg[1]);
        if (seg.size() == 3 && seg[2] == "pulses") return catalog(city, req);
        if (seg.size() == 7 && seg[2] == "fields") return field(city, seg, req);
        if (seg.size() == 5 && seg[2] == "pulses" && seg[4] == "beats") return beats(city, seg[3], req);
        throw NotFound("no route " + req.path);
    }

    const CityDataset& find_city(std::string_view name) const {
        const auto it = index_.find(std::string(name));
        if (it == index_.end()) throw NotFound("unknown city '" + std::string(name) + "'");
        return cities_[it->second];
    }

    static std::string param(const HttpRequest& req, const std::string& key, std::string fallback = {}) {
        const auto it = req.query.find(key);
        return it == req.query.end() ? std::move(fallback) : it->second;
    }

    static Scenario parse_scenario(std::string_view family_name, std::string_view part) {
        const auto family = parse_scenario_family(family_name);
        if (!family) throw InvalidArgument("unknown scenario '" + std::string(family_name) + "'");
        if (part.empty()) {
            if (parts(*family).size() != 1) {
                throw InvalidArgument("scenario " + std::string(family_name) + " needs a part");
            }
            part = parts(*family).front();
        }
        return make_scenario(*family, part);
    }

    static Scenario scenario_from_query(const HttpRequest& req) {
        return parse_scenario(param(req, "scenario", "Default"), param(req, "part"));
    }

    static long parse_long(std::string_view text, std::string_view what) {
        long value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
            throw InvalidArgument(std::string(what) + " must be an integer");
        }
        return value;
    }

    static Json scenario_inventory(const CityDataset& city) {
        Json list = Json::array();
        for (const auto& [s, data] : city.scenarios()) {
            Json res = Json::array();
            for (Resolution r : s.resolutions()) res.push_back(to_string(r));
            list.push_back({{"scenario", to_string(s.family)},
                            {"part", s.part},
                            {"resolutions", res},
                            {"pulse_count", data.catalog.pulses.size()}});
        }
        return list;
    }

    HttpResponse list_cities() const {
        Json out = Json::array();
        for (const CityDataset& c : cities_) {
            out.push_back({{"name", c.config().name},
                           {"config", Json::parse(c.config().to_json().dump())},
                           {"digest", c.digest()},
                           {"mesh", {{"nx", c.mesh().nx()}, {"ny", c.mesh().ny()}, {"spacing_m", c.mesh().spacing()}}},
                           {"scenarios", scenario_inventory(c)}});
        }
        return ok(out, digest_);
    }

    static HttpResponse catalog(const CityDataset& city, const HttpRequest& req) {
        const auto& data = city.scenario(scenario_from_query(req));
        return ok(to_json(data.catalog), city.digest());
    }

    static double round6(double v) noexcept { return std::round(v * 1e6) / 1e6; }

    static HttpResponse field(const CityDataset& city, const std::vector<std::string_view>& seg,
                              const HttpRequest& req) {
        const Scenario scenario = parse_scenario(seg[3], seg[4]);
        const auto resolution = parse_resolution(seg[5]);
        if (!resolution) throw InvalidArgument("unknown resolution '" + std::string(seg[5]) + "'");
        const long step = parse_long(seg[6], "step");
        if (step < 0 || step >= step_count(*resolution)) {
            throw InvalidArgument("step " + std::to_string(step) + " out of range 0.." +
                                  std::to_string(step_count(*resolution) - 1) + " for " +
                                  std::string(to_string(*resolution)));
        }
        if (!scenario.has_resolution(*resolution)) {
            throw NotFound("scenario " + std::string(to_string(scenario.family)) + " has no " +
                           std::string(to_string(*resolution)) + " resolution");
        }
        const std::string norm = param(req, "norm", "true");
        if (norm != "true" && norm != "false") throw InvalidArgument("norm must be true or false");
        const bool normalized = norm == "true";

        const auto& data = city.scenario(scenario);
        const ScalarField& f = data.fields.field(*resolution, static_cast<int>(step));
        Json values = Json::array();
        for (VertexId v = 0; v < f.values.size(); ++v) {
            values.push_back(round6(normalized ? f.normalized(v) : f.values[v]));
        }
        const GeoPoint origin = city.mesh().projection().origin();
        Json out;
        out["city"] = city.config().name;
        out["scenario"] = to_string(scenario.family);
        out["part"] = scenario.part;
        out["resolution"] = to_string(*resolution);
        out["step"] = step;
        out["nx"] = city.mesh().nx();
        out["ny"] = city.mesh().ny();
        out["spacing_m"] = city.mesh().spacing();
        out["origin"] = {{"lat", origin.lat}, {"lon", origin.lon}};
        out["normalized"] = normalized;
        out["resolution_max"] = f.resolution_max;
        out["values"] = std::move(values);
        return ok(out, city.digest());
    }

    static HttpResponse beats(const CityDataset& city, std::string_view id_text, const HttpRequest& req) {
        const auto& data = city.scenario(scenario_from_query(req));
        const long id = parse_long(id_text, "pulse id");
        if (id < 0) throw NotFound("no pulse " + std::string(id_text));
        const Pulse& p = data.catalog.pulse(static_cast<std::uint32_t>(id));

        std::optional<Resolution> only;
        if (const std::string r = param(req, "resolution"); !r.empty()) {
            only = parse_resolution(r);
            if (!only) throw InvalidArgument("unknown resolution '" + r + "'");
            if (p.beats.find(*only) == nullptr) {
                throw NotFound("pulse has no " + r + " beats in this scenario");
            }
        }
        Json list = Json::array();
        for (const ResolutionBeats& b : p.beats.resolutions) {
            if (only && b.resolution != *only) continue;
            list.push_back({{"resolution", to_string(b.resolution)},
                            {"significant", b.significant},
                            {"maxima", b.maxima},
                            {"function", b.function},
                            {"function_raw", b.function_raw}});
        }
        Json out;
        out["city"] = city.config().name;
        out["scenario"] = to_string(data.catalog.scenario.family);
        out["part"] = data.catalog.scenario.part;
        out["id"] = p.id();
        out["rank"] = p.rank;
        out["beats"] = std::move(list);
        return ok(out, city.digest());
    }

    HttpResponse similarity(const HttpRequest& req) const {
        const auto body = nlohmann::json::parse(req.body);
        if (!body.is_object()) throw InvalidArgument("request body must be a JSON object");
        const CityDataset& source = find_city(body.at("source_city").get<std::string>());
        const CityDataset& target = find_city(body.value("target_city", source.config().name));
        const Scenario source_scenario =
            parse_scenario(body.value("scenario", std::string("Default")), body.value("part", std::string{}));
        const std::string target_family =
            body.value("target_scenario", std::string(to_string(source_scenario.family)));
        const bool same_family = target_family == to_string(source_scenario.family);
        const Scenario target_scenario =
            parse_scenario(target_family, body.value("target_part", same_family ? source_scenario.part : std::string{}));
        if (!body.contains("region")) throw InvalidArgument("missing region");
        const auto& region_json = body.at("region");
        const Polygon region =
            region_json.is_object() ? polygon_from_geojson(region_json) : polygon_from_lonlat(region_json);
        SimilarityOptions options;
        options.raw_function = body.value("raw", false);

        const auto& src = source.scenario(source_scenario).catalog;
        const auto& dst = target.scenario(target_scenario).catalog;
        const auto results = similar_pulses(region, src.pulses, dst.pulses, options);

        Json groups = Json::array();
        for (const SimilarityResult& r : results) {
            Json matches = Json::array();
            for (const SimilarityMatch& m : r.matches) {
                matches.push_back({{"target_id", m.target_id},
                                   {"target_rank", dst.pulse(m.target_id).rank},
                                   {"measure", m.measure}});
            }
            groups.push_back({{"source_id", r.source_id},
                              {"source_rank", src.pulse(r.source_id).rank},
                              {"matches", std::move(matches)}});
        }
        Json out;
        out["source_city"] = source.config().name;
        out["target_city"] = target.config().name;
        out["results"] = std::move(groups);
        return ok(out, to_hex(fnv1a(source.digest() + target.digest() + req.body)));
    }

    std::vector<CityDataset> cities_;
    std::map<std::string, std::size_t> index_;
    std::string digest_;
};

} // namespace urban_pulse
