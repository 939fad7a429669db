#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "field_io.hpp"
#include "geo.hpp"
#include "mesh.hpp"

namespace urban_pulse {

// Dataset directory layout, as written by `urban-pulse ingest`:
//   <dir>/city.json
//   <dir>/fields/<Family>/<part>.upf
//   <dir>/pulses/<Family>/<part>.json   (optional; rebuilt from fields when absent or stale)
inline std::filesystem::path city_config_path(const std::filesystem::path& dir) { return dir / "city.json"; }

inline std::filesystem::path field_file_path(const std::filesystem::path& dir, const Scenario& s) {
    return dir / "fields" / std::string(to_string(s.family)) / (s.part + ".upf");
}

inline std::filesystem::path catalog_file_path(const std::filesystem::path& dir, const Scenario& s) {
    return dir / "pulses" / std::string(to_string(s.family)) / (s.part + ".json");
}

struct ScenarioData {
    FieldCollection fields;
    PulseCatalog catalog;
};

/// One city loaded into memory: config, mesh, and the fields and pulse
/// catalog of every scenario part found on disk. Immutable after load.
class CityDataset {
public:
    static CityDataset load(const std::filesystem::path& dir, double threshold = kDefaultThreshold) {
        const CityConfig config = CityConfig::load(city_config_path(dir));
        Mesh mesh = build_mesh(config);
        std::map<Scenario, ScenarioData> scenarios;
        Fnv1a digest;
        digest.update(config.digest());
        for (ScenarioFamily family : kScenarioFamilies) {
            for (std::string_view part : parts(family)) {
                const Scenario scenario{family, std::string(part)};
                const auto path = field_file_path(dir, scenario);
                if (!std::filesystem::exists(path)) continue;
                ScenarioData data;
                data.fields = read_fields(path, mesh);
                if (data.fields.scenario != scenario) {
                    throw FormatError(path.string() + " holds " + std::string(to_string(data.fields.scenario.family)) +
                                      "/" + data.fields.scenario.part);
                }
                if (data.fields.config_digest != config.digest()) {
                    throw FormatError(path.string() + " was computed with a different city config");
                }
                const std::string part_digest = to_hex(file_digest(path));
                digest.update(part_digest);

                const auto catalog_path = catalog_file_path(dir, scenario);
                bool loaded = false;
                if (std::filesystem::exists(catalog_path)) {
                    PulseCatalog c = read_catalog(catalog_path);
                    if (c.dataset_digest == part_digest && c.threshold == threshold) {
                        data.catalog = std::move(c);
                        loaded = true;
                    }
                }
                if (!loaded) data.catalog = build_catalog(config, mesh, data.fields, threshold, part_digest);
                scenarios.emplace(scenario, std::move(data));
            }
        }
        return CityDataset(config, std::move(mesh), std::move(scenarios), to_hex(digest.value()));
    }

    [[nodiscard]] const CityConfig& config() const noexcept { return config_; }
    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const std::string& digest() const noexcept { return digest_; }
    [[nodiscard]] const std::map<Scenario, ScenarioData>& scenarios() const noexcept { return scenarios_; }

    [[nodiscard]] const ScenarioData& scenario(const Scenario& s) const {
        const auto it = scenarios_.find(s);
        if (it == scenarios_.end()) {
            throw NotFound("city " + config_.name + " has no scenario " + std::string(to_string(s.family)) + "/" +
                           s.part);
        }
        return it->second;
    }

private:
    CityDataset(CityConfig config, Mesh mesh, std::map<Scenario, ScenarioData> scenarios, std::string digest)
        : config_(std::move(config)), mesh_(std::move(mesh)), scenarios_(std::move(scenarios)),
          digest_(std::move(digest)) {}

    CityConfig config_;
    Mesh mesh_;
    std::map<Scenario, ScenarioData> scenarios_;
    std::string digest_;
};

} // namespace urban_pulse
