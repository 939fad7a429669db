#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "error.hpp"

namespace urban_pulse {

/// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

/// Temporal grouping. Enumerator order is the canonical feature ordering.
enum class Resolution : std::uint8_t { All = 0, Month = 1, Day = 2, Hour = 3 };

inline constexpr std::array<Resolution, 4> kResolutions = {Resolution::All, Resolution::Month,
                                                           Resolution::Day, Resolution::Hour};

inline constexpr int step_count(Resolution r) noexcept {
    switch (r) {
    case Resolution::All: return 1;
    case Resolution::Month: return 12;
    case Resolution::Day: return 7;
    case Resolution::Hour: return 24;
    }
    return 0;
}

inline constexpr std::string_view to_string(Resolution r) noexcept {
    switch (r) {
    case Resolution::All: return "All";
    case Resolution::Month: return "Month";
    case Resolution::Day: return "Day";
    case Resolution::Hour: return "Hour";
    }
    return "?";
}

inline std::optional<Resolution> parse_resolution(std::string_view name) noexcept {
    for (Resolution r : kResolutions) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

enum class ScenarioFamily : std::uint8_t { Default = 0, PartsOfWeek = 1, Seasons = 2, PartsOfDay = 3 };

inline constexpr std::array<ScenarioFamily, 4> kScenarioFamilies = {
    ScenarioFamily::Default, ScenarioFamily::PartsOfWeek, ScenarioFamily::Seasons,
    ScenarioFamily::PartsOfDay};

inline constexpr std::string_view to_string(ScenarioFamily f) noexcept {
    switch (f) {
    case ScenarioFamily::Default: return "Default";
    case ScenarioFamily::PartsOfWeek: return "PartsOfWeek";
    case ScenarioFamily::Seasons: return "Seasons";
    case ScenarioFamily::PartsOfDay: return "PartsOfDay";
    }
    return "?";
}

inline std::optional<ScenarioFamily> parse_scenario_family(std::string_view name) noexcept {
    for (ScenarioFamily f : kScenarioFamilies) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

namespace detail {
inline constexpr std::array<Resolution, 4> kDefaultRes = {Resolution::All, Resolution::Month,
                                                          Resolution::Day, Resolution::Hour};
inline constexpr std::array<Resolution, 3> kWeekRes = {Resolution::All, Resolution::Month,
                                                       Resolution::Hour};
inline constexpr std::array<Resolution, 3> kSeasonRes = {Resolution::All, Resolution::Day,
                                                         Resolution::Hour};
inline constexpr std::array<Resolution, 3> kDayPartRes = {Resolution::All, Resolution::Month,
                                                          Resolution::Day};

inline constexpr std::array<std::string_view, 1> kDefaultParts = {"all"};
inline constexpr std::array<std::string_view, 2> kWeekParts = {"Weekday", "Weekend"};
inline constexpr std::array<std::string_view, 4> kSeasonParts = {"Spring", "Summer", "Fall",
                                                                 "Winter"};
inline constexpr std::array<std::string_view, 4> kDayParts = {"Morning", "Afternoon", "Evening",
                                                              "Night"};
} // namespace detail

/// Resolutions analysed for a scenario family. A family that partitions one
/// resolution drops it.
inline constexpr std::span<const Resolution> resolutions(ScenarioFamily f) noexcept {
    switch (f) {
    case ScenarioFamily::Default: return detail::kDefaultRes;
    case ScenarioFamily::PartsOfWeek: return detail::kWeekRes;
    case ScenarioFamily::Seasons: return detail::kSeasonRes;
    case ScenarioFamily::PartsOfDay: return detail::kDayPartRes;
    }
    return {};
}

inline constexpr std::span<const std::string_view> parts(ScenarioFamily f) noexcept {
    switch (f) {
    case ScenarioFamily::Default: return detail::kDefaultParts;
    case ScenarioFamily::PartsOfWeek: return detail::kWeekParts;
    case ScenarioFamily::Seasons: return detail::kSeasonParts;
    case ScenarioFamily::PartsOfDay: return detail::kDayParts;
    }
    return {};
}

/// Number of scalar fields one part of a family produces.
inline constexpr int fields_per_part(ScenarioFamily f) noexcept {
    int n = 0;
    for (Resolution r : resolutions(f)) n += step_count(r);
    return n;
}

/// A (family, part) pair, e.g. Seasons/Winter.
struct Scenario {
    ScenarioFamily family = ScenarioFamily::Default;
    std::string part = "all";

    [[nodiscard]] std::span<const Resolution> resolutions() const noexcept {
        return urban_pulse::resolutions(family);
    }
    [[nodiscard]] bool has_resolution(Resolution r) const noexcept {
        for (Resolution x : resolutions()) {
            if (x == r) return true;
        }
        return false;
    }
    [[nodiscard]] int part_index() const noexcept {
        const auto labels = parts(family);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == part) return static_cast<int>(i);
        }
        return -1;
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
    friend auto operator<=>(const Scenario&, const Scenario&) = default;
};

inline Scenario make_scenario(ScenarioFamily family, std::string_view part) {
    Scenario s{family, std::string(part)};
    if (s.part_index() < 0) {
        throw InvalidArgument("unknown part '" + std::string(part) + "' for scenario " +
                              std::string(to_string(family)));
    }
    return s;
}

/// Broken-down city-local time (fixed offset, no DST).
struct LocalTime {
    int year;
    int month0;   // Jan = 0
    int weekday0; // Monday = 0
    int hour;
};

inline LocalTime local_time(Timestamp ts, int utc_offset_minutes) noexcept {
    using namespace std::chrono;
    const sys_seconds t{seconds{ts + static_cast<Timestamp>(utc_offset_minutes) * 60}};
    const sys_days day = floor<days>(t);
    const year_month_day ymd{day};
    const auto since_midnight = t - day;
    return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())) - 1,
            static_cast<int>(weekday{day}.iso_encoding()) - 1,
            static_cast<int>(duration_cast<hours>(since_midnight).count())};
}

/// Time-step index of `ts` at resolution `res`, in city-local time.
inline int bucket(Timestamp ts, Resolution res, int utc_offset_minutes) noexcept {
    if (res == Resolution::All) return 0;
    const LocalTime lt = local_time(ts, utc_offset_minutes);
    switch (res) {
    case Resolution::Month: return lt.month0;
    case Resolution::Day: return lt.weekday0;
    case Resolution::Hour: return lt.hour;
    case Resolution::All: break;
    }
    return 0;
}

/// Index into parts(family) of the part containing `ts`. Intervals are
/// half-open; seasons are meteorological (northern hemisphere).
inline int scenario_part_index(Timestamp ts, ScenarioFamily family, int utc_offset_minutes) noexcept {
    if (family == ScenarioFamily::Default) return 0;
    const LocalTime lt = local_time(ts, utc_offset_minutes);
    switch (family) {
    case ScenarioFamily::PartsOfWeek: return lt.weekday0 < 5 ? 0 : 1;
    case ScenarioFamily::Seasons:
        // Mar-May, Jun-Aug, Sep-Nov, Dec-Feb.
        return ((lt.month0 + 10) % 12) / 3;
    case ScenarioFamily::PartsOfDay:
        if (lt.hour < 6) return 3;
        return (lt.hour - 6) / 6;
    case ScenarioFamily::Default: break;
    }
    return 0;
}

/// Part label of the family that `ts` falls into.
inline std::string_view scenario_member(Timestamp ts, ScenarioFamily family, int utc_offset_minutes) noexcept {
    return parts(family)[static_cast<std::size_t>(scenario_part_index(ts, family, utc_offset_minutes))];
}

/// Label if `ts` belongs to the given part, nothing otherwise.
inline std::optional<std::string_view> scenario_member(Timestamp ts, const Scenario& scenario,
                                                       int utc_offset_minutes) noexcept {
    const std::string_view label = scenario_member(ts, scenario.family, utc_offset_minutes);
    if (label != scenario.part) return std::nullopt;
    return label;
}

namespace detail {
inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) noexcept {
    if (pos + len > s.size()) return false;
    const char* first = s.data() + pos;
    const char* last = first + len;
    for (const char* p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') return false;
    }
    return std::from_chars(first, last, out).ec == std::errc{};
}
} // namespace detail

/// Accepts epoch seconds (integer or decimal) or ISO-8601
/// `YYYY-MM-DD[(T| )hh:mm[:ss[.fff]]][Z|(+|-)hh[:]mm]`. A missing zone means UTC.
inline std::optional<Timestamp> parse_timestamp(std::string_view text) noexcept {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text.empty()) return std::nullopt;

    const bool looks_iso = text.size() >= 10 && text[4] == '-' && text[7] == '-';
    if (!looks_iso) {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value) ||
            std::abs(value) > 1e13) {
            return std::nullopt;
        }
        return static_cast<Timestamp>(std::floor(value));
    }

    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!detail::read_int(text, 0, 4, y) || !detail::read_int(text, 5, 2, mo) ||
        !detail::read_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;

    std::size_t pos = 10;
    if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
        if (!detail::read_int(text, pos + 1, 2, h) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
            !detail::read_int(text, pos + 4, 2, mi)) {
            return std::nullopt;
        }
        pos += 6;
        if (pos < text.size() && text[pos] == ':') {
            if (!detail::read_int(text, pos + 1, 2, sec)) return std::nullopt;
            pos += 3;
            if (pos < text.size() && text[pos] == '.') {
                ++pos;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
            }
        }
        if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    }

    int offset_minutes = 0;
    if (pos < text.size()) {
        const char z = text[pos];
        if (z == 'Z' || z == 'z') {
            ++pos;
        } else if (z == '+' || z == '-') {
            int oh = 0, om = 0;
            if (!detail::read_int(text, pos + 1, 2, oh)) return std::nullopt;
            std::size_t mpos = pos + 3;
            if (mpos < text.size() && text[mpos] == ':') ++mpos;
            if (!detail::read_int(text, mpos, 2, om)) return std::nullopt;
            offset_minutes = (z == '+' ? 1 : -1) * (oh * 60 + om);
            pos = mpos + 2;
        } else {
            return std::nullopt;
        }
    }
    if (pos != text.size()) return std::nullopt;

    const Timestamp days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return days_since_epoch * 86400 + h * 3600 + mi * 60 + sec -
           static_cast<Timestamp>(offset_minutes) * 60;
}

} // namespace urban_pulse
