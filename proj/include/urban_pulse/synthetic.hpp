#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <vector>

#include "error.hpp"
#include "geo.hpp"
#include "points.hpp"
#include "temporal.hpp"

namespace urban_pulse {

/// Isotropic Gaussian source of events, active only on the listed local
/// months (Jan = 0), weekdays (Mon = 0) and hours.
struct ActivityGenerator {
    ProjectedPoint center;
    double sigma_m = 40.0;
    std::vector<int> months;
    std::vector<int> weekdays;
    std::vector<int> hours;
    std::size_t points = 0;
    double weight = 1.0;
};

struct SyntheticCity {
    CityConfig config;
    std::vector<ActivityGenerator> generators;
    /// Extra events uniform in space and time.
    std::size_t background_points = 0;
    int first_year = 2012;
    int years = 3;
};

namespace detail {

template <class Rng>
int pick(const std::vector<int>& values, Rng& rng) {
    if (values.empty()) throw InvalidArgument("generator schedule must not be empty");
    return values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng)];
}

template <class Rng>
Timestamp scheduled_time(const ActivityGenerator& g, const SyntheticCity& city, Rng& rng) {
    using namespace std::chrono;
    const int y = city.first_year + std::uniform_int_distribution<int>(0, city.years - 1)(rng);
    const int m = pick(g.months, rng);
    const int want_weekday = pick(g.weekdays, rng);
    const sys_days first{year{y} / month{static_cast<unsigned>(m + 1)} / day{1}};
    const sys_days last{year{y} / month{static_cast<unsigned>(m + 1)} / std::chrono::last};
    std::vector<sys_days> candidates;
    for (sys_days d = first; d <= last; d += days{1}) {
        if (static_cast<int>(weekday{d}.iso_encoding()) - 1 == want_weekday) candidates.push_back(d);
    }
    const sys_days d = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    const int h = pick(g.hours, rng);
    const int s = std::uniform_int_distribution<int>(0, 3599)(rng);
    const Timestamp local = d.time_since_epoch().count() * 86400 + h * 3600 + s;
    return local - static_cast<Timestamp>(city.config.utc_offset_minutes) * 60;
}

} // namespace detail

/// Draws every generator's events, then the background, in that order.
/// Deterministic for a given seed and standard library.
inline std::vector<DataPoint> generate_points(const SyntheticCity& city, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<DataPoint> out;
    for (const ActivityGenerator& g : city.generators) {
        std::normal_distribution<double> offset(0.0, g.sigma_m);
        for (std::size_t k = 0; k < g.points; ++k) {
            const ProjectedPoint p{g.center.x + offset(rng), g.center.y + offset(rng)};
            out.push_back({p, detail::scheduled_time(g, city, rng), g.weight});
        }
    }
    if (city.background_points > 0) {
        const LocalProjection proj = city.config.bounds.projection();
        const ProjectedPoint far = proj.project({city.config.bounds.north, city.config.bounds.east});
        std::uniform_real_distribution<double> ux(0.0, far.x);
        std::uniform_real_distribution<double> uy(0.0, far.y);
        using namespace std::chrono;
        const Timestamp t0 = sys_days{year{city.first_year} / January / 1}.time_since_epoch().count() * 86400;
        const Timestamp t1 = sys_days{year{city.first_year + city.years} / January / 1}.time_since_epoch().count() * 86400;
        std::uniform_int_distribution<Timestamp> ut(t0, t1 - 1);
        for (std::size_t k = 0; k < city.background_points; ++k) {
            const double x = ux(rng);
            const double y = uy(rng);
            out.push_back({{x, y}, ut(rng), 1.0});
        }
    }
    return out;
}

/// Writes points as `lat,lon,timestamp,weight` with ISO-8601 UTC timestamps.
inline void write_points_csv(std::ostream& out, const std::vector<DataPoint>& points, const LocalProjection& proj) {
    out << "lat,lon,timestamp,weight\n";
    const auto precision = out.precision(10);
    for (const DataPoint& p : points) {
        using namespace std::chrono;
        const GeoPoint g = proj.unproject(p.location);
        const sys_seconds t{seconds{p.timestamp}};
        const sys_days d = floor<days>(t);
        const year_month_day ymd{d};
        const auto hms = hh_mm_ss{t - d};
        char stamp[32];
        std::snprintf(stamp, sizeof stamp, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                      static_cast<int>(hms.seconds().count()));
        out << g.lat << ',' << g.lon << ',' << stamp << ',' << p.weight << '\n';
    }
    out.precision(precision);
}

/// Five non-interacting generators on a 5 km square with interleaved,
/// pairwise-disjoint schedules: generator k owns the months, weekdays and
/// hours congruent to k mod 5.
inline SyntheticCity five_generator_city(std::size_t total_points = 100'000) {
    SyntheticCity city;
    city.config.name = "synthetic";
    city.config.bounds = {40.70, -74.02, 40.70 + 5000.0 / (kEarthRadiusM * std::numbers::pi / 180.0), -73.96};
    city.config.spacing_m = 50.0;
    city.config.epsilon_m = 100.0;
    city.config.utc_offset_minutes = -300;
    const ProjectedPoint centers[5] = {{1210, 1290}, {3690, 1160}, {2455, 2515}, {1140, 3795}, {3815, 3705}};
    for (int k = 0; k < 5; ++k) {
        ActivityGenerator g;
        g.center = centers[k];
        g.sigma_m = 40.0;
        for (int m = k; m < 12; m += 5) g.months.push_back(m);
        for (int d = k; d < 7; d += 5) g.weekdays.push_back(d);
        for (int h = k; h < 24; h += 5) g.hours.push_back(h);
        g.points = total_points / 5;
        city.generators.push_back(std::move(g));
    }
    return city;
}

} // namespace urban_pulse
