#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"

using namespace urban_pulse;

namespace {

// R * 0.001 deg in radians, and the same scaled by cos(40.7 deg); evaluated
// offline in double precision.
constexpr double kNorthMilliDegree = 111.19492664455875;
constexpr double kEastMilliDegreeAt40_7 = 84.30069190021916;

} // namespace

TEST(Projection, OriginMapsToZero) {
    const GeoPoint o{40.7, -74.0};
    const ProjectedPoint p = project(o, o);
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
}

TEST(Projection, MilliDegreeNorth) {
    const GeoPoint o{40.7, -74.0};
    const ProjectedPoint p = project({40.701, -74.0}, o);
    EXPECT_EQ(p.x, 0.0);
    EXPECT_NEAR(p.y, kNorthMilliDegree, 1e-6);
}

TEST(Projection, MilliDegreeEastAtNewYorkLatitude) {
    const GeoPoint o{40.7, -74.0};
    const ProjectedPoint p = project({40.7, -73.999}, o);
    EXPECT_NEAR(p.x, kEastMilliDegreeAt40_7, 1e-6);
    EXPECT_NEAR(p.y, 0.0, 1e-9);
}

TEST(Projection, RejectsNonFinite) {
    const LocalProjection proj({40.7, -74.0}, 40.7);
    EXPECT_THROW((void)proj.project({std::nan(""), 0.0}), InvalidArgument);
    EXPECT_THROW((void)proj.unproject({0.0, INFINITY}), InvalidArgument);
}

TEST(Projection, RoundTripWithinCityBounds) {
    const GeoBounds b{40.49, -74.26, 40.92, -73.70};
    const LocalProjection proj = b.projection();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(b.south, b.north);
    std::uniform_real_distribution<double> lon(b.west, b.east);
    for (int k = 0; k < 10000; ++k) {
        const GeoPoint g{lat(rng), lon(rng)};
        const ProjectedPoint p = proj.project(g);
        const ProjectedPoint back = proj.project(proj.unproject(p));
        ASSERT_LT(distance(p, back), 1e-6);
    }
}

TEST(CityConfig, JsonRoundTripAndRadius) {
    CityConfig c;
    c.name = "nyc";
    c.bounds = {40.49, -74.26, 40.92, -73.70};
    c.utc_offset_minutes = -300;
    EXPECT_EQ(c.radius_m(), 500.0);
    const CityConfig back = CityConfig::from_json(c.to_json());
    EXPECT_EQ(back.name, "nyc");
    EXPECT_EQ(back.bounds.north, 40.92);
    EXPECT_EQ(back.utc_offset_minutes, -300);
    EXPECT_EQ(back.digest(), c.digest());
}

TEST(CityConfig, RejectsBadInput) {
    EXPECT_THROW(CityConfig::from_json(nlohmann::json::parse(R"({"name":"x"})")), FormatError);
    EXPECT_THROW(CityConfig::from_json(nlohmann::json::parse(
                     R"({"name":"x","bounds":{"south":1,"west":0,"north":0,"east":1}})")),
                 FormatError);
    EXPECT_THROW(CityConfig::from_json(nlohmann::json::parse(
                     R"({"name":"x","bounds":{"south":0,"west":0,"north":1,"east":1},"spacing_m":0})")),
                 FormatError);
    EXPECT_THROW(CityConfig::load("/nonexistent/city.json"), FormatError);
}

namespace {

GeoBounds box_meters(double width, double height) {
    const GeoPoint sw{40.7, -74.0};
    const double dlat = height / kEarthRadiusM * 180.0 / std::numbers::pi;
    const double mid = sw.lat + dlat / 2.0;
    const double dlon = width / (kEarthRadiusM * std::cos(to_radians(mid))) * 180.0 / std::numbers::pi;
    // A hair of slack keeps floor() from landing one short on exact multiples.
    return {sw.lat, sw.lon, sw.lat + dlat * (1 + 1e-12), sw.lon + dlon * (1 + 1e-12)};
}

} // namespace

TEST(BuildMesh, HundredMeterBox) {
    const Mesh m = build_mesh(box_meters(100, 100), 50);
    EXPECT_EQ(m.nx(), 3);
    EXPECT_EQ(m.ny(), 3);
    EXPECT_EQ(m.vertex_count(), 9u);
    EXPECT_EQ(m.triangle_count(), 8u);
}

TEST(BuildMesh, FloorArithmetic) {
    const Mesh m = build_mesh(box_meters(120, 70), 50);
    EXPECT_EQ(m.nx(), 3);
    EXPECT_EQ(m.ny(), 2);
    EXPECT_EQ(m.vertex_count(), 6u);
}

TEST(BuildMesh, RejectsBoundsSmallerThanSpacing) {
    EXPECT_THROW(build_mesh(box_meters(40, 200), 50), InvalidArgument);
    EXPECT_THROW(build_mesh(box_meters(200, 200), 0), InvalidArgument);
    EXPECT_THROW(build_mesh(GeoBounds{41, -74, 40, -73}, 50), InvalidArgument);
}

TEST(BuildMesh, VertexPositionsFollowIds) {
    const Mesh m = up_test::grid(4, 3, 50);
    const VertexId v = m.vertex_id(2, 1);
    EXPECT_EQ(v, 6u);
    EXPECT_EQ(m.column(v), 2);
    EXPECT_EQ(m.row(v), 1);
    EXPECT_EQ(m.position(v).x, 100.0);
    EXPECT_EQ(m.position(v).y, 50.0);
}

TEST(VertexLink, ThreeByThreeExamples) {
    const Mesh m = up_test::grid(3, 3);
    EXPECT_EQ(vertex_link(m, 4).size(), 6u);
    // (0,0) and (2,2) touch the cell diagonal; (2,0) and (0,2) do not.
    EXPECT_EQ(vertex_link(m, m.vertex_id(0, 0)).size(), 3u);
    EXPECT_EQ(vertex_link(m, m.vertex_id(2, 2)).size(), 3u);
    EXPECT_EQ(vertex_link(m, m.vertex_id(2, 0)).size(), 2u);
    EXPECT_EQ(vertex_link(m, m.vertex_id(0, 2)).size(), 2u);
    EXPECT_THROW(vertex_link(m, 9), InvalidArgument);
}

TEST(VertexLink, InteriorOrderIsCounterClockwise) {
    const Mesh m = up_test::grid(3, 3);
    const auto link = m.link(4);
    EXPECT_TRUE(link.cyclic);
    const std::vector<VertexId> expected{5, 8, 7, 3, 0, 1};
    EXPECT_EQ(std::vector<VertexId>(link.neighbors().begin(), link.neighbors().end()), expected);
}

// Properties over random mesh sizes: symmetric adjacency, degree classes,
// handshake lemma, Euler characteristic, and that consecutive link vertices
// are themselves adjacent (they span a triangle with the center).
TEST(MeshProperties, RandomSizes) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(2, 17);
    for (int trial = 0; trial < 60; ++trial) {
        const int nx = size(rng);
        const int ny = size(rng);
        const Mesh m = up_test::grid(nx, ny);
        std::size_t degree_sum = 0;
        for (VertexId v = 0; v < m.vertex_count(); ++v) {
            const VertexLink link = m.link(v);
            const auto nb = link.neighbors();
            degree_sum += nb.size();

            auto expected = up_test::grid_neighbors(nx, ny, v);
            std::vector<VertexId> got(nb.begin(), nb.end());
            std::sort(expected.begin(), expected.end());
            std::sort(got.begin(), got.end());
            ASSERT_EQ(got, expected) << nx << "x" << ny << " v=" << v;

            for (VertexId u : nb) {
                const auto back = vertex_link(m, u);
                ASSERT_NE(std::find(back.begin(), back.end(), v), back.end());
            }

            const int i = m.column(v);
            const int j = m.row(v);
            const bool interior = i > 0 && j > 0 && i < nx - 1 && j < ny - 1;
            const bool corner = (i == 0 || i == nx - 1) && (j == 0 || j == ny - 1);
            ASSERT_EQ(link.cyclic, interior);
            if (interior) {
                ASSERT_EQ(nb.size(), 6u);
            } else if (corner) {
                ASSERT_TRUE(nb.size() == 2 || nb.size() == 3);
            } else {
                ASSERT_TRUE(nb.size() == 3 || nb.size() == 4);
            }

            const std::size_t steps = link.cyclic ? nb.size() : nb.size() - 1;
            for (std::size_t k = 0; k < steps; ++k) {
                const VertexId a = nb[k];
                const VertexId b = nb[(k + 1) % nb.size()];
                const auto na = up_test::grid_neighbors(nx, ny, a);
                ASSERT_NE(std::find(na.begin(), na.end(), b), na.end());
            }
        }
        ASSERT_EQ(degree_sum, 2 * m.edge_count());
        const auto V = static_cast<long long>(m.vertex_count());
        const auto E = static_cast<long long>(m.edge_count());
        const auto F = static_cast<long long>(m.triangle_count());
        ASSERT_EQ(V - E + F, 1);
    }
}
