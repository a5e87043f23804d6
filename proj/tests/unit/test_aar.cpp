#include "spatial_link/aar.hpp"
#include "spatial_link/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace spatial_link;

namespace {

double ref_km(double lat1, double lon1, double lat2, double lon2) {
    const double m = std::cos((lat1 + lat2) / 2 * std::numbers::pi / 180.0);
    double dl = lon2 - lon1;
    while (dl >= 180) dl -= 360;
    while (dl < -180) dl += 360;
    return 111.11 * std::hypot(lat2 - lat1, dl * m);
}

// Equatorial registration, quarter-degree cells starting at (0, 0).
const GridRegistration kReg{0.0, 0.0, 0.25, 0.25, 25.0};

struct Scene {
    ChangeGrid mask, values;
};

// A meridian chain of 21 elevated cells at 1 degree spacing (rows 0..80, col 4)
// and a short chain of 5 cells 27 degrees east (col 112).
Scene two_clusters(double chain_value = 2.0) {
    const std::size_t rows = 81, cols = 121;
    std::vector<double> m(rows * cols, 0.0), v(rows * cols, 0.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& x : v) x = n(rng);
    for (std::size_t i = 0; i <= 20; ++i) {
        m[(4 * i) * cols + 4] = 1.0;
        v[(4 * i) * cols + 4] = chain_value;
    }
    for (std::size_t i = 0; i < 5; ++i) m[(4 * i) * cols + 112] = 1.0;
    return {ChangeGrid(rows, cols, m, kReg), ChangeGrid(rows, cols, v, kReg)};
}

}  // namespace

TEST_CASE("equirectangular distance examples") {
    const GeoPoint a{0, 0}, b{10, 0}, c{5, 5}, d{60, 0}, e{60, 10};
    CHECK(equirect_distance(a, b) == doctest::Approx(1111.1));
    CHECK(equirect_distance(a, c) == doctest::Approx(ref_km(0, 0, 5, 5)));
    CHECK(equirect_distance(d, e) == doctest::Approx(555.55));
    CHECK(equirect_distance(GeoPoint{45, 0}, GeoPoint{45, 10}) == doctest::Approx(785.67).epsilon(1e-5));
    CHECK(equirect_distance(a, a) == 0.0);
    const GeoPoint w{0, 179.5}, x{0, -179.5};
    CHECK(equirect_distance(w, x) == doctest::Approx(111.11));
}

TEST_CASE("distance is symmetric and obeys the triangle inequality on small patches") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> lat(-60, 60), lon(-180, 180), off(-3, 3);
    for (int i = 0; i < 10000; ++i) {
        const GeoPoint a{lat(rng), lon(rng)};
        const GeoPoint b{a.lat + off(rng), a.lon + off(rng)};
        const double dab = equirect_distance(a, b);
        CHECK(dab == doctest::Approx(equirect_distance(b, a)));
        CHECK(dab == doctest::Approx(ref_km(a.lat, a.lon, b.lat, b.lon)));
    }
    for (int i = 0; i < 2000; ++i) {
        const GeoPoint a{lat(rng), lon(rng)};
        const GeoPoint b{a.lat + off(rng), a.lon + off(rng)};
        const GeoPoint c{a.lat + off(rng), a.lon + off(rng)};
        // Same-latitude scaling differs slightly per pair; allow 1% slack.
        CHECK(equirect_distance(a, c) <= 1.01 * (equirect_distance(a, b) + equirect_distance(b, c)) + 1e-9);
    }
}

TEST_CASE("elevated points read coordinates from the mask registration") {
    const auto s = two_clusters();
    const auto pts = elevated_points(s.mask, s.values);
    REQUIRE(pts.size() == 26);
    CHECK(pts[0].lat == 0.0);
    CHECK(pts[0].lon == 1.0);
    CHECK(pts[0].value == 2.0);
    const ChangeGrid small(3, 3, std::vector<double>(9, 1.0), kReg);
    CHECK_THROWS_AS(elevated_points(small, s.values), Error);
}

TEST_CASE("components and extent filter") {
    const auto s = two_clusters();
    const auto g = build_aar_graph(elevated_points(s.mask, s.values), 250.0);
    for (const auto& e : g.graph.edges()) CHECK(e.distance <= 250.0);
    const auto comps = connected_components(g, 2000.0);
    REQUIRE(comps.size() == 2);
    std::size_t long_idx = comps[0].nodes.size() == 21 ? 0 : 1;
    CHECK(comps[long_idx].nodes.size() == 21);
    CHECK(comps[long_idx].extent_km == doctest::Approx(2222.2));
    CHECK(comps[long_idx].retained);
    CHECK(comps[1 - long_idx].extent_km == doctest::Approx(444.44));
    CHECK_FALSE(comps[1 - long_idx].retained);
    CHECK(comps[0].nodes.front() < comps[1].nodes.front());

    // Clusters 3000 km apart are never joined.
    const auto wide = build_aar_graph(elevated_points(s.mask, s.values), 2500.0);
    CHECK(connected_components(wide, 2000.0).size() == 2);
    CHECK(ref_km(0, 1, 0, 28) == doctest::Approx(3000).epsilon(0.001));
}

TEST_CASE("extent threshold is strict") {
    std::vector<GeoPoint> pts{{0, 0, 0, 0, 1.0}, {1, 0, 4, 0, 1.0}};
    const auto g = build_aar_graph(pts, 250.0);
    const auto at = connected_components(g, 111.11);
    REQUIRE(at.size() == 1);
    CHECK_FALSE(at[0].retained);
    CHECK(connected_components(g, 111.0)[0].retained);
}

TEST_CASE("elevation threshold defaults to the smallest value") {
    std::vector<GeoPoint> pts{{0, 0, 0, 0, 3.0}, {1, 0, 4, 0, 1.0}, {2, 0, 8, 0, 2.0}};
    const auto g = build_aar_graph(pts);
    CHECK(g.graph.params().elevation_threshold == 1.0);
    for (const auto& e : g.graph.edges()) CHECK(e.weight == 1);
    const auto h = build_aar_graph(pts, 250.0, 2.5);
    CHECK(h.graph.edges()[h.graph.find_edge(0, 1)].weight == -1);
}

TEST_CASE("station snapping") {
    const auto s = two_clusters();
    const auto g = build_aar_graph(elevated_points(s.mask, s.values));
    CHECK(g.points[snap_to_node(g, 10.2, 1.1)].lat == 10.0);
    try {
        snap_to_node(g, 10.0, 15.0);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StationUnreachable);
        CHECK(e.module() == "aar-benchmark");
    }
}

TEST_CASE("station paths along the chain") {
    const auto s = two_clusters();
    // Background values are standard normal, so 1.5 is rarely reached by chance.
    const auto g = build_aar_graph(elevated_points(s.mask, s.values), 250.0, 1.5);
    StationOptions opt;
    opt.significance.replicates = 199;
    const std::size_t origin = snap_to_node(g, 12.0, 1.0);
    const std::vector<std::size_t> origins{origin};
    const auto rep = station_path_significance(g, origins, 20.0, 1.0, s.values, opt);
    REQUIRE(rep.paths.size() == 1);
    CHECK(rep.paths[0].length() == 9);
    CHECK(rep.paths[0].score == 1.0);
    REQUIRE(rep.results.size() == 1);
    CHECK(rep.results[0].p_value < 0.05);

    // Origin in the other component contributes nothing.
    const std::vector<std::size_t> far{snap_to_node(g, 2.0, 28.0)};
    const auto none = station_path_significance(g, far, 20.0, 1.0, s.values, opt);
    CHECK(none.origins.empty());
    CHECK(none.paths.empty());
}
