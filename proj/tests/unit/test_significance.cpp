#include "spatial_link/bands.hpp"
#include "spatial_link/error.hpp"
#include "spatial_link/significance.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace spatial_link;

namespace {

ChangeGrid random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed, double invalid_share = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution drop(invalid_share);
    std::vector<double> v(rows * cols);
    std::vector<std::uint8_t> ok(rows * cols, 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = n(rng);
        if (drop(rng)) ok[i] = 0;
    }
    return ChangeGrid(rows, cols, v, ok, GridRegistration{});
}

struct Fixture {
    ChangeGrid src, tgt;
    SpatialGraph graph;
    std::vector<LinkagePath> paths;
};

Fixture make_fixture(std::uint64_t seed) {
    Fixture f{random_grid(24, 24, seed, 0.1), random_grid(24, 24, seed + 1, 0.1), {}, {}};
    const auto w = f.src.full_window();
    const auto sb = compute_threshold_bands(f.src, ChangeOrientation::LossNegative);
    const auto tb = compute_threshold_bands(f.tgt, ChangeOrientation::LossNegative);
    auto s = classify_cells(f.src, sb, BandName::Moderate, NodeKind::Source, w,
                            ChangeOrientation::LossNegative, CellSelection::TwoSided);
    auto t = classify_cells(f.tgt, tb, BandName::Moderate, NodeKind::Target, w,
                            ChangeOrientation::LossNegative, CellSelection::TwoSided);
    // Keep the two sides apart so no cell is in both sets.
    std::erase_if(s.cells, [](const Cell& c) { return c.col % 2 == 1; });
    std::erase_if(t.cells, [](const Cell& c) { return c.col % 2 == 0; });
    GraphParams p;
    p.d_max = 6.0;
    p.source_filter = {sb, BandName::Moderate, ChangeOrientation::LossNegative, CellSelection::TwoSided};
    p.target_filter = {tb, BandName::Moderate, ChangeOrientation::LossNegative, CellSelection::TwoSided};
    f.graph = build_graph(s, t, p);
    f.paths = extract_all_paths(f.graph, 4);
    return f;
}

// Score of a path when node values are read from the given grids.
double rescore(const SpatialGraph& g, const LinkagePath& path, const ChangeGrid& src, const ChangeGrid& tgt) {
    int pos = 0;
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        const auto& a = g.nodes()[path.nodes[i]];
        const auto& b = g.nodes()[path.nodes[i + 1]];
        auto read = [&](const GraphNode& n) {
            const auto& grid = n.kind == NodeKind::Target ? tgt : src;
            return NodeAttr{grid.value(n.row, n.col), false};
        };
        pos += positive_link(g.params(), a.kind, read(a), b.kind, read(b));
    }
    return double(pos) / double(path.nodes.size() - 1);
}

}  // namespace

TEST_CASE("p-value examples") {
    CHECK(p_value_from_count(0, 999) == doctest::Approx(0.001));
    CHECK(p_value_from_count(4, 99) == doctest::Approx(0.05));
    CHECK(p_value_from_count(999, 999) == 1.0);
    NullDistribution null{{0.1, 0.5, 0.5, 0.9}};
    CHECK(p_value(0.5, null) == doctest::Approx(4.0 / 5.0));
    CHECK(p_value(1.0, null) == doctest::Approx(1.0 / 5.0));
    CHECK(p_value(0.0, null) == 1.0);
}

TEST_CASE("p-values are uniform when observed and null share a distribution") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> ps;
    for (int t = 0; t < 2000; ++t) {
        NullDistribution null;
        for (int i = 0; i < 199; ++i) null.scores.push_back(u(rng));
        ps.push_back(p_value(u(rng), null));
    }
    std::nth_element(ps.begin(), ps.begin() + 1000, ps.end());
    CHECK(ps[1000] == doctest::Approx(0.5).epsilon(0.1));
    const auto below = std::count_if(ps.begin(), ps.end(), [](double p) { return p <= 0.05; });
    CHECK(below >= 60);
    CHECK(below <= 140);
}

TEST_CASE("filter_significant uses a strict threshold") {
    std::vector<LinkagePath> paths(3);
    paths[0].nodes = {0};
    paths[1].nodes = {1};
    paths[2].nodes = {2};
    std::vector<SignificanceResult> r(3);
    r[0].p_value = 0.01;
    r[1].p_value = 0.05;
    r[2].p_value = 0.049;
    const auto kept = filter_significant(paths, r, 0.05);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].nodes[0] == 0);
    CHECK(kept[1].nodes[0] == 2);
}

TEST_CASE("permute_fields preserves the value multiset inside the window") {
    const auto a = random_grid(10, 12, 3, 0.2);
    const auto b = random_grid(10, 12, 4, 0.2);
    const RegionWindow w{2, 7, 3, 9};
    const auto [pa, pb] = permute_fields(a, b, w, 77);
    auto collect = [&](const ChangeGrid& g, bool inside) {
        std::vector<double> v;
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c)
                if (g.valid(r, c) && w.contains(r, c) == inside) v.push_back(g.value(r, c));
        std::sort(v.begin(), v.end());
        return v;
    };
    CHECK(collect(pa, true) == collect(a, true));
    CHECK(collect(pb, true) == collect(b, true));
    CHECK(collect(pa, false) == collect(a, false));
    CHECK(pa.valid_mask() == a.valid_mask());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (!w.contains(r, c)) CHECK(pa.value(r, c) == a.value(r, c));
    CHECK(pa.values() != a.values());

    const auto [qa, qb] = permute_fields(a, b, w, 77);
    CHECK(qa.values() == pa.values());
    CHECK(qb.values() == pb.values());

    const ChangeGrid one(1, 1, {2.5});
    const auto [oa, ob] = permute_fields(one, one, one.full_window(), 5);
    CHECK(oa.value(0, 0) == 2.5);
}

TEST_CASE("window null matches a recomputation from permuted grids") {
    const auto f = make_fixture(11);
    REQUIRE(f.paths.size() >= 5);
    NullContext ctx{&f.graph, NullScope::Window, &f.src, &f.tgt, nullptr, std::nullopt};
    SignificanceOptions opt;
    opt.replicates = 60;
    opt.seeds.base_seed = 9;
    const auto results = test_paths(ctx, f.paths, opt);
    REQUIRE(results.size() == f.paths.size());

    std::vector<std::size_t> exceed(f.paths.size(), 0);
    std::vector<double> sum(f.paths.size(), 0.0);
    for (std::size_t i = 0; i < opt.replicates; ++i) {
        const auto [ps, pt] = permute_fields(f.src, f.tgt, f.src.full_window(), opt.seeds.replicate_seed(i));
        for (std::size_t k = 0; k < f.paths.size(); ++k) {
            const double s = rescore(f.graph, f.paths[k], ps, pt);
            sum[k] += s;
            exceed[k] += s >= f.paths[k].score;
        }
    }
    for (std::size_t k = 0; k < f.paths.size(); ++k) {
        CHECK(results[k].path_index == k);
        CHECK(results[k].observed == f.paths[k].score);
        CHECK(results[k].p_value == doctest::Approx(double(1 + exceed[k]) / double(1 + opt.replicates)));
        CHECK(results[k].null_mean == doctest::Approx(sum[k] / double(opt.replicates)));
        CHECK(results[k].significant == (results[k].p_value < opt.alpha));
    }

    const auto single = null_scores(ctx, f.paths[0], opt);
    REQUIRE(single.m() == opt.replicates);
    CHECK(p_value(f.paths[0].score, single) == doctest::Approx(results[0].p_value));
}

TEST_CASE("node null keeps each kind's value multiset") {
    const auto f = make_fixture(21);
    REQUIRE(!f.paths.empty());
    NullContext ctx{&f.graph, NullScope::Nodes, nullptr, nullptr, nullptr, std::nullopt};
    SignificanceOptions opt;
    opt.replicates = 200;
    const auto r = test_paths(ctx, f.paths, opt);
    for (const auto& x : r) {
        CHECK(x.p_value >= 1.0 / 201.0);
        CHECK(x.p_value <= 1.0);
        CHECK(x.null_mean >= 0.0);
        CHECK(x.null_mean <= 1.0);
    }
}

TEST_CASE("one replicate gives p in {0.5, 1}") {
    const auto f = make_fixture(31);
    NullContext ctx{&f.graph, NullScope::Nodes, nullptr, nullptr, nullptr, std::nullopt};
    SignificanceOptions opt;
    opt.replicates = 1;
    for (const auto& r : test_paths(ctx, f.paths, opt))
        CHECK((r.p_value == 0.5 || r.p_value == 1.0));
}

TEST_CASE("constant field gives p = 1 everywhere") {
    const ChangeGrid src(6, 6, std::vector<double>(36, -1.5));
    const ChangeGrid tgt(6, 6, std::vector<double>(36, -1.5));
    ThresholdBands b;
    b.median = 1.0;
    b.q3 = 2.0;
    b.ub = 3.0;
    GraphParams p;
    p.source_filter = {b, BandName::Moderate, ChangeOrientation::LossNegative, CellSelection::TwoSided};
    p.target_filter = p.source_filter;
    CellSet s{NodeKind::Source, BandName::Moderate, {}}, t{NodeKind::Target, BandName::Moderate, {}};
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 6; ++c) (c < 3 ? s : t).cells.push_back({r, c, -1.5});
    const auto g = build_graph(s, t, p);
    const auto paths = extract_all_paths(g, 4);
    REQUIRE(!paths.empty());
    for (auto scope : {NullScope::Nodes, NullScope::Window}) {
        NullContext ctx{&g, scope, &src, &tgt, nullptr, std::nullopt};
        SignificanceOptions opt;
        opt.replicates = 50;
        for (const auto& r : test_paths(ctx, paths, opt)) {
            CHECK(r.p_value == 1.0);
            CHECK(r.null_mean == doctest::Approx(r.observed));
        }
    }
}

TEST_CASE("results do not depend on the thread count") {
    const auto f = make_fixture(41);
    for (auto scope : {NullScope::Nodes, NullScope::Window}) {
        NullContext ctx{&f.graph, scope, &f.src, &f.tgt, nullptr, std::nullopt};
        SignificanceOptions a;
        a.replicates = 199;
        auto b = a;
        b.threads = 8;
        const auto ra = test_paths(ctx, f.paths, a);
        const auto rb = test_paths(ctx, f.paths, b);
        REQUIRE(ra.size() == rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) {
            CHECK(ra[i].p_value == rb[i].p_value);
            CHECK(ra[i].null_mean == rb[i].null_mean);
        }
    }
}

TEST_CASE("shared null gives one distribution per kind sequence") {
    const auto f = make_fixture(51);
    NullContext ctx{&f.graph, NullScope::Window, &f.src, &f.tgt, nullptr, std::nullopt};
    SignificanceOptions opt;
    opt.replicates = 99;
    opt.shared_null = true;
    const auto r = test_paths(ctx, f.paths, opt);
    std::map<std::string, double> mean_by_key;
    for (std::size_t i = 0; i < f.paths.size(); ++i) {
        std::string key;
        for (auto n : f.paths[i].nodes) key += to_string(f.graph.nodes()[n].kind) + "/";
        auto [it, fresh] = mean_by_key.emplace(key, r[i].null_mean);
        if (!fresh) CHECK(it->second == r[i].null_mean);
    }
}

TEST_CASE("Benjamini-Hochberg adjustment") {
    const std::vector<double> p{0.01, 0.04, 0.03, 0.2};
    const auto adj = benjamini_hochberg(p);
    REQUIRE(adj.size() == 4);
    CHECK(adj[0] == doctest::Approx(0.04));
    CHECK(adj[1] == doctest::Approx(0.04 * 4 / 3));
    CHECK(adj[2] == doctest::Approx(0.04 * 4 / 3));
    CHECK(adj[3] == doctest::Approx(0.2));
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(adj[i] >= p[i]);
}

TEST_CASE("replicate seeds are distinct") {
    SeedPolicy s;
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(s.replicate_seed(i));
    CHECK(seen.size() == 10000);
    CHECK(parse_null_scope(to_string(NullScope::Window)) == NullScope::Window);
}
