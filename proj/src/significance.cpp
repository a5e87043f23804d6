#include "spatial_link/significance.hpp"

#include "spatial_link/error.hpp"
#include "spatial_link/parallel.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace spatial_link {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t SeedPolicy::replicate_seed(std::uint64_t replicate) const noexcept {
    return splitmix64(base_seed + (replicate + 1) * 0x9E3779B97F4A7C15ull);
}

std::string to_string(NullScope s) { return s == NullScope::Nodes ? "nodes" : "window"; }

NullScope parse_null_scope(const std::string& s) {
    if (s == "nodes") return NullScope::Nodes;
    if (s == "window") return NullScope::Window;
    throw Error(module::significance, ErrorCode::InvalidArgument, "unknown null scope '" + s + "'");
}

std::string null_model_name(NullScope s) {
    return s == NullScope::Nodes ? "node-value-permutation/fixed-geometry"
                                 : "window-value-permutation/fixed-geometry";
}

namespace {

using Engine = std::mt19937_64;

std::vector<std::size_t> window_cells(const ChangeGrid& grid, const RegionWindow& w) {
    check_window(grid, w);
    std::vector<std::size_t> cells;
    for (std::size_t r = w.row_min; r <= w.row_max; ++r)
        for (std::size_t c = w.col_min; c <= w.col_max; ++c)
            if (grid.valid(r, c)) cells.push_back(grid.index(r, c));
    return cells;
}

void shuffled_identity(std::vector<std::size_t>& idx, std::size_t n, Engine& rng) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
}

// One exchangeable pool of node attributes. Slot j receives attrs[perm[j]].
struct Pool {
    std::vector<NodeAttr> attrs;
};

class ReplicateSampler {
public:
    struct Draw {
        std::vector<std::vector<std::size_t>> perm;  // per pool
    };

    explicit ReplicateSampler(const NullContext& ctx) : graph_(*ctx.graph) {
        const auto& nodes = graph_.nodes();
        pool_of_.assign(nodes.size(), kNone);
        slot_of_.assign(nodes.size(), kNone);

        if (ctx.scope == NullScope::Nodes) {
            // Pools: Source, Target, Neutral.
            pools_.resize(3);
            for (const auto& n : nodes) {
                const auto p = static_cast<std::size_t>(n.kind);
                pool_of_[n.id] = p;
                slot_of_[n.id] = pools_[p].attrs.size();
                pools_[p].attrs.push_back(graph_.attr(n.id));
            }
            return;
        }

        if (ctx.source == nullptr) {
            throw Error(module::significance, ErrorCode::InvalidArgument,
                        "window-scope null requires the source grid", "pass --source (and --target)");
        }
        const auto window = ctx.window.value_or(ctx.source->full_window());
        // Pool 0: source field (also Neutral nodes); pool 1: target field.
        pools_.resize(2);
        std::vector<std::vector<std::size_t>> cell_slot(2);
        const ChangeGrid* grids[2] = {ctx.source, ctx.target};
        for (std::size_t p = 0; p < 2; ++p) {
            if (grids[p] == nullptr) continue;
            const auto& g = *grids[p];
            if (ctx.anomaly_mask && p == 0 && !ctx.anomaly_mask->same_shape(g)) {
                throw Error(module::significance, ErrorCode::MaskDimMismatch,
                            "anomaly mask shape differs from the source grid");
            }
            cell_slot[p].assign(g.size(), kNone);
            for (const auto cell : window_cells(g, window)) {
                cell_slot[p][cell] = pools_[p].attrs.size();
                bool anomalous = false;
                if (p == 0 && ctx.anomaly_mask) {
                    const auto& m = *ctx.anomaly_mask;
                    anomalous = m.valid_mask()[cell] != 0 && m.values()[cell] != 0.0;
                }
                pools_[p].attrs.push_back({g.values()[cell], anomalous});
            }
        }
        for (const auto& n : nodes) {
            const std::size_t p = n.kind == NodeKind::Target ? 1 : 0;
            if (grids[p] == nullptr) {
                throw Error(module::significance, ErrorCode::InvalidArgument,
                            "window-scope null needs the " + std::string(p ? "target" : "source") + " grid");
            }
            const auto& g = *grids[p];
            if (n.row >= g.rows() || n.col >= g.cols() || cell_slot[p][g.index(n.row, n.col)] == kNone) {
                throw Error(module::significance, ErrorCode::InvalidArgument,
                            "graph node (" + std::to_string(n.row) + "," + std::to_string(n.col) +
                                ") is not a valid cell of the analysis window");
            }
            pool_of_[n.id] = p;
            slot_of_[n.id] = cell_slot[p][g.index(n.row, n.col)];
        }
    }

    void draw(std::uint64_t seed, Draw& d) const {
        Engine rng(seed);
        d.perm.resize(pools_.size());
        for (std::size_t p = 0; p < pools_.size(); ++p) shuffled_identity(d.perm[p], pools_[p].attrs.size(), rng);
    }

    NodeAttr attr(const Draw& d, std::size_t node) const {
        const auto p = pool_of_[node];
        return pools_[p].attrs[d.perm[p][slot_of_[node]]];
    }

    std::size_t positive_edges(const Draw& d, const LinkagePath& path) const {
        const auto& params = graph_.params();
        const auto& nodes = graph_.nodes();
        std::size_t plus = 0;
        NodeAttr prev = attr(d, path.nodes[0]);
        for (std::size_t i = 1; i < path.nodes.size(); ++i) {
            const NodeAttr cur = attr(d, path.nodes[i]);
            if (positive_link(params, nodes[path.nodes[i - 1]].kind, prev, nodes[path.nodes[i]].kind, cur)) ++plus;
            prev = cur;
        }
        return plus;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    const SpatialGraph& graph_;
    std::vector<Pool> pools_;
    std::vector<std::size_t> pool_of_;
    std::vector<std::size_t> slot_of_;
};

void check_context(const NullContext& ctx, std::size_t replicates) {
    if (ctx.graph == nullptr) {
        throw Error(module::significance, ErrorCode::InvalidArgument, "null context has no graph");
    }
    if (replicates < 1) {
        throw Error(module::significance, ErrorCode::InvalidArgument, "need at least one Monte Carlo replicate");
    }
}

void check_path(const LinkagePath& path) {
    if (path.nodes.size() < 2 || path.edge_weights.size() + 1 != path.nodes.size()) {
        throw Error(module::significance, ErrorCode::InvalidArgument, "path needs >= 2 nodes and matching weights");
    }
}

std::string kind_key(const SpatialGraph& g, const LinkagePath& p) {
    std::string key;
    key.reserve(p.nodes.size());
    for (auto id : p.nodes) key.push_back(static_cast<char>('0' + static_cast<int>(g.nodes()[id].kind)));
    return key;
}

}  // namespace

std::pair<ChangeGrid, ChangeGrid> permute_fields(const ChangeGrid& source, const ChangeGrid& target,
                                                 const RegionWindow& window, std::uint64_t seed) {
    Engine rng(seed);
    auto permute = [&](const ChangeGrid& g) {
        const auto cells = window_cells(g, window);
        std::vector<std::size_t> perm;
        shuffled_identity(perm, cells.size(), rng);
        auto values = g.values();
        for (std::size_t j = 0; j < cells.size(); ++j) values[cells[j]] = g.values()[cells[perm[j]]];
        return ChangeGrid(g.rows(), g.cols(), std::move(values), g.valid_mask(), g.registration());
    };
    auto s = permute(source);
    auto t = permute(target);
    return {std::move(s), std::move(t)};
}

double p_value_from_count(std::size_t exceed, std::size_t replicates) noexcept {
    return static_cast<double>(1 + exceed) / static_cast<double>(1 + replicates);
}

double p_value(double observed, const NullDistribution& null) {
    if (null.scores.empty()) {
        throw Error(module::significance, ErrorCode::InvalidArgument, "empty null distribution");
    }
    const auto exceed = static_cast<std::size_t>(
        std::count_if(null.scores.begin(), null.scores.end(), [&](double s) { return s >= observed; }));
    return p_value_from_count(exceed, null.scores.size());
}

NullDistribution null_scores(const NullContext& ctx, const LinkagePath& path, const SignificanceOptions& opt) {
    check_context(ctx, opt.replicates);
    check_path(path);
    const ReplicateSampler sampler(ctx);
    NullDistribution null;
    null.scores.assign(opt.replicates, 0.0);
    const double edges = static_cast<double>(path.nodes.size() - 1);
    parallel_chunks(opt.replicates, resolve_threads(opt.threads), [&](std::size_t begin, std::size_t end, unsigned) {
        ReplicateSampler::Draw d;
        for (std::size_t i = begin; i < end; ++i) {
            sampler.draw(opt.seeds.replicate_seed(i), d);
            null.scores[i] = static_cast<double>(sampler.positive_edges(d, path)) / edges;
        }
    });
    return null;
}

std::vector<SignificanceResult> test_paths(const NullContext& ctx, std::span<const LinkagePath> paths,
                                           const SignificanceOptions& opt) {
    check_context(ctx, opt.replicates);
    std::vector<SignificanceResult> results(paths.size());
    if (paths.empty()) return results;
    for (const auto& p : paths) check_path(p);

    // Which path's null each path reads.
    std::vector<std::size_t> rep(paths.size());
    std::vector<std::size_t> evaluated;
    if (opt.shared_null) {
        std::map<std::string, std::size_t> first;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            auto [it, inserted] = first.emplace(kind_key(*ctx.graph, paths[i]), i);
            if (inserted) evaluated.push_back(i);
            rep[i] = it->second;
        }
    } else {
        evaluated.resize(paths.size());
        std::iota(evaluated.begin(), evaluated.end(), std::size_t{0});
        rep = evaluated;
    }

    // Histogram of positive-edge counts per evaluated path, laid out flat.
    std::vector<std::size_t> offset(paths.size(), 0);
    std::size_t hist_size = 0;
    for (auto i : evaluated) {
        offset[i] = hist_size;
        hist_size += paths[i].nodes.size();  // edges + 1 bins
    }

    const ReplicateSampler sampler(ctx);
    const unsigned threads = resolve_threads(opt.threads);
    std::vector<std::vector<std::uint32_t>> partial(threads);
    parallel_chunks(opt.replicates, threads, [&](std::size_t begin, std::size_t end, unsigned chunk) {
        auto& hist = partial[chunk];
        hist.assign(hist_size, 0);
        ReplicateSampler::Draw d;
        for (std::size_t i = begin; i < end; ++i) {
            sampler.draw(opt.seeds.replicate_seed(i), d);
            for (auto p : evaluated) ++hist[offset[p] + sampler.positive_edges(d, paths[p])];
        }
    });
    std::vector<std::uint64_t> hist(hist_size, 0);
    for (const auto& h : partial)
        for (std::size_t k = 0; k < h.size(); ++k) hist[k] += h[k];

    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& path = paths[i];
        const std::size_t edges = path.nodes.size() - 1;
        const std::size_t obs_plus = path.positive_edges();
        const std::uint64_t* h = hist.data() + offset[rep[i]];
        std::uint64_t exceed = 0, plus_sum = 0;
        for (std::size_t k = 0; k <= edges; ++k) {
            if (k >= obs_plus) exceed += h[k];
            plus_sum += k * h[k];
        }
        auto& r = results[i];
        r.path_index = i;
        r.observed = path_score(path.edge_weights);
        r.p_value = p_value_from_count(exceed, opt.replicates);
        r.alpha = opt.alpha;
        r.null_mean = static_cast<double>(plus_sum) / (static_cast<double>(opt.replicates) * static_cast<double>(edges));
        r.significant = r.p_value < opt.alpha;
    }

    if (opt.benjamini_hochberg) {
        std::vector<double> ps(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) ps[i] = results[i].p_value;
        const auto adjusted = benjamini_hochberg(ps);
        for (std::size_t i = 0; i < results.size(); ++i) results[i].significant = adjusted[i] < opt.alpha;
    }
    return results;
}

std::vector<double> benjamini_hochberg(std::span<const double> p) {
    const std::size_t n = p.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> adjusted(n);
    double running = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const auto i = order[k];
        running = std::min(running, p[i] * static_cast<double>(n) / static_cast<double>(k + 1));
        adjusted[i] = running;
    }
    return adjusted;
}

std::vector<LinkagePath> filter_significant(std::span<const LinkagePath> paths,
                                            std::span<const SignificanceResult> results, double alpha) {
    if (paths.size() != results.size()) {
        throw Error(module::significance, ErrorCode::InvalidArgument, "one result per path is required");
    }
    std::vector<LinkagePath> kept;
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (results[i].p_value < alpha) kept.push_back(paths[i]);
    return kept;
}

}  // namespace spatial_link
