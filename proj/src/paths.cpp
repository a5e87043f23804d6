#include "spatial_link/paths.hpp"

#include "spatial_link/error.hpp"
#include "spatial_link/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace spatial_link {

namespace {

[[noreturn]] void explode(std::size_t cap) {
    throw Error(module::path_extraction, ErrorCode::PathExplosion,
                "path enumeration exceeded the cap of " + std::to_string(cap) + " paths",
                "lower --max-len, choose a sparser band, or raise --cap");
}

struct FrontierEntry {
    std::size_t node;
    std::size_t parent;  // index into the previous level
};

}  // namespace

std::size_t LinkagePath::positive_edges() const noexcept {
    return static_cast<std::size_t>(std::count(edge_weights.begin(), edge_weights.end(), std::int8_t{1}));
}

std::uint32_t LinkageFrequencyRaster::max() const noexcept {
    return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

double path_score(std::span<const std::int8_t> w) noexcept {
    if (w.empty()) return 0.0;
    const auto pos = std::count(w.begin(), w.end(), std::int8_t{1});
    return static_cast<double>(pos) / static_cast<double>(w.size());
}

LinkagePath make_path(const SpatialGraph& graph, std::vector<std::size_t> nodes) {
    LinkagePath p;
    p.edge_weights.reserve(nodes.size() > 0 ? nodes.size() - 1 : 0);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const auto e = graph.find_edge(nodes[i - 1], nodes[i]);
        if (e == SpatialGraph::npos) {
            throw Error(module::path_extraction, ErrorCode::InvalidArgument,
                        "nodes " + std::to_string(nodes[i - 1]) + " and " + std::to_string(nodes[i]) +
                            " are not adjacent");
        }
        p.edge_weights.push_back(static_cast<std::int8_t>(graph.edges()[e].weight));
    }
    p.nodes = std::move(nodes);
    p.score = path_score(p.edge_weights);
    return p;
}

std::vector<LinkagePath> bfs_paths(const SpatialGraph& graph, std::size_t source, std::size_t max_nodes,
                                   const std::vector<bool>& is_target, std::size_t cap) {
    if (max_nodes < 2) {
        throw Error(module::path_extraction, ErrorCode::InvalidArgument, "maximum path length must be >= 2");
    }
    if (source >= graph.node_count() || is_target.size() != graph.node_count()) {
        throw Error(module::path_extraction, ErrorCode::InvalidArgument, "source or target set out of range");
    }
    if (is_target[source]) {
        throw Error(module::path_extraction, ErrorCode::InvalidArgument, "source node is itself a target");
    }

    std::vector<LinkagePath> found;
    std::vector<std::vector<FrontierEntry>> levels;
    levels.push_back({{source, 0}});

    auto on_path = [&](std::size_t level, std::size_t idx, std::size_t node) {
        for (std::size_t l = level + 1; l-- > 0;) {
            const auto& entry = levels[l][idx];
            if (entry.node == node) return true;
            idx = entry.parent;
        }
        return false;
    };
    auto emit = [&](std::size_t level, std::size_t idx, std::size_t last) {
        std::vector<std::size_t> nodes(level + 2);
        nodes[level + 1] = last;
        for (std::size_t l = level + 1; l-- > 0;) {
            nodes[l] = levels[l][idx].node;
            idx = levels[l][idx].parent;
        }
        found.push_back(make_path(graph, std::move(nodes)));
        if (found.size() > cap) explode(cap);
    };

    // levels[d] holds partial paths with d + 1 nodes, none ending at a target.
    for (std::size_t depth = 0; depth + 1 < max_nodes && !levels[depth].empty(); ++depth) {
        std::vector<FrontierEntry> next;
        const bool extend = depth + 2 < max_nodes;
        for (std::size_t i = 0; i < levels[depth].size(); ++i) {
            const auto tail = levels[depth][i].node;
            for (const auto& nb : graph.neighbors(tail)) {
                if (on_path(depth, i, nb.node)) continue;
                if (is_target[nb.node]) {
                    emit(depth, i, nb.node);
                } else if (extend) {
                    next.push_back({nb.node, i});
                    if (next.size() > cap) explode(cap);
                }
            }
        }
        levels.push_back(std::move(next));
    }
    return found;
}

std::vector<LinkagePath> extract_paths(const SpatialGraph& graph, std::span<const std::size_t> sources,
                                       const std::vector<bool>& is_target, std::size_t max_nodes,
                                       std::size_t cap, unsigned threads) {
    std::vector<std::vector<LinkagePath>> per_source(sources.size());
    std::atomic<std::size_t> total{0};
    parallel_chunks(sources.size(), threads, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t i = begin; i < end; ++i) {
            per_source[i] = bfs_paths(graph, sources[i], max_nodes, is_target, cap);
            if (total.fetch_add(per_source[i].size()) + per_source[i].size() > cap) explode(cap);
        }
    });
    std::vector<LinkagePath> all;
    all.reserve(total.load());
    for (auto& v : per_source)
        for (auto& p : v) all.push_back(std::move(p));
    std::sort(all.begin(), all.end(), [](const LinkagePath& a, const LinkagePath& b) { return a.nodes < b.nodes; });
    all.erase(std::unique(all.begin(), all.end(),
                          [](const LinkagePath& a, const LinkagePath& b) { return a.nodes == b.nodes; }),
              all.end());
    return all;
}

std::vector<LinkagePath> extract_all_paths(const SpatialGraph& graph, std::size_t max_nodes, std::size_t cap,
                                           unsigned threads) {
    std::vector<std::size_t> sources;
    std::vector<bool> is_target(graph.node_count(), false);
    for (const auto& n : graph.nodes()) {
        if (n.kind == NodeKind::Source) sources.push_back(n.id);
        if (n.kind == NodeKind::Target) is_target[n.id] = true;
    }
    return extract_paths(graph, sources, is_target, max_nodes, cap, threads);
}

LinkageFrequencyRaster linkage_frequency(const SpatialGraph& graph, std::span<const LinkagePath> paths,
                                         std::size_t rows, std::size_t cols) {
    LinkageFrequencyRaster raster{rows, cols, std::vector<std::uint32_t>(rows * cols, 0)};
    for (const auto& p : paths) {
        for (const auto id : p.nodes) {
            const auto& n = graph.nodes().at(id);
            if (n.row >= rows || n.col >= cols) {
                throw Error(module::path_extraction, ErrorCode::InvalidArgument,
                            "path cell lies outside the raster");
            }
            ++raster.counts[n.row * cols + n.col];
        }
    }
    return raster;
}

}  // namespace spatial_link
