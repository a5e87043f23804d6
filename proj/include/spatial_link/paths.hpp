#pragma once

#include "spatial_link/graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace spatial_link {

struct LinkagePath {
    std::vector<std::size_t> nodes;        // Source ... Target, simple
    std::vector<std::int8_t> edge_weights;  // nodes.size() - 1 entries of +1/-1
    double score = 0.0;                     // fraction of +1 edges

    std::size_t length() const noexcept { return nodes.size(); }
    std::size_t positive_edges() const noexcept;

    bool operator==(const LinkagePath&) const = default;
};

struct LinkageFrequencyRaster {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> counts;  // row-major

    std::uint32_t at(std::size_t r, std::size_t c) const noexcept { return counts[r * cols + c]; }
    std::uint32_t max() const noexcept;
};

inline constexpr std::size_t kDefaultPathCap = 1'000'000;

double path_score(std::span<const std::int8_t> edge_weights) noexcept;

// Builds a LinkagePath for a node sequence, reading weights from the graph.
// Throws InvalidArgument when consecutive nodes are not adjacent.
LinkagePath make_path(const SpatialGraph& graph, std::vector<std::size_t> nodes);

// Every simple path from `source` with at most `max_nodes` nodes that ends at a
// node flagged in `is_target`; targets are never interior. Paths come out level
// by level, each level in the order its prefixes were found, with neighbours
// tried in ascending id order.
//
// Throws PathExplosion when more than `cap` paths (or partial paths held in one
// frontier) are produced.
std::vector<LinkagePath> bfs_paths(const SpatialGraph& graph, std::size_t source,
                                   std::size_t max_nodes, const std::vector<bool>& is_target,
                                   std::size_t cap = kDefaultPathCap);

// Union of bfs_paths over `sources`, sorted by node sequence.
std::vector<LinkagePath> extract_paths(const SpatialGraph& graph, std::span<const std::size_t> sources,
                                       const std::vector<bool>& is_target, std::size_t max_nodes,
                                       std::size_t cap = kDefaultPathCap, unsigned threads = 1);

// All Source -> Target paths of the graph.
std::vector<LinkagePath> extract_all_paths(const SpatialGraph& graph, std::size_t max_nodes,
                                           std::size_t cap = kDefaultPathCap, unsigned threads = 1);

LinkageFrequencyRaster linkage_frequency(const SpatialGraph& graph, std::span<const LinkagePath> paths,
                                         std::size_t rows, std::size_t cols);

}  // namespace spatial_link
