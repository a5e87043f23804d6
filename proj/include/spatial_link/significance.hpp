#pragma once

#include "spatial_link/graph.hpp"
#include "spatial_link/paths.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spatial_link {

// Per-replicate seeds: seed_i = splitmix64(base_seed + (i + 1) * golden gamma).
// splitmix64's finaliser is a bijection, so distinct replicates get distinct seeds.
struct SeedPolicy {
    std::uint64_t base_seed = 42;

    std::uint64_t replicate_seed(std::uint64_t replicate) const noexcept;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Which cells exchange values in a replicate.
//   Nodes:  values are shuffled among the graph nodes of the same kind, so the
//           graph itself is identical in every replicate.
//   Window: values of all valid cells inside the analysis window are shuffled,
//           independently per field.
enum class NullScope { Nodes, Window };

std::string to_string(NullScope s);
NullScope parse_null_scope(const std::string& s);
std::string null_model_name(NullScope s);

// Shuffles the values of the valid cells inside `window`, independently for the
// two grids (the source first, then the target, from one engine seeded by `seed`).
// Masks and geometry are untouched.
std::pair<ChangeGrid, ChangeGrid> permute_fields(const ChangeGrid& source, const ChangeGrid& target,
                                                 const RegionWindow& window, std::uint64_t seed);

struct NullDistribution {
    std::vector<double> scores;

    std::size_t m() const noexcept { return scores.size(); }
};

struct SignificanceResult {
    std::size_t path_index = 0;
    double observed = 0.0;
    double p_value = 1.0;
    bool significant = false;
    double alpha = 0.05;
    double null_mean = 0.0;
};

// Inputs shared by every replicate. For the Window scope `source` must be set;
// `target` is needed when the graph has Target nodes; `anomaly_mask` travels
// with the source values in the CMAD variant.
struct NullContext {
    const SpatialGraph* graph = nullptr;
    NullScope scope = NullScope::Nodes;
    const ChangeGrid* source = nullptr;
    const ChangeGrid* target = nullptr;
    const ChangeGrid* anomaly_mask = nullptr;
    std::optional<RegionWindow> window;  // defaults to the full grid
};

struct SignificanceOptions {
    std::size_t replicates = 999;
    SeedPolicy seeds{};
    double alpha = 0.05;
    unsigned threads = 1;
    bool shared_null = false;       // one null per kind sequence
    bool benjamini_hochberg = false;
};

// Add-one Monte Carlo p-value: (1 + #{null >= observed}) / (1 + M).
double p_value(double observed, const NullDistribution& null);
double p_value_from_count(std::size_t exceed, std::size_t replicates) noexcept;

// Score of `path` in each of M replicates; the path geometry never changes.
NullDistribution null_scores(const NullContext& ctx, const LinkagePath& path,
                             const SignificanceOptions& options);

// Tests every path against replicates shared across paths (replicate i uses the
// same permutation for all paths). Results are independent of options.threads.
std::vector<SignificanceResult> test_paths(const NullContext& ctx, std::span<const LinkagePath> paths,
                                           const SignificanceOptions& options);

// Step-up adjusted p-values, same order as the input.
std::vector<double> benjamini_hochberg(std::span<const double> p_values);

// Paths whose result has p_value < alpha, in input order.
std::vector<LinkagePath> filter_significant(std::span<const LinkagePath> paths,
                                            std::span<const SignificanceResult> results, double alpha);

}  // namespace spatial_link
