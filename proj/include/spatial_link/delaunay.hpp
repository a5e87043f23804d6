#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace spatial_link {

// Integer lattice point, (x, y) = (row, col) in grid-index units.
struct LatticePoint {
    std::int64_t x = 0;
    std::int64_t y = 0;

    auto operator<=>(const LatticePoint&) const = default;
};

struct IndexEdge {
    std::size_t u = 0;  // u < v, indices into the input point list
    std::size_t v = 0;

    auto operator<=>(const IndexEdge&) const = default;
};

struct Triangulation {
    std::vector<IndexEdge> edges;                       // sorted, unique
    std::vector<std::array<std::size_t, 3>> triangles;  // counter-clockwise, sorted
};

// Largest |coordinate| accepted; keeps the in-circle determinant inside int128.
inline constexpr std::int64_t kMaxLatticeCoordinate = std::int64_t{1} << 24;

// Exact orientation: > 0 when a, b, c turn counter-clockwise.
std::int64_t orient2d(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c);

// Exact in-circle determinant without perturbation: > 0 when d lies strictly
// inside the circle through a, b, c (a, b, c counter-clockwise).
__int128 incircle_exact(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c,
                        const LatticePoint& d);

// Delaunay triangulation by divide and conquer over exact integer predicates.
//
// Cocircular ties are broken by symbolic perturbation of the lifted coordinate:
// the point of rank k in (x, y) order is lifted by eps^(k+1). Among four
// cocircular points the lowest-ranked one is treated as lying just outside the
// circle of the other three. The result is a valid Delaunay triangulation of the
// unperturbed points and depends only on the point set.
//
// Fewer than three points, or all points collinear, yield the chain of
// consecutive points and no triangles. Throws Error{DuplicatePoint}.
Triangulation delaunay_triangulate(std::span<const LatticePoint> points);

}  // namespace spatial_link
