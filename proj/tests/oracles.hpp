#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Nothing here calls into the library's own algorithms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct P {
    std::int64_t x, y;
    bool operator<(const P& o) const { return std::pair{x, y} < std::pair{o.x, o.y}; }
    bool operator==(const P& o) const { return x == o.x && y == o.y; }
};

inline std::int64_t cross(const P& o, const P& a, const P& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Sign of |d - center|^2 - R^2 for the circumcircle of a, b, c, computed from
// the explicit circumcentre scaled by D = 2 * cross(a, b, c) (D != 0).
// Negative: d strictly inside.
inline int circumcircle_side(const P& a, const P& b, const P& c, const P& d) {
    using I = __int128;
    const I bx = b.x - a.x, by = b.y - a.y, cx = c.x - a.x, cy = c.y - a.y;
    const I D = 2 * (bx * cy - by * cx);
    const I b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    const I ux = cy * b2 - by * c2;  // centre * D, relative to a
    const I uy = bx * c2 - cx * b2;
    const I dx = (d.x - a.x) * D - ux, dy = (d.y - a.y) * D - uy;
    const I lhs = dx * dx + dy * dy;  // |d - centre|^2 * D^2
    const I rhs = ux * ux + uy * uy;  // R^2 * D^2
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

// Number of points on the convex hull boundary, collinear boundary points included.
inline std::size_t hull_boundary_count(std::vector<P> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const auto n = pts.size();
    if (n < 3) return n;
    bool collinear = true;
    for (std::size_t i = 2; i < n && collinear; ++i) collinear = cross(pts[0], pts[1], pts[i]) == 0;
    if (collinear) return n;
    std::vector<P> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) < 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) < 0) --k;
        hull[k++] = pts[i];
    }
    return k - 1;
}

// Every simple path that starts at a source, ends at the first target it
// meets and has at most L nodes, by plain recursive DFS over an adjacency matrix.
inline std::set<std::vector<std::size_t>> dfs_paths(const std::vector<std::vector<bool>>& adj,
                                                    const std::vector<int>& kind,  // 0 source, 1 target, 2 other
                                                    std::size_t L) {
    std::set<std::vector<std::size_t>> out;
    const auto n = adj.size();
    std::vector<std::size_t> stack;
    std::vector<bool> used(n, false);
    auto rec = [&](auto&& self, std::size_t u) -> void {
        for (std::size_t v = 0; v < n; ++v) {
            if (!adj[u][v] || used[v]) continue;
            if (stack.size() + 1 > L) continue;
            if (kind[v] == 1) {
                auto p = stack;
                p.push_back(v);
                out.insert(p);
                continue;
            }
            used[v] = true;
            stack.push_back(v);
            self(self, v);
            stack.pop_back();
            used[v] = false;
        }
    };
    for (std::size_t s = 0; s < n; ++s) {
        if (kind[s] != 0) continue;
        stack = {s};
        used.assign(n, false);
        used[s] = true;
        rec(rec, s);
    }
    return out;
}

inline double hypot_cells(double dr, double dc) { return std::sqrt(dr * dr + dc * dc); }

}  // namespace oracle
