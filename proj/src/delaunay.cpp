#include "spatial_link/delaunay.hpp"

#include "spatial_link/error.hpp"

#include <algorithm>
#include <numeric>

namespace spatial_link {

std::int64_t orient2d(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

__int128 incircle_exact(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c,
                        const LatticePoint& d) {
    const __int128 adx = a.x - d.x, ady = a.y - d.y;
    const __int128 bdx = b.x - d.x, bdy = b.y - d.y;
    const __int128 cdx = c.x - d.x, cdy = c.y - d.y;
    const __int128 alift = adx * adx + ady * ady;
    const __int128 blift = bdx * bdx + bdy * bdy;
    const __int128 clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
           clift * (adx * bdy - bdx * ady);
}

namespace {

// Guibas-Stolfi quad-edge structure. Edge record e holds four directed edges
// 4k..4k+3; rot advances by one quarter turn.
class QuadEdgeMesh {
public:
    explicit QuadEdgeMesh(std::span<const LatticePoint> pts) : pts_(pts) {}

    using E = std::size_t;

    static E rot(E e) { return (e & ~E{3}) | ((e + 1) & 3); }
    static E sym(E e) { return (e & ~E{3}) | ((e + 2) & 3); }
    static E rot_inv(E e) { return (e & ~E{3}) | ((e + 3) & 3); }

    E onext(E e) const { return next_[e]; }
    E oprev(E e) const { return rot(onext(rot(e))); }
    E lnext(E e) const { return rot(onext(rot_inv(e))); }
    E rprev(E e) const { return onext(sym(e)); }

    std::size_t org(E e) const { return org_[e]; }
    std::size_t dest(E e) const { return org_[sym(e)]; }

    E make_edge(std::size_t a, std::size_t b) {
        const E e = next_.size();
        next_.insert(next_.end(), {e, e + 3, e + 2, e + 1});
        org_.insert(org_.end(), {a, kNone, b, kNone});
        alive_.push_back(true);
        return e;
    }

    void splice(E a, E b) {
        const E alpha = rot(onext(a));
        const E beta = rot(onext(b));
        std::swap(next_[a], next_[b]);
        std::swap(next_[alpha], next_[beta]);
    }

    E connect(E a, E b) {
        const E e = make_edge(dest(a), org(b));
        splice(e, lnext(a));
        splice(sym(e), b);
        return e;
    }

    void remove(E e) {
        splice(e, oprev(e));
        splice(sym(e), oprev(sym(e)));
        alive_[e / 4] = false;
    }

    bool ccw(std::size_t a, std::size_t b, std::size_t c) const {
        return orient2d(pts_[a], pts_[b], pts_[c]) > 0;
    }
    bool right_of(std::size_t x, E e) const { return ccw(x, dest(e), org(e)); }
    bool left_of(std::size_t x, E e) const { return ccw(x, org(e), dest(e)); }

    // Perturbed in-circle test over point ranks (ranks are indices into the
    // sorted point array, so rank order is (x, y) order).
    bool in_circle(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        const __int128 det = incircle_exact(pts_[a], pts_[b], pts_[c], pts_[d]);
        if (det != 0) return det > 0;
        if (a == b || a == c || a == d || b == c || b == d || c == d) return false;
        // Coefficient of each point's lift perturbation in the 4x4 lifted determinant.
        std::array<std::pair<std::size_t, std::int64_t>, 4> terms{{
            {a, orient2d(pts_[b], pts_[c], pts_[d])},
            {b, -orient2d(pts_[a], pts_[c], pts_[d])},
            {c, orient2d(pts_[a], pts_[b], pts_[d])},
            {d, -orient2d(pts_[a], pts_[b], pts_[c])},
        }};
        std::sort(terms.begin(), terms.end());
        for (const auto& [rank, coef] : terms)
            if (coef != 0) return coef > 0;
        return false;
    }

    // Triangulates pts_[lo, hi). Returns (ccw hull edge out of leftmost point,
    // cw hull edge out of rightmost point).
    std::pair<E, E> build(std::size_t lo, std::size_t hi) {
        const std::size_t n = hi - lo;
        if (n == 2) {
            const E a = make_edge(lo, lo + 1);
            return {a, sym(a)};
        }
        if (n == 3) {
            const std::size_t s1 = lo, s2 = lo + 1, s3 = lo + 2;
            const E a = make_edge(s1, s2);
            const E b = make_edge(s2, s3);
            splice(sym(a), b);
            if (ccw(s1, s2, s3)) {
                connect(b, a);
                return {a, sym(b)};
            }
            if (ccw(s1, s3, s2)) {
                const E c = connect(b, a);
                return {sym(c), c};
            }
            return {a, sym(b)};
        }

        const std::size_t mid = lo + n / 2;
        auto [ldo, ldi] = build(lo, mid);
        auto [rdi, rdo] = build(mid, hi);

        // Lower common tangent.
        for (;;) {
            if (left_of(org(rdi), ldi)) {
                ldi = lnext(ldi);
            } else if (right_of(org(ldi), rdi)) {
                rdi = rprev(rdi);
            } else {
                break;
            }
        }

        E basel = connect(sym(rdi), ldi);
        if (org(ldi) == org(ldo)) ldo = sym(basel);
        if (org(rdi) == org(rdo)) rdo = basel;

        auto valid = [&](E e) { return right_of(dest(e), basel); };

        for (;;) {
            E lcand = onext(sym(basel));
            if (valid(lcand)) {
                while (in_circle(dest(basel), org(basel), dest(lcand), dest(onext(lcand)))) {
                    const E t = onext(lcand);
                    remove(lcand);
                    lcand = t;
                }
            }
            E rcand = oprev(basel);
            if (valid(rcand)) {
                while (in_circle(dest(basel), org(basel), dest(rcand), dest(oprev(rcand)))) {
                    const E t = oprev(rcand);
                    remove(rcand);
                    rcand = t;
                }
            }
            const bool lvalid = valid(lcand), rvalid = valid(rcand);
            if (!lvalid && !rvalid) break;
            if (!lvalid ||
                (rvalid && in_circle(dest(lcand), org(lcand), org(rcand), dest(rcand)))) {
                basel = connect(rcand, sym(basel));
            } else {
                basel = connect(sym(basel), sym(lcand));
            }
        }
        return {ldo, rdo};
    }

    std::size_t edge_records() const { return alive_.size(); }
    bool alive(std::size_t rec) const { return alive_[rec]; }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::span<const LatticePoint> pts_;
    std::vector<std::size_t> next_;
    std::vector<std::size_t> org_;
    std::vector<bool> alive_;
};

}  // namespace

Triangulation delaunay_triangulate(std::span<const LatticePoint> points) {
    Triangulation out;
    const std::size_t n = points.size();
    for (const auto& p : points) {
        if (p.x > kMaxLatticeCoordinate || p.x < -kMaxLatticeCoordinate ||
            p.y > kMaxLatticeCoordinate || p.y < -kMaxLatticeCoordinate) {
            throw Error(module::spatial_graph, ErrorCode::InvalidArgument,
                        "lattice coordinate out of supported range");
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return points[a] < points[b] || (points[a] == points[b] && a < b);
    });
    std::vector<LatticePoint> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = points[order[i]];
    for (std::size_t i = 1; i < n; ++i) {
        if (sorted[i] == sorted[i - 1]) {
            throw Error(module::spatial_graph, ErrorCode::DuplicatePoint,
                        "duplicate point (" + std::to_string(sorted[i].x) + "," +
                            std::to_string(sorted[i].y) + ")",
                        "each grid cell may appear once");
        }
    }
    if (n < 2) return out;

    QuadEdgeMesh mesh(sorted);
    mesh.build(0, n);

    auto to_input = [&](std::size_t rank) { return order[rank]; };
    for (std::size_t rec = 0; rec < mesh.edge_records(); ++rec) {
        if (!mesh.alive(rec)) continue;
        const auto e = rec * 4;
        auto u = to_input(mesh.org(e)), v = to_input(mesh.dest(e));
        if (u > v) std::swap(u, v);
        out.edges.push_back({u, v});
    }
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());

    // Each bounded face appears once per directed edge; keep it from the edge
    // with the smallest id.
    for (std::size_t rec = 0; rec < mesh.edge_records(); ++rec) {
        if (!mesh.alive(rec)) continue;
        for (const auto e : {rec * 4, QuadEdgeMesh::sym(rec * 4)}) {
            const auto e2 = mesh.lnext(e);
            const auto e3 = mesh.lnext(e2);
            if (mesh.lnext(e3) != e) continue;
            if (e2 < e || e3 < e) continue;
            const auto a = mesh.org(e), b = mesh.org(e2), c = mesh.org(e3);
            if (orient2d(sorted[a], sorted[b], sorted[c]) <= 0) continue;
            std::array<std::size_t, 3> tri{to_input(a), to_input(b), to_input(c)};
            // Rotate so the smallest input index comes first; orientation is kept.
            std::rotate(tri.begin(), std::min_element(tri.begin(), tri.end()), tri.end());
            out.triangles.push_back(tri);
        }
    }
    std::sort(out.triangles.begin(), out.triangles.end());
    return out;
}

}  // namespace spatial_link
