#include "morphiris/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "morphiris/errors.hpp"

namespace morphiris {

double orient2d(Point2D a, Point2D b, Point2D c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double incircle(Point2D a, Point2D b, Point2D c, Point2D d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

Edge key(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

class Mesh {
public:
    Mesh(std::span<const Point2D> pts, double orient_eps, double incircle_eps)
        : pts_(pts), orient_eps_(orient_eps), incircle_eps_(incircle_eps) {}

    // Stores (a, b, c) counter-clockwise.
    void add(std::size_t a, std::size_t b, std::size_t c) {
        if (orient2d(pts_[a], pts_[b], pts_[c]) < 0) std::swap(b, c);
        const std::size_t id = tris_.size();
        tris_.push_back({a, b, c});
        alive_.push_back(true);
        for (int k = 0; k < 3; ++k) edges_[key(tris_[id][k], tris_[id][(k + 1) % 3])].push_back(id);
    }

    void flip_all() {
        std::vector<Edge> stack;
        for (const auto& [e, owners] : edges_) stack.push_back(e);
        while (!stack.empty()) {
            const Edge e = stack.back();
            stack.pop_back();
            auto it = edges_.find(e);
            if (it == edges_.end() || it->second.size() != 2) continue;
            const std::size_t t1 = it->second[0], t2 = it->second[1];
            const std::size_t c = opposite(t1, e), d = opposite(t2, e);
            // (a, b, c) counter-clockwise as stored in t1
            const auto [a, b] = directed(t1, e);
            if (incircle(pts_[a], pts_[b], pts_[c], pts_[d]) <= incircle_eps_) continue;
            // The quad is convex whenever d is inside the circle of (a,b,c);
            // still guard against numerically flat results.
            if (std::abs(orient2d(pts_[c], pts_[d], pts_[a])) <= orient_eps_ ||
                std::abs(orient2d(pts_[c], pts_[d], pts_[b])) <= orient_eps_)
                continue;
            remove(t1);
            remove(t2);
            add(c, d, a);
            add(d, c, b);
            for (const Edge& n : {key(a, c), key(c, b), key(b, d), key(d, a)}) stack.push_back(n);
        }
    }

    std::vector<Triangle> result() const {
        std::vector<Triangle> out;
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            if (!alive_[i]) continue;
            Triangle t{tris_[i]};
            std::sort(t.v.begin(), t.v.end());
            out.push_back(t);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::size_t opposite(std::size_t t, Edge e) const {
        for (auto v : tris_[t])
            if (v != e.first && v != e.second) return v;
        return tris_[t][0];
    }

    std::pair<std::size_t, std::size_t> directed(std::size_t t, Edge e) const {
        for (int k = 0; k < 3; ++k) {
            const auto u = tris_[t][k], w = tris_[t][(k + 1) % 3];
            if (key(u, w) == e) return {u, w};
        }
        return e;
    }

    void remove(std::size_t t) {
        alive_[t] = false;
        for (int k = 0; k < 3; ++k) {
            auto it = edges_.find(key(tris_[t][k], tris_[t][(k + 1) % 3]));
            auto& owners = it->second;
            owners.erase(std::find(owners.begin(), owners.end(), t));
            if (owners.empty()) edges_.erase(it);
        }
    }

    std::span<const Point2D> pts_;
    double orient_eps_;
    double incircle_eps_;
    std::vector<std::array<std::size_t, 3>> tris_;
    std::vector<bool> alive_;
    std::map<Edge, std::vector<std::size_t>> edges_;
};

}  // namespace

std::vector<Triangle> delaunay(std::span<const Point2D> points) {
    const std::size_t n = points.size();
    if (n < 3) throw MorphError("delaunay: need at least 3 points, got " + std::to_string(n));

    double extent = 0.0;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw MorphError("delaunay: non-finite point");
        extent = std::max({extent, std::abs(p.x - points[0].x), std::abs(p.y - points[0].y)});
    }
    if (!(extent > 0.0)) throw MorphError("delaunay: all points coincide");
    const double orient_eps = 1e-12 * extent * extent;
    const double incircle_eps = 1e-10 * extent * extent * extent * extent;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(points[a].x, points[a].y, a) < std::tie(points[b].x, points[b].y, b);
    });
    for (std::size_t i = 1; i < n; ++i)
        if (points[order[i]] == points[order[i - 1]])
            throw MorphError("delaunay: duplicate point at index " + std::to_string(order[i]));

    // Leading collinear run closed by the first point off its line.
    std::size_t k = 2;
    while (k < n && std::abs(orient2d(points[order[0]], points[order[1]], points[order[k]])) <= orient_eps) ++k;
    if (k == n) throw MorphError("delaunay: all points are collinear");

    Mesh mesh(points, orient_eps, incircle_eps);
    for (std::size_t i = 0; i + 1 < k; ++i) mesh.add(order[i], order[i + 1], order[k]);

    // Hull as a counter-clockwise cycle of point indices.
    std::vector<std::size_t> hull;
    if (orient2d(points[order[0]], points[order[k - 1]], points[order[k]]) > 0) {
        for (std::size_t i = 0; i < k; ++i) hull.push_back(order[i]);
        hull.push_back(order[k]);
    } else {
        hull.push_back(order[k]);
        for (std::size_t i = k; i-- > 0;) hull.push_back(order[i]);
    }

    for (std::size_t s = k + 1; s < n; ++s) {
        const std::size_t p = order[s];
        const std::size_t h = hull.size();
        std::vector<bool> visible(h);
        for (std::size_t e = 0; e < h; ++e)
            visible[e] = orient2d(points[hull[e]], points[hull[(e + 1) % h]], points[p]) < -orient_eps;

        // Visible edges form one circular run; find its start.
        std::size_t first = h;
        for (std::size_t e = 0; e < h; ++e)
            if (visible[e] && !visible[(e + h - 1) % h]) {
                first = e;
                break;
            }
        if (first == h) throw MorphError("delaunay: sweep found no visible hull edge");

        std::size_t count = 0;
        while (visible[(first + count) % h]) {
            const std::size_t e = (first + count) % h;
            mesh.add(hull[e], hull[(e + 1) % h], p);
            ++count;
        }

        // Replace the interior vertices of the visible chain with p.
        std::vector<std::size_t> next;
        next.reserve(h + 1);
        const std::size_t last_vertex = (first + count) % h;
        for (std::size_t i = 0; i < h; ++i) {
            const std::size_t v = (last_vertex + i) % h;
            next.push_back(hull[v]);
            if (v == first) break;
        }
        next.push_back(p);
        hull = std::move(next);
    }

    mesh.flip_all();
    return mesh.result();
}

}  // namespace morphiris
