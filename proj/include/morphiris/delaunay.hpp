#pragma once

#include <array>
#include <span>
#include <vector>

#include "morphiris/image.hpp"

namespace morphiris {

/// Vertex indices into a point list, stored in ascending order.
struct Triangle {
    std::array<std::size_t, 3> v{};

    friend auto operator<=>(const Triangle&, const Triangle&) = default;
};

/// Twice the signed area of (a, b, c); positive when counter-clockwise in
/// x-right/y-up terms.
double orient2d(Point2D a, Point2D b, Point2D c);

/// Positive when d lies strictly inside the circumcircle of the
/// counter-clockwise triangle (a, b, c).
double incircle(Point2D a, Point2D b, Point2D c, Point2D d);

/// Delaunay triangulation of the convex hull. Built by an x-sorted sweep
/// followed by Lawson edge flips; an edge is flipped only when the opposite
/// vertex is inside the circumcircle by more than a relative tolerance, so
/// cocircular configurations keep the triangles the sweep produced (a
/// deterministic function of the point indices). Output is sorted.
/// Throws MorphError for fewer than 3 points, duplicates, or all collinear.
std::vector<Triangle> delaunay(std::span<const Point2D> points);

}  // namespace morphiris
