#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "morphiris/delaunay.hpp"
#include "morphiris/geometry.hpp"
#include "morphiris/image.hpp"

namespace morphiris {

/// 76 correspondence points: 0..35 pupil boundary and 36..71 iris boundary
/// at 0, 10, ..., 350 degrees, then the four image corners (top-left,
/// top-right, bottom-left, bottom-right).
struct LandmarkSet {
    static constexpr std::size_t kPerRing = 36;
    static constexpr std::size_t kCount = 2 * kPerRing + 4;

    std::array<Point2D, kCount> points{};

    friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
};

/// Row-major 3x3 with last row fixed at (0, 0, 1).
struct AffineTransform {
    std::array<double, 6> m{1, 0, 0, 0, 1, 0};

    Point2D apply(Point2D p) const { return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]}; }
    double at(std::size_t row, std::size_t col) const;
    static AffineTransform identity() { return {}; }
};

struct MorphResult {
    GrayImage morph;
    LandmarkSet avg_landmarks;
    double alpha = 0.5;
    std::string parent_a;
    std::string parent_b;
};

/// Throws MorphError when the iris does not fit inside width x height.
LandmarkSet generate_landmarks(const IrisGeometry& geom, std::size_t width, std::size_t height);

/// T with T·src_i = dst_i, i.e. T = A·X⁻¹ for homogeneous column matrices.
/// Throws MorphError when the source triangle is degenerate.
AffineTransform affine_from_triangles(const std::array<Point2D, 3>& src, const std::array<Point2D, 3>& dst);

/// Piecewise-affine inverse warp of img from src_lm onto the dst_lm shape.
/// `triangles` index the landmark sets and must triangulate dst_lm; pixels
/// on shared edges go to the first triangle in list order.
GrayImage warp_to_shape(const GrayImage& img, const LandmarkSet& src_lm, const LandmarkSet& dst_lm,
                        std::span<const Triangle> triangles);

/// Per-pixel alpha·a + (1-alpha)·b, rounded half up.
GrayImage blend(const GrayImage& a, const GrayImage& b, double alpha);

/// alpha-weighted mean of two landmark sets.
LandmarkSet average_landmarks(const LandmarkSet& a, const LandmarkSet& b, double alpha);

MorphResult morph_pair(const GrayImage& img_a, const IrisGeometry& geom_a, const GrayImage& img_b,
                       const IrisGeometry& geom_b, double alpha = 0.5, const std::string& id_a = "A",
                       const std::string& id_b = "B");

/// M_<idA>_<idB>_<alpha>.pgm with alpha printed to two decimals.
std::string morph_file_name(const std::string& id_a, const std::string& id_b, double alpha);

}  // namespace morphiris
