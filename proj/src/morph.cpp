#include "morphiris/morph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "morphiris/errors.hpp"
#include "morphiris/normalization.hpp"

namespace morphiris {

double AffineTransform::at(std::size_t row, std::size_t col) const {
    if (row == 2) return col == 2 ? 1.0 : 0.0;
    return m[row * 3 + col];
}

LandmarkSet generate_landmarks(const IrisGeometry& geom, std::size_t width, std::size_t height) {
    geom.validate();
    const double maxx = static_cast<double>(width) - 1.0;
    const double maxy = static_cast<double>(height) - 1.0;
    const double ri = geom.iris.radius();
    if (geom.iris.cx - ri < 0.0 || geom.iris.cy - ri < 0.0 || geom.iris.cx + ri > maxx || geom.iris.cy + ri > maxy)
        throw MorphError("landmarks: iris " + to_string(geom.iris) + " extends beyond the " + std::to_string(width) +
                         "x" + std::to_string(height) + " image");

    LandmarkSet lm;
    for (std::size_t k = 0; k < LandmarkSet::kPerRing; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / LandmarkSet::kPerRing;
        lm.points[k] = boundary_point(geom.pupil, theta);
        lm.points[LandmarkSet::kPerRing + k] = boundary_point(geom.iris, theta);
    }
    const std::size_t c = 2 * LandmarkSet::kPerRing;
    lm.points[c + 0] = {0.0, 0.0};
    lm.points[c + 1] = {maxx, 0.0};
    lm.points[c + 2] = {0.0, maxy};
    lm.points[c + 3] = {maxx, maxy};
    return lm;
}

AffineTransform affine_from_triangles(const std::array<Point2D, 3>& src, const std::array<Point2D, 3>& dst) {
    const double area2 = orient2d(src[0], src[1], src[2]);
    if (!(std::abs(area2) > 2e-9)) throw MorphError("affine: degenerate source triangle");

    Eigen::Matrix3d x, a;
    for (int k = 0; k < 3; ++k) {
        x.col(k) << src[k].x, src[k].y, 1.0;
        a.col(k) << dst[k].x, dst[k].y, 1.0;
    }
    const Eigen::Matrix3d t = a * x.inverse();
    AffineTransform out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) out.m[r * 3 + c] = t(r, c);
    return out;
}

GrayImage warp_to_shape(const GrayImage& img, const LandmarkSet& src_lm, const LandmarkSet& dst_lm,
                        std::span<const Triangle> triangles) {
    const std::size_t w = img.width(), h = img.height();
    GrayImage out(w, h);
    std::vector<unsigned char> written(w * h, 0);

    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        std::array<Point2D, 3> s, d;
        for (int k = 0; k < 3; ++k) {
            if (tri.v[k] >= LandmarkSet::kCount) throw MorphError("warp: triangle index out of range");
            s[k] = src_lm.points[tri.v[k]];
            d[k] = dst_lm.points[tri.v[k]];
        }
        const double area2 = orient2d(d[0], d[1], d[2]);
        if (!(std::abs(area2) > 2e-9) || !(std::abs(orient2d(s[0], s[1], s[2])) > 2e-9))
            throw MorphError("warp: degenerate triangle #" + std::to_string(t) + " (" + std::to_string(tri.v[0]) +
                             "," + std::to_string(tri.v[1]) + "," + std::to_string(tri.v[2]) + ")");
        // Inverse map: destination pixel -> source position.
        const AffineTransform back = affine_from_triangles(d, s);

        const double minx = std::min({d[0].x, d[1].x, d[2].x}), maxx = std::max({d[0].x, d[1].x, d[2].x});
        const double miny = std::min({d[0].y, d[1].y, d[2].y}), maxy = std::max({d[0].y, d[1].y, d[2].y});
        const auto x0 = static_cast<std::size_t>(std::clamp(std::ceil(minx - 1e-7), 0.0, double(w - 1)));
        const auto x1 = static_cast<std::size_t>(std::clamp(std::floor(maxx + 1e-7), 0.0, double(w - 1)));
        const auto y0 = static_cast<std::size_t>(std::clamp(std::ceil(miny - 1e-7), 0.0, double(h - 1)));
        const auto y1 = static_cast<std::size_t>(std::clamp(std::floor(maxy + 1e-7), 0.0, double(h - 1)));
        const double eps = 1e-9 * std::abs(area2);

        for (std::size_t y = y0; y <= y1; ++y) {
            for (std::size_t x = x0; x <= x1; ++x) {
                if (written[y * w + x]) continue;
                const Point2D p{static_cast<double>(x), static_cast<double>(y)};
                // Same sign for all three edge functions (either winding).
                const double e0 = orient2d(d[0], d[1], p), e1 = orient2d(d[1], d[2], p), e2 = orient2d(d[2], d[0], p);
                const bool inside = area2 > 0 ? (e0 >= -eps && e1 >= -eps && e2 >= -eps)
                                              : (e0 <= eps && e1 <= eps && e2 <= eps);
                if (!inside) continue;
                out.at(x, y) = to_pixel(bilinear_sample(img, back.apply(p)));
                written[y * w + x] = 1;
            }
        }
    }

    const auto uncovered = std::count(written.begin(), written.end(), 0);
    if (uncovered > 0)
        throw MorphError("warp: " + std::to_string(uncovered) + " pixels not covered by the triangulation");
    return out;
}

GrayImage blend(const GrayImage& a, const GrayImage& b, double alpha) {
    if (a.width() != b.width() || a.height() != b.height()) throw MorphError("blend: image dimensions differ");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("blend: alpha must lie in [0, 1]");
    GrayImage out(a.width(), a.height());
    const auto pa = a.pixels(), pb = b.pixels();
    auto po = out.pixels();
    for (std::size_t i = 0; i < po.size(); ++i) po[i] = to_pixel(alpha * pa[i] + (1.0 - alpha) * pb[i]);
    return out;
}

LandmarkSet average_landmarks(const LandmarkSet& a, const LandmarkSet& b, double alpha) {
    LandmarkSet out;
    for (std::size_t i = 0; i < LandmarkSet::kCount; ++i) out.points[i] = alpha * a.points[i] + (1.0 - alpha) * b.points[i];
    return out;
}

MorphResult morph_pair(const GrayImage& img_a, const IrisGeometry& geom_a, const GrayImage& img_b,
                       const IrisGeometry& geom_b, double alpha, const std::string& id_a, const std::string& id_b) {
    auto annotate = [&](const std::string& what) { return "morph " + id_a + " x " + id_b + ": " + what; };
    if (img_a.width() != img_b.width() || img_a.height() != img_b.height())
        throw MorphError(annotate("parent images differ in size"));
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError(annotate("alpha must lie in [0, 1]"));

    try {
        const auto lm_a = generate_landmarks(geom_a, img_a.width(), img_a.height());
        const auto lm_b = generate_landmarks(geom_b, img_b.width(), img_b.height());
        const auto avg = average_landmarks(lm_a, lm_b, alpha);
        const auto tris = delaunay(avg.points);
        const auto warped_a = warp_to_shape(img_a, lm_a, avg, tris);
        const auto warped_b = warp_to_shape(img_b, lm_b, avg, tris);
        return {blend(warped_a, warped_b, alpha), avg, alpha, id_a, id_b};
    } catch (const MorphError& e) {
        throw MorphError(annotate(e.what()));
    } catch (const FitError& e) {
        throw MorphError(annotate(e.what()));
    }
}

std::string morph_file_name(const std::string& id_a, const std::string& id_b, double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", alpha);
    return "M_" + id_a + "_" + id_b + "_" + buf + ".pgm";
}

}  // namespace morphiris
