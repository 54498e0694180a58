#include "morphiris/segmentation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "morphiris/errors.hpp"

namespace morphiris {

namespace {

// Keeps the largest 4-connected component of `label`; the rest become
// background. Returns the size of the kept component.
std::size_t keep_largest_component(LabelMask& mask, Label label) {
    const std::size_t w = mask.width(), h = mask.height();
    std::vector<int> comp(w * h, -1);
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> stack;

    for (std::size_t start = 0; start < w * h; ++start) {
        if (comp[start] >= 0 || mask.labels()[start] != label) continue;
        const int id = static_cast<int>(sizes.size());
        std::size_t count = 0;
        stack.push_back(start);
        comp[start] = id;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++count;
            const std::size_t x = p % w, y = p / w;
            auto visit = [&](std::size_t q) {
                if (comp[q] < 0 && mask.labels()[q] == label) {
                    comp[q] = id;
                    stack.push_back(q);
                }
            };
            if (x > 0) visit(p - 1);
            if (x + 1 < w) visit(p + 1);
            if (y > 0) visit(p - w);
            if (y + 1 < h) visit(p + w);
        }
        sizes.push_back(count);
    }
    if (sizes.empty()) return 0;

    // First largest in raster order wins ties.
    const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t p = 0; p < w * h; ++p)
        if (mask.labels()[p] == label && comp[p] != best) mask.at(p % w, p / w) = Label::background;
    return sizes[static_cast<std::size_t>(best)];
}

}  // namespace

LabelMask segment_threshold(const GrayImage& img, Thresholds t) {
    if (!(t.pupil < t.iris)) throw ParameterError("segment_threshold: pupil threshold must be below iris threshold");
    LabelMask mask(img.width(), img.height());
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            const auto v = img.at(x, y);
            if (v < t.pupil)
                mask.at(x, y) = Label::pupil;
            else if (v < t.iris)
                mask.at(x, y) = Label::iris;
        }
    }
    if (keep_largest_component(mask, Label::pupil) == 0)
        throw SegmentationError("segmentation failed: no pupil component");
    if (keep_largest_component(mask, Label::iris) == 0)
        throw SegmentationError("segmentation failed: no iris component");
    return mask;
}

EllipseParams fit_circle_lms(std::span<const Point2D> points) {
    if (points.size() < 3) throw FitError("circle fit needs at least 3 points, got " + std::to_string(points.size()));

    // Work in centred, unit-RMS coordinates so the normal matrix is well
    // conditioned regardless of where the points sit in the image.
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    const double n = static_cast<double>(points.size());
    mx /= n;
    my /= n;
    double scale = 0.0;
    for (const auto& p : points) scale += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    scale = std::sqrt(scale / n);
    if (!(scale > 0.0)) throw FitError("circle fit: all points coincide");

    // Rows [u v 1] · [D E F]ᵀ = -(u² + v²)
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const auto& p : points) {
        const double u = (p.x - mx) / scale, v = (p.y - my) / scale;
        const Eigen::Vector3d row(u, v, 1.0);
        normal += row * row.transpose();
        rhs -= row * (u * u + v * v);
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal, Eigen::EigenvaluesOnly);
    const Eigen::Vector3d ev = eig.eigenvalues();
    if (!(ev(0) > 1e-10 * ev(2))) throw FitError("circle fit: points are collinear (singular normal matrix)");

    const Eigen::Vector3d sol = normal.ldlt().solve(rhs);
    const double cu = -sol(0) / 2.0, cv = -sol(1) / 2.0;
    const double r2 = cu * cu + cv * cv - sol(2);
    if (!(r2 > 0.0)) throw FitError("circle fit: negative squared radius");
    const double r = std::sqrt(r2) * scale;
    return EllipseParams::circle(mx + cu * scale, my + cv * scale, r);
}

std::vector<Point2D> region_boundary(const LabelMask& mask, std::span<const Label> region) {
    auto inside = [&](std::size_t x, std::size_t y) {
        return std::find(region.begin(), region.end(), mask.at(x, y)) != region.end();
    };
    std::vector<Point2D> out;
    const std::size_t w = mask.width(), h = mask.height();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (!inside(x, y)) continue;
            const double fx = static_cast<double>(x), fy = static_cast<double>(y);
            if (x > 0 && !inside(x - 1, y)) out.push_back({fx - 0.5, fy});
            if (x + 1 < w && !inside(x + 1, y)) out.push_back({fx + 0.5, fy});
            if (y > 0 && !inside(x, y - 1)) out.push_back({fx, fy - 0.5});
            if (y + 1 < h && !inside(x, y + 1)) out.push_back({fx, fy + 0.5});
        }
    }
    return out;
}

namespace {

EllipseParams robust_circle(std::vector<Point2D> points) {
    constexpr double kMinTolerance = 2.0;
    constexpr int kRounds = 3;
    auto fit = fit_circle_lms(points);
    for (int round = 0; round < kRounds; ++round) {
        std::vector<double> residuals;
        residuals.reserve(points.size());
        for (const auto& p : points) residuals.push_back(std::abs(std::hypot(p.x - fit.cx, p.y - fit.cy) - fit.r_max));
        auto sorted = residuals;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double tol = std::max(kMinTolerance, 3.0 * sorted[sorted.size() / 2]);

        std::vector<Point2D> kept;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (residuals[i] <= tol) kept.push_back(points[i]);
        if (kept.size() == points.size() || kept.size() < 3) break;
        points = std::move(kept);
        fit = fit_circle_lms(points);
    }
    return fit;
}

}  // namespace

IrisGeometry geometry_from_mask(const LabelMask& mask) {
    const Label pupil_only[] = {Label::pupil};
    const Label iris_region[] = {Label::pupil, Label::iris};

    const auto pupil_pts = region_boundary(mask, pupil_only);
    const auto iris_pts = region_boundary(mask, iris_region);
    const auto labels = mask.labels();
    if (std::find(labels.begin(), labels.end(), Label::iris) == labels.end())
        throw SegmentationError("geometry: mask has no iris pixels");
    if (pupil_pts.empty()) throw SegmentationError("geometry: mask has no pupil boundary");
    if (iris_pts.empty()) throw SegmentationError("geometry: mask has no iris boundary");

    IrisGeometry g;
    g.pupil = robust_circle(pupil_pts);
    g.iris = robust_circle(iris_pts);
    g.validate();
    return g;
}

}  // namespace morphiris
