#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "morphiris/errors.hpp"
#include "morphiris/segmentation.hpp"
#include "morphiris/synth.hpp"

using namespace morphiris;

namespace {

std::vector<Point2D> circle_points(Point2D c, double r, std::size_t n, double phase = 0.0) {
    std::vector<Point2D> pts;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        pts.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
    }
    return pts;
}

// Circumcircle from perpendicular bisectors, independent of the normal equations.
EllipseParams circumcircle(Point2D a, Point2D b, Point2D c) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
    const double ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    const double uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    return EllipseParams::circle(ux, uy, std::hypot(a.x - ux, a.y - uy));
}

LabelMask disk_mask(std::size_t w, std::size_t h, Point2D pc, double rp, Point2D ic, double ri) {
    LabelMask m(w, h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            if (std::hypot(x - pc.x, y - pc.y) <= rp)
                m.at(x, y) = Label::pupil;
            else if (std::hypot(x - ic.x, y - ic.y) <= ri)
                m.at(x, y) = Label::iris;
        }
    return m;
}

}  // namespace

TEST_CASE("fit_circle_lms on three points") {
    const std::vector<Point2D> pts{{0, 1}, {1, 0}, {0, -1}};
    const auto c = fit_circle_lms(pts);
    CHECK(std::abs(c.cx) < 1e-9);
    CHECK(std::abs(c.cy) < 1e-9);
    CHECK(std::abs(c.radius() - 1.0) < 1e-9);
    CHECK(c.r_min == c.r_max);
}

TEST_CASE("fit_circle_lms matches the circumcircle oracle on random triangles") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const Point2D a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        const double area = std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
        if (area < 100.0) continue;
        const std::vector<Point2D> pts{a, b, c};
        const auto fit = fit_circle_lms(pts);
        const auto ref = circumcircle(a, b, c);
        const double tol = 1e-9 * std::max(1.0, ref.radius());
        CHECK(std::abs(fit.cx - ref.cx) < tol * 10);
        CHECK(std::abs(fit.cy - ref.cy) < tol * 10);
        CHECK(std::abs(fit.radius() - ref.radius()) < tol * 10);
    }
}

TEST_CASE("fit_circle_lms is exact on noise-free samples") {
    const auto c = fit_circle_lms(circle_points({64, 64}, 30, 360));
    CHECK(std::abs(c.cx - 64) < 1e-6);
    CHECK(std::abs(c.cy - 64) < 1e-6);
    CHECK(std::abs(c.radius() - 30) < 1e-6);
}

TEST_CASE("fit_circle_lms under pixel noise") {
    std::mt19937 rng(23);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<double> center_err, radius_err;
    for (int trial = 0; trial < 100; ++trial) {
        auto pts = circle_points({64, 64}, 30, 360);
        for (auto& p : pts) p = p + Point2D{noise(rng), noise(rng)};
        const auto c = fit_circle_lms(pts);
        center_err.push_back(std::hypot(c.cx - 64, c.cy - 64));
        radius_err.push_back(std::abs(c.radius() - 30));
    }
    std::nth_element(center_err.begin(), center_err.begin() + 50, center_err.end());
    std::nth_element(radius_err.begin(), radius_err.begin() + 50, radius_err.end());
    CHECK(center_err[50] < 0.5);
    CHECK(radius_err[50] < 0.5);
}

TEST_CASE("fit_circle_lms failures") {
    CHECK_THROWS_AS(fit_circle_lms(std::vector<Point2D>{{0, 0}, {1, 1}}), FitError);
    CHECK_THROWS_AS(fit_circle_lms(std::vector<Point2D>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}), FitError);
    CHECK_THROWS_AS(fit_circle_lms(std::vector<Point2D>{{1, 1}, {1, 1}, {1, 1}}), FitError);
}

TEST_CASE("fit_circle_lms translation and rotation behaviour") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto pts = circle_points({10, -4}, 12, 40);
    for (auto& p : pts) p = p + Point2D{u(rng), u(rng)};
    const auto base = fit_circle_lms(pts);

    auto moved = pts;
    for (auto& p : moved) p = p + Point2D{37.5, -12.25};
    const auto t = fit_circle_lms(moved);
    CHECK(std::abs(t.cx - (base.cx + 37.5)) < 1e-9);
    CHECK(std::abs(t.cy - (base.cy - 12.25)) < 1e-9);
    CHECK(std::abs(t.radius() - base.radius()) < 1e-9);

    Point2D centroid{};
    for (const auto& p : pts) centroid = centroid + (1.0 / pts.size()) * p;
    const double a = 0.7;
    auto rotated = pts;
    for (auto& p : rotated) {
        const auto d = p - centroid;
        p = centroid + Point2D{std::cos(a) * d.x - std::sin(a) * d.y, std::sin(a) * d.x + std::cos(a) * d.y};
    }
    CHECK(std::abs(fit_circle_lms(rotated).radius() - base.radius()) < 1e-9);
}

TEST_CASE("segment_threshold on a rendered eye") {
    EyeRenderSpec s;
    s.identity_seed = 3;
    s.center = {158.3, 121.6};
    const auto mask = segment_threshold(render_eye(s).first);
    double sx = 0, sy = 0, n = 0;
    for (std::size_t y = 0; y < mask.height(); ++y)
        for (std::size_t x = 0; x < mask.width(); ++x)
            if (mask.at(x, y) == Label::pupil) {
                sx += x;
                sy += y;
                ++n;
            }
    CHECK(std::hypot(sx / n - s.center.x, sy / n - s.center.y) < 1.0);
}

TEST_CASE("segment_threshold failures and component filtering") {
    CHECK_THROWS_AS(segment_threshold(GrayImage(50, 50, 255)), SegmentationError);

    GrayImage img(100, 60, 100);
    for (std::size_t y = 0; y < 60; ++y)
        for (std::size_t x = 0; x < 100; ++x) {
            if (std::hypot(x - 25.0, y - 30.0) < 12) img.at(x, y) = 10;
            if (std::hypot(x - 75.0, y - 30.0) < 6) img.at(x, y) = 10;
        }
    const auto mask = segment_threshold(img);
    CHECK(mask.at(25, 30) == Label::pupil);
    CHECK(mask.at(75, 30) != Label::pupil);
}

TEST_CASE("geometry_from_mask on an exact concentric mask") {
    const auto g = geometry_from_mask(disk_mask(160, 160, {80, 80}, 20, {80, 80}, 50));
    CHECK(std::abs(g.pupil.radius() - 20) < 0.5);
    CHECK(std::abs(g.iris.radius() - 50) < 0.5);
    CHECK(std::hypot(g.pupil.cx - 80, g.pupil.cy - 80) < 0.5);
}

TEST_CASE("geometry_from_mask rejects a pupil outside the iris") {
    auto m = disk_mask(200, 120, {160, 60}, 10, {60, 60}, 40);
    CHECK_THROWS_AS(geometry_from_mask(m), GeometryError);
    try {
        geometry_from_mask(m);
    } catch (const GeometryError& e) {
        CHECK(std::abs(e.fitted().pupil.cx - 160) < 1.0);
    }
}

TEST_CASE("segmentation recovers synthetic ground truth across random specs") {
    DatasetOptions opt;
    opt.seed = 77;
    opt.max_occlusion = 0.3;
    double worst = 0.0;
    for (std::size_t k = 0; k < 50; ++k) {
        const auto spec = capture_spec(opt, k, k % 2 ? EyeSide::right : EyeSide::left, k);
        const auto [img, truth] = render_eye(spec);
        const auto g = geometry_from_mask(segment_threshold(img));
        worst = std::max({worst, std::abs(g.pupil.radius() - truth.pupil.radius()),
                          std::abs(g.iris.radius() - truth.iris.radius())});
    }
    CHECK(worst < 1.5);
}
