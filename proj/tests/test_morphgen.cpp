#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "morphiris/delaunay.hpp"
#include "morphiris/errors.hpp"
#include "morphiris/morph.hpp"
#include "morphiris/segmentation.hpp"
#include "morphiris/synth.hpp"
#include "test_support.hpp"

using namespace morphiris;

namespace {

double cross(Point2D o, Point2D a, Point2D b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Andrew's monotone chain; returns the hull area.
double hull_area(std::vector<Point2D> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2D a, Point2D b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::vector<Point2D> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    double a = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& p = hull[i];
        const auto& q = hull[(i + 1) % hull.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return std::abs(a) / 2.0;
}

// Squared circumradius test without orientation predicates.
bool strictly_inside_circumcircle(Point2D a, Point2D b, Point2D c, Point2D p) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
    const double ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    const double uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    const double r2 = (a.x - ux) * (a.x - ux) + (a.y - uy) * (a.y - uy);
    const double p2 = (p.x - ux) * (p.x - ux) + (p.y - uy) * (p.y - uy);
    return p2 < r2 * (1.0 - 1e-9);
}

// Solves the 6 affine unknowns by Cramer's rule on the 3x3 system per row.
std::array<double, 6> cramer_affine(const std::array<Point2D, 3>& s, const std::array<Point2D, 3>& d) {
    auto det3 = [](double a, double b, double c, double e, double f, double g, double h, double i, double j) {
        return a * (f * j - g * i) - b * (e * j - g * h) + c * (e * i - f * h);
    };
    const double D = det3(s[0].x, s[0].y, 1, s[1].x, s[1].y, 1, s[2].x, s[2].y, 1);
    std::array<double, 6> m{};
    for (int row = 0; row < 2; ++row) {
        const double r0 = row ? d[0].y : d[0].x, r1 = row ? d[1].y : d[1].x, r2 = row ? d[2].y : d[2].x;
        m[row * 3 + 0] = det3(r0, s[0].y, 1, r1, s[1].y, 1, r2, s[2].y, 1) / D;
        m[row * 3 + 1] = det3(s[0].x, r0, 1, s[1].x, r1, 1, s[2].x, r2, 1) / D;
        m[row * 3 + 2] = det3(s[0].x, s[0].y, r0, s[1].x, s[1].y, r1, s[2].x, s[2].y, r2) / D;
    }
    return m;
}

const IrisGeometry kGeom{EllipseParams::circle(160, 120, 25), EllipseParams::circle(160, 120, 70)};

}  // namespace

TEST_CASE("generate_landmarks layout") {
    const auto lm = generate_landmarks(kGeom, 320, 240);
    CHECK(lm.points[0].x == doctest::Approx(185.0));
    CHECK(lm.points[0].y == doctest::Approx(120.0));
    CHECK(lm.points[9].x == doctest::Approx(160.0));
    CHECK(lm.points[9].y == doctest::Approx(145.0));
    CHECK(lm.points[36].x == doctest::Approx(230.0));
    CHECK(lm.points[36 + 18].x == doctest::Approx(90.0));
    CHECK(lm.points[72] == Point2D{0, 0});
    CHECK(lm.points[73] == Point2D{319, 0});
    CHECK(lm.points[74] == Point2D{0, 239});
    CHECK(lm.points[75] == Point2D{319, 239});
    for (std::size_t k = 0; k < 36; ++k) {
        CHECK(std::hypot(lm.points[k].x - 160, lm.points[k].y - 120) == doctest::Approx(25.0));
        CHECK(std::hypot(lm.points[36 + k].x - 160, lm.points[36 + k].y - 120) == doctest::Approx(70.0));
    }
    const IrisGeometry too_big{EllipseParams::circle(60, 120, 25), EllipseParams::circle(60, 120, 70)};
    CHECK_THROWS_AS(generate_landmarks(too_big, 320, 240), MorphError);
}

TEST_CASE("delaunay small cases") {
    const std::vector<Point2D> tri{{0, 0}, {4, 0}, {1, 3}};
    const auto one = delaunay(tri);
    REQUIRE(one.size() == 1);
    CHECK(one[0].v == std::array<std::size_t, 3>{0, 1, 2});

    const std::vector<Point2D> square{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    const auto sq = delaunay(square);
    CHECK(sq.size() == 2);
    CHECK(delaunay(square) == sq);

    CHECK_THROWS_AS(delaunay(std::vector<Point2D>{{0, 0}, {1, 1}}), MorphError);
    CHECK_THROWS_AS(delaunay(std::vector<Point2D>{{0, 0}, {1, 1}, {2, 2}}), MorphError);
    CHECK_THROWS_AS(delaunay(std::vector<Point2D>{{0, 0}, {1, 0}, {1, 0}, {0, 1}}), MorphError);
}

TEST_CASE("delaunay on random point sets: empty circumcircles, hull coverage, Euler count") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Point2D> pts(10 + trial * 3);
        for (auto& p : pts) p = {u(rng), u(rng)};
        const auto tris = delaunay(pts);
        double area = 0.0;
        for (const auto& t : tris) {
            const auto a = pts[t.v[0]], b = pts[t.v[1]], c = pts[t.v[2]];
            area += std::abs(cross(a, b, c)) / 2.0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (i == t.v[0] || i == t.v[1] || i == t.v[2]) continue;
                CHECK_FALSE(strictly_inside_circumcircle(a, b, c, pts[i]));
            }
        }
        CHECK(area == doctest::Approx(hull_area(pts)).epsilon(1e-9));
        CHECK(std::is_sorted(tris.begin(), tris.end()));
    }
}

TEST_CASE("delaunay triangulates the landmark set") {
    const auto lm = generate_landmarks(kGeom, 320, 240);
    const auto tris = delaunay(lm.points);
    double area = 0.0;
    for (const auto& t : tris) area += std::abs(cross(lm.points[t.v[0]], lm.points[t.v[1]], lm.points[t.v[2]])) / 2.0;
    CHECK(area == doctest::Approx(319.0 * 239.0));
    std::set<std::size_t> used;
    for (const auto& t : tris) used.insert(t.v.begin(), t.v.end());
    CHECK(used.size() == LandmarkSet::kCount);
}

TEST_CASE("affine_from_triangles") {
    const std::array<Point2D, 3> s{{{0, 0}, {1, 0}, {0, 1}}};
    const auto id = affine_from_triangles(s, s);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(id.at(r, c) == doctest::Approx(r == c ? 1.0 : 0.0));

    const std::array<Point2D, 3> moved{{{5, 7}, {6, 7}, {5, 8}}};
    const auto t = affine_from_triangles(s, moved);
    CHECK(t.at(0, 2) == doctest::Approx(5.0));
    CHECK(t.at(1, 2) == doctest::Approx(7.0));

    const std::array<Point2D, 3> scaled{{{0, 0}, {2, 0}, {0, 3}}};
    const auto sc = affine_from_triangles(s, scaled);
    CHECK(sc.at(0, 0) == doctest::Approx(2.0));
    CHECK(sc.at(1, 1) == doctest::Approx(3.0));
    CHECK(sc.at(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 100; ++i) {
        std::array<Point2D, 3> a{}, b{};
        for (auto& p : a) p = {u(rng), u(rng)};
        for (auto& p : b) p = {u(rng), u(rng)};
        if (std::abs(cross(a[0], a[1], a[2])) < 1.0) continue;
        const auto tr = affine_from_triangles(a, b);
        const auto ref = cramer_affine(a, b);
        for (std::size_t k = 0; k < 6; ++k) CHECK(tr.m[k] == doctest::Approx(ref[k]).epsilon(1e-8));
        for (int k = 0; k < 3; ++k) {
            CHECK(tr.apply(a[k]).x == doctest::Approx(b[k].x));
            CHECK(tr.apply(a[k]).y == doctest::Approx(b[k].y));
        }
    }
    CHECK_THROWS_AS(affine_from_triangles({{{0, 0}, {1, 1}, {2, 2}}}, s), MorphError);
}

TEST_CASE("warp_to_shape identity and translation") {
    EyeRenderSpec spec;
    spec.identity_seed = 8;
    const auto [img, geom] = render_eye(spec);
    const auto lm = generate_landmarks(geom, img.width(), img.height());
    const auto tris = delaunay(lm.points);
    CHECK(warp_to_shape(img, lm, lm, tris) == img);

    // Shift every interior landmark by a whole pixel; corners stay put.
    auto shifted = lm;
    for (std::size_t k = 0; k < 72; ++k) shifted.points[k] = shifted.points[k] + Point2D{3, 0};
    const auto warped = warp_to_shape(img, lm, shifted, delaunay(shifted.points));
    for (std::size_t k = 0; k < 36; ++k) {
        const auto p = shifted.points[36 + k];
        const Point2D inner{0.5 * (p.x + shifted.points[k].x), 0.5 * (p.y + shifted.points[k].y)};
        const auto x = static_cast<std::size_t>(std::lround(inner.x)), y = static_cast<std::size_t>(std::lround(inner.y));
        CHECK(std::abs(int(warped.at(x, y)) - int(img.at(x - 3, y))) <= 1);
    }
}

TEST_CASE("blend") {
    const GrayImage a(4, 3, 200), b(4, 3, 100);
    CHECK(blend(a, b, 0.5) == GrayImage(4, 3, 150));
    CHECK(blend(a, b, 1.0) == a);
    CHECK(blend(a, b, 0.0) == b);
    CHECK(blend(GrayImage(1, 1, 1), GrayImage(1, 1, 0), 0.5).at(0, 0) == 1);
    CHECK_THROWS_AS(blend(a, GrayImage(3, 3), 0.5), MorphError);
    CHECK_THROWS_AS(blend(a, b, 1.5), ParameterError);
}

TEST_CASE("morph_pair self-morph, symmetry and geometry") {
    EyeRenderSpec sa, sb;
    sa.identity_seed = 1;
    sb.identity_seed = 2;
    sb.pupil_radius = 35;
    sb.iris_radius = 75;
    sb.center = {156, 123};
    const auto [ia, ga] = render_eye(sa);
    const auto [ib, gb] = render_eye(sb);

    CHECK(morph_pair(ia, ga, ia, ga).morph == ia);

    const auto ab = morph_pair(ia, ga, ib, gb, 0.5);
    const auto ba = morph_pair(ib, gb, ia, ga, 0.5);
    int max_diff = 0;
    for (std::size_t i = 0; i < ab.morph.pixels().size(); ++i)
        max_diff = std::max(max_diff, std::abs(int(ab.morph.pixels()[i]) - int(ba.morph.pixels()[i])));
    CHECK(max_diff <= 1);

    const auto g = geometry_from_mask(segment_threshold(ab.morph));
    CHECK(std::abs(g.pupil.radius() - 30.0) < 1.5);
    CHECK(std::abs(g.iris.radius() - 72.5) < 1.5);
    CHECK(morph_file_name("S001_L_0", "S002_L_0", 0.5) == "M_S001_L_0_S002_L_0_0.50.pgm");
    CHECK_THROWS_AS(morph_pair(ia, ga, GrayImage(10, 10), gb), MorphError);
}
