#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "morphiris/errors.hpp"
#include "morphiris/metrics.hpp"

using namespace morphiris;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rates by direct counting, dissimilarity polarity.
std::pair<double, double> sweep_rates(const ScoreSet& s, double t) {
    double fm = 0, fnm = 0;
    for (double v : s.nonmated) fm += v < t;
    for (double v : s.mated) fnm += !(v < t);
    return {fm / s.nonmated.size(), fnm / s.mated.size()};
}

std::vector<double> sweep_thresholds(const ScoreSet& s) {
    std::vector<double> t{-kInf, kInf};
    t.insert(t.end(), s.mated.begin(), s.mated.end());
    t.insert(t.end(), s.nonmated.begin(), s.nonmated.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

ScoreSet random_set(std::mt19937& rng, std::size_t n, bool coarse) {
    std::normal_distribution<double> m(0.3, 0.1), nm(0.45, 0.1);
    ScoreSet s;
    for (std::size_t i = 0; i < n; ++i) {
        double a = m(rng), b = nm(rng);
        if (coarse) {
            a = std::round(a * 20) / 20;
            b = std::round(b * 20) / 20;
        }
        s.mated.push_back(a);
        s.nonmated.push_back(b);
    }
    return s;
}

MorphAttackRecord random_record(std::mt19937& rng, std::size_t systems, std::size_t attempts) {
    std::uniform_real_distribution<double> u(0.0, 0.6);
    MorphAttackRecord r;
    r.morph_id = "m";
    r.attempts.resize(systems);
    for (auto& sys : r.attempts) {
        sys.resize(2);
        for (auto& subj : sys)
            for (std::size_t k = 0; k < attempts; ++k) subj.push_back(u(rng));
    }
    return r;
}

}  // namespace

TEST_CASE("d_prime closed forms") {
    CHECK(d_prime({{1, 2, 3}, {1, 2, 3}}) == 0.0);
    CHECK(d_prime({{-1, 1}, {2, 4}}) == doctest::Approx(3.0));
    CHECK(d_prime({{-1, 3}, {3, 7}}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(d_prime({{1}, {2, 3}}), MetricError);
}

TEST_CASE("d_prime is invariant under affine rescaling") {
    std::mt19937 rng(1);
    for (int t = 0; t < 20; ++t) {
        auto s = random_set(rng, 40, false);
        const double base = d_prime(s);
        for (auto* v : {&s.mated, &s.nonmated})
            for (auto& x : *v) x = 3.7 * x - 11.0;
        CHECK(std::abs(d_prime(s) - base) < 1e-9);
    }
}

TEST_CASE("det_points examples") {
    const ScoreSet s{{0.1, 0.2}, {0.8, 0.9}};
    const auto mid = rates_at(s, 0.5);
    CHECK(mid.fmr == 0.0);
    CHECK(mid.fnmr == 0.0);
    const auto det = det_points(s);
    CHECK(det.front().threshold == -kInf);
    CHECK(det.front().fmr == 0.0);
    CHECK(det.front().fnmr == 1.0);
    CHECK(det.back().threshold == kInf);
    CHECK(det.back().fmr == 1.0);
    CHECK(det.back().fnmr == 0.0);
    CHECK(det.size() == 6);

    ScoreSet sim{{0.9, 0.8}, {0.1, 0.2}, Polarity::similarity};
    const auto r = rates_at(sim, 0.5);
    CHECK(r.fmr == 0.0);
    CHECK(r.fnmr == 0.0);
    CHECK(rates_at(sim, -kInf).fmr == 1.0);
}

TEST_CASE("det_points agree with a threshold sweep") {
    std::mt19937 rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto s = random_set(rng, 25, t % 2);
        const auto det = det_points(s);
        const auto th = sweep_thresholds(s);
        REQUIRE(det.size() == th.size());
        for (std::size_t i = 0; i < det.size(); ++i) {
            const auto [fm, fnm] = sweep_rates(s, th[i]);
            CHECK(det[i].threshold == th[i]);
            CHECK(det[i].fmr == fm);
            CHECK(det[i].fnmr == fnm);
            if (i) CHECK(det[i].fmr >= det[i - 1].fmr);
        }
    }
}

TEST_CASE("eer examples") {
    CHECK(eer({{0.1, 0.2}, {0.8, 0.9}}).rate == 0.0);
    CHECK(eer({{1, 2, 3}, {1, 2, 3}}).rate == doctest::Approx(0.5));
    CHECK(eer({{1, 2, 3, 4}, {1, 2, 3, 4}}).rate == doctest::Approx(0.5));
}

TEST_CASE("eer agrees with an interpolating sweep") {
    std::mt19937 rng(3);
    for (int t = 0; t < 30; ++t) {
        const auto s = random_set(rng, 50, t % 3 == 0);
        const auto th = sweep_thresholds(s);
        double expected = -1;
        for (double x : th) {
            const auto [fm, fnm] = sweep_rates(s, x);
            if (fm == fnm) {
                expected = fm;
                break;
            }
        }
        if (expected < 0) {
            for (std::size_t i = 0; i + 1 < th.size(); ++i) {
                const auto [f0, n0] = sweep_rates(s, th[i]);
                const auto [f1, n1] = sweep_rates(s, th[i + 1]);
                if ((f0 - n0) < 0 && (f1 - n1) >= 0) {
                    const double w = (n0 - f0) / ((n0 - f0) + (f1 - n1));
                    expected = f0 + w * (f1 - f0);
                    break;
                }
            }
        }
        CHECK(std::abs(eer(s).rate - expected) < 1e-9);
    }
}

TEST_CASE("fnmr_at_fmr") {
    const ScoreSet sep{{0.1, 0.2}, {0.8, 0.9}};
    CHECK(fnmr_at_fmr(sep, 0.10).rate == 0.0);
    CHECK_THROWS_AS(fnmr_at_fmr(sep, 0.0), MetricError);
    CHECK_THROWS_AS(fnmr_at_fmr(sep, 1.0), MetricError);

    std::mt19937 rng(4);
    for (int t = 0; t < 30; ++t) {
        const auto s = random_set(rng, 50, t % 2);
        for (double target : {0.10, 0.05, 0.01}) {
            double best = 2.0;
            for (double x : sweep_thresholds(s)) {
                const auto [fm, fnm] = sweep_rates(s, x);
                if (fm <= target) best = std::min(best, fnm);
            }
            const auto op = fnmr_at_fmr(s, target);
            CHECK(op.rate == best);
            CHECK(sweep_rates(s, op.threshold).first <= target);
        }
    }
}

TEST_CASE("macer and bpcer") {
    CHECK(macer({{true, true, false, true}, {}}) == 0.25);
    CHECK(macer({{true, true}, {}}) == 0.0);
    CHECK(macer({{false, false}, {}}) == 1.0);
    CHECK(bpcer({{}, {false, false, true, false, false}}) == doctest::Approx(0.2));
    CHECK(bpcer({{}, {false}}) == 0.0);
    CHECK(bpcer({{}, {true, true}}) == 1.0);
    CHECK_THROWS_AS(macer({}), MetricError);
    CHECK_THROWS_AS(bpcer({}), MetricError);
}

TEST_CASE("bpcer_at_macer") {
    const std::vector<double> morph{0.8, 0.9, 0.95}, bona{0.1, 0.2};
    CHECK(bpcer_at_macer(morph, bona, 0.10).rate == 0.0);
    CHECK(bpcer_at_macer(morph, bona, 0.01).rate == 0.0);

    std::mt19937 rng(5);
    std::normal_distribution<double> m(0.6, 0.15), b(0.4, 0.15);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> ms(40), bs(60);
        for (auto& v : ms) v = m(rng);
        for (auto& v : bs) v = b(rng);
        for (double target : {0.10, 0.01}) {
            std::vector<double> cand{-kInf, kInf};
            cand.insert(cand.end(), ms.begin(), ms.end());
            cand.insert(cand.end(), bs.begin(), bs.end());
            double best_t = -kInf;
            for (double x : cand) {
                double missed = 0;
                for (double v : ms) missed += v < x;
                if (missed / ms.size() <= target) best_t = std::max(best_t, x);
            }
            double flagged = 0;
            for (double v : bs) flagged += v >= best_t;
            const auto op = bpcer_at_macer(ms, bs, target);
            CHECK(op.threshold == best_t);
            CHECK(op.rate == flagged / bs.size());
        }
    }
}

TEST_CASE("triplet_loss") {
    CHECK(triplet_loss(0.2, 0.9, 0.5) == 0.0);
    CHECK(triplet_loss(0.8, 0.3, 0.2) == doctest::Approx(0.7));
    for (double x : {0.0, 0.3, 7.0}) CHECK(triplet_loss(x, x, 0.0) == 0.0);
}

TEST_CASE("mmpmr examples") {
    MorphAttackRecord r{"m", {{{0.1, 0.5}, {0.2}}}};
    const std::vector<MorphAttackRecord> one{r};
    CHECK(mmpmr(one, 0.3, MmpmrVariant::minmax) == 1.0);
    MorphAttackRecord p{"p", {{{0.1, 0.2}, {0.1, 0.5}}}};
    const std::vector<MorphAttackRecord> two{p};
    CHECK(mmpmr(two, 0.3, MmpmrVariant::prodavg) == 0.5);
    MorphAttackRecord empty{"e", {{{0.1}, {}}}};
    const std::vector<MorphAttackRecord> bad{empty};
    CHECK_THROWS_AS(mmpmr(bad, 0.3, MmpmrVariant::minmax), MetricError);
    CHECK_THROWS_AS(mmpmr({}, 0.3, MmpmrVariant::minmax), MetricError);
}

TEST_CASE("mmpmr agrees with per-record evaluation and minmax dominates prodavg") {
    std::mt19937 rng(6);
    for (int t = 0; t < 20; ++t) {
        std::vector<MorphAttackRecord> recs;
        for (int k = 0; k < 20; ++k) recs.push_back(random_record(rng, 1, 3));
        for (double tau : {0.1, 0.25, 0.4}) {
            double mm = 0, pa = 0;
            for (const auto& r : recs) {
                const auto& a = r.attempts[0][0];
                const auto& b = r.attempts[0][1];
                mm += std::max(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end())) < tau;
                double ha = 0, hb = 0;
                for (double v : a) ha += v < tau;
                for (double v : b) hb += v < tau;
                pa += (ha / a.size()) * (hb / b.size());
            }
            const double got_mm = mmpmr(recs, tau, MmpmrVariant::minmax);
            const double got_pa = mmpmr(recs, tau, MmpmrVariant::prodavg);
            CHECK(got_mm == doctest::Approx(mm / recs.size()).epsilon(1e-12));
            CHECK(got_pa == doctest::Approx(pa / recs.size()).epsilon(1e-12));
            CHECK(got_mm >= got_pa);
        }
    }
}

TEST_CASE("rmmr") {
    CHECK(rmmr(0.90, 0.08) == doctest::Approx(0.98));
    CHECK(rmmr(1.0, 1.0) == 2.0);
}

TEST_CASE("map_matrix examples and enumeration oracle") {
    MorphAttackRecord r{"m", {{{0.1}, {0.2}}}};
    const std::vector<MorphAttackRecord> one{r};
    const std::vector<double> tau1{0.3};
    CHECK(map_matrix(one, tau1, 1) == std::vector<std::vector<double>>{{1.0}});

    std::mt19937 rng(7);
    const std::vector<double> taus{0.3, 0.35};
    for (int t = 0; t < 20; ++t) {
        std::vector<MorphAttackRecord> recs;
        for (int k = 0; k < 10; ++k) recs.push_back(random_record(rng, 2, 3));
        const auto map = map_matrix(recs, taus, 3);
        for (std::size_t i = 1; i <= 3; ++i)
            for (std::size_t j = 1; j <= 2; ++j) {
                double count = 0;
                for (const auto& rec : recs) {
                    std::size_t fooled = 0;
                    for (std::size_t s = 0; s < 2; ++s) {
                        bool every = true;
                        for (const auto& subj : rec.attempts[s]) {
                            std::size_t hits = 0;
                            for (double v : subj) hits += v < taus[s];
                            every = every && hits >= i;
                        }
                        fooled += every;
                    }
                    count += fooled >= j;
                }
                CHECK(map[i - 1][j - 1] == doctest::Approx(count / recs.size()).epsilon(1e-12));
                CHECK(map[0][0] >= map[i - 1][j - 1]);
                if (i > 1) CHECK(map[i - 2][j - 1] >= map[i - 1][j - 1]);
                if (j > 1) CHECK(map[i - 1][j - 2] >= map[i - 1][j - 1]);
            }
    }
    const std::vector<double> three{0.3, 0.3, 0.3};
    CHECK_THROWS_AS(map_matrix(one, three, 1), MetricError);
    CHECK_THROWS_AS(map_matrix(one, tau1, 0), MetricError);
}

TEST_CASE("det_csv") {
    const std::vector<DetPoint> pts{{0.5, 0.25, 0.75}};
    CHECK(det_csv(pts).rfind("threshold,fmr,fnmr\n", 0) == 0);
    CHECK(det_csv(pts).find("0.5,0.25,0.75") != std::string::npos);
}
