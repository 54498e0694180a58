#include <algorithm>
#include <cmath>
#include <random>
#include <map>
#include <set>

#include "doctest.h"
#include "morphiris/errors.hpp"
#include "morphiris/pairs.hpp"
#include "morphiris/random.hpp"

using namespace morphiris;

namespace {

ManifestEntry entry(const std::string& subject, EyeSide side, double pupil, double iris = 80.0) {
    static int counter = 0;
    return {subject, side, subject + "_" + std::to_string(counter++) + ".pgm", pupil, iris};
}

DatasetManifest random_manifest(std::uint64_t seed, std::size_t subjects, std::size_t per_eye) {
    Rng rng(seed);
    DatasetManifest m;
    for (std::size_t s = 0; s < subjects; ++s)
        for (EyeSide side : {EyeSide::left, EyeSide::right})
            for (std::size_t k = 0; k < per_eye; ++k)
                m.entries.push_back(entry("S" + std::to_string(s), side, rng.uniform(20, 40), rng.uniform(72, 84)));
    return m;
}

void check_constraints(const DatasetManifest& m, const std::vector<MorphPair>& pairs) {
    for (const auto& p : pairs) {
        CHECK(m.entries[p.a].subject_id != m.entries[p.b].subject_id);
        CHECK(m.entries[p.a].eye_side == m.entries[p.b].eye_side);
    }
}

double gap(const DatasetManifest& m, const MorphPair& p) {
    return std::abs(m.entries[p.a].pupil_radius - m.entries[p.b].pupil_radius);
}

// Exhaustive greedy over all unused cross-subject pairs, both sides at once.
std::set<std::pair<std::size_t, std::size_t>> greedy_oracle(const DatasetManifest& m) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    std::vector<bool> used(m.entries.size(), false);
    for (;;) {
        double best = INFINITY;
        std::pair<std::size_t, std::size_t> pick{};
        for (std::size_t i = 0; i < m.entries.size(); ++i)
            for (std::size_t j = i + 1; j < m.entries.size(); ++j) {
                const auto &a = m.entries[i], &b = m.entries[j];
                if (used[i] || used[j] || a.subject_id == b.subject_id || a.eye_side != b.eye_side) continue;
                const double g = std::abs(a.pupil_radius - b.pupil_radius);
                if (g < best) {
                    best = g;
                    pick = {i, j};
                }
            }
        if (best == INFINITY) return out;
        used[pick.first] = used[pick.second] = true;
        out.insert(pick);
    }
}

}  // namespace

TEST_CASE("select_random examples") {
    DatasetManifest two;
    two.entries = {entry("A", EyeSide::left, 20), entry("B", EyeSide::left, 30)};
    const auto one = select_random(two, 1, 5);
    REQUIRE(one.size() == 1);
    CHECK(std::set<std::size_t>{one[0].a, one[0].b} == std::set<std::size_t>{0, 1});
    CHECK(one[0].strategy == PairStrategy::random);

    const auto m = random_manifest(3, 6, 2);
    CHECK(select_random(m, 20, 99) == select_random(m, 20, 99));
    CHECK(select_random(m, 20, 99) != select_random(m, 20, 100));
    CHECK(count_valid_pairs(m) == 2 * 60);
    CHECK_THROWS_AS(select_random(two, 2, 5), CapacityError);
    CHECK_THROWS_AS(select_random(m, 121, 5), CapacityError);
    const auto all = select_random(m, 120, 1);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& p : all) seen.insert(std::minmax(p.a, p.b));
    CHECK(seen.size() == 120);
    check_constraints(m, all);
}

TEST_CASE("select_random is close to uniform") {
    const auto m = random_manifest(4, 4, 1);
    std::map<std::pair<std::size_t, std::size_t>, int> hits;
    const int trials = 6000;
    for (int t = 0; t < trials; ++t) {
        const auto p = select_random(m, 1, static_cast<std::uint64_t>(t))[0];
        ++hits[std::minmax(p.a, p.b)];
    }
    CHECK(hits.size() == 12);
    for (const auto& [k, v] : hits) CHECK(std::abs(v - trials / 12) < 150);
}

TEST_CASE("select_by_radius examples") {
    DatasetManifest m;
    m.entries = {entry("A", EyeSide::left, 20), entry("B", EyeSide::left, 21), entry("C", EyeSide::left, 30)};
    const auto first = select_by_radius(m, 1);
    REQUIRE(first.size() == 1);
    CHECK(first[0].a == 0);
    CHECK(first[0].b == 1);
    CHECK(first[0].strategy == PairStrategy::radius);
    CHECK_THROWS_AS(select_by_radius(m, 2), CapacityError);

    DatasetManifest same;
    same.entries = {entry("A", EyeSide::left, 20), entry("A", EyeSide::left, 20.5), entry("B", EyeSide::left, 23)};
    const auto p = select_by_radius(same, 1)[0];
    CHECK(std::set<std::size_t>{p.a, p.b} == std::set<std::size_t>{1, 2});

    DatasetManifest tie;
    tie.entries = {entry("C", EyeSide::left, 10, 80), entry("A", EyeSide::left, 10, 80), entry("B", EyeSide::left, 10, 81)};
    const auto t1 = select_by_radius(tie, 1)[0];
    CHECK(std::set<std::size_t>{t1.a, t1.b} == std::set<std::size_t>{0, 1});
    CHECK(tie.entries[t1.a].subject_id == "A");
    CHECK(select_by_radius(tie, 1) == select_by_radius(tie, 1));
}

TEST_CASE("select_by_radius matches an exhaustive greedy oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = random_manifest(seed, 8, 2);
        const auto oracle = greedy_oracle(m);
        const auto pairs = select_by_radius(m, oracle.size());
        std::set<std::pair<std::size_t, std::size_t>> got;
        for (const auto& p : pairs) got.insert(std::minmax(p.a, p.b));
        CHECK(got == oracle);
        check_constraints(m, pairs);
        for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(gap(m, pairs[i - 1]) <= gap(m, pairs[i]));
        std::set<std::size_t> images;
        for (const auto& p : pairs) {
            CHECK(images.insert(p.a).second);
            CHECK(images.insert(p.b).second);
            CHECK(m.entries[p.a].pupil_radius <= m.entries[p.b].pupil_radius);
        }
        CHECK_THROWS_AS(select_by_radius(m, oracle.size() + 1), CapacityError);
    }
}

TEST_CASE("radius selection has smaller mean gap than random selection") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto m = random_manifest(seed, 20, 1);
        const auto rad = select_by_radius(m, 10);
        const auto rnd = select_random(m, 10, seed);
        double sr = 0, sn = 0;
        for (const auto& p : rad) sr += gap(m, p);
        for (const auto& p : rnd) sn += gap(m, p);
        CHECK(sr <= sn);
    }
}

TEST_CASE("manifest and pair list CSV") {
    auto m = random_manifest(9, 3, 1);
    const auto back = DatasetManifest::from_csv(m.to_csv());
    REQUIRE(back.entries.size() == m.entries.size());
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(back.entries[i].image_path == m.entries[i].image_path);
        CHECK(back.entries[i].pupil_radius == m.entries[i].pupil_radius);
    }
    CHECK(m.to_csv().rfind("subject_id,eye_side,image_path,pupil_radius,iris_radius\n", 0) == 0);
    const auto pairs = select_by_radius(m, 2);
    CHECK(pairs_from_csv(m, pairs_to_csv(m, pairs)) == pairs);
    CHECK(pairs_to_csv(m, pairs).rfind("pathA,pathB,strategy\n", 0) == 0);

    auto dup = m;
    dup.entries.push_back(dup.entries[0]);
    CHECK_THROWS_AS(dup.validate(), ParameterError);
    auto bad = m;
    bad.entries[0].pupil_radius = 100;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}
