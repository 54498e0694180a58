#include "morphiris/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "morphiris/csv.hpp"
#include "morphiris/errors.hpp"
#include "morphiris/image.hpp"
#include "morphiris/random.hpp"

namespace morphiris {

namespace {
const std::vector<std::string> kManifestHeader = {"subject_id", "eye_side", "image_path", "pupil_radius",
                                                  "iris_radius"};
const std::vector<std::string> kPairsHeader = {"pathA", "pathB", "strategy"};

bool valid_pair(const ManifestEntry& a, const ManifestEntry& b) {
    return a.subject_id != b.subject_id && a.eye_side == b.eye_side;
}
}  // namespace

char side_code(EyeSide side) { return side == EyeSide::left ? 'L' : 'R'; }

EyeSide parse_side(std::string_view code) {
    if (code == "L") return EyeSide::left;
    if (code == "R") return EyeSide::right;
    throw FormatError("eye side must be L or R, got '" + std::string(code) + "'");
}

std::string to_string(PairStrategy s) { return s == PairStrategy::random ? "random" : "radius"; }

PairStrategy parse_strategy(std::string_view name) {
    if (name == "random") return PairStrategy::random;
    if (name == "radius") return PairStrategy::radius;
    throw FormatError("unknown pair strategy '" + std::string(name) + "'");
}

void DatasetManifest::validate() const {
    std::set<std::tuple<std::string, EyeSide, std::string>> seen;
    for (const auto& e : entries) {
        if (!(e.pupil_radius > 0.0) || !(e.pupil_radius < e.iris_radius))
            throw ParameterError("manifest entry " + e.image_path + ": need 0 < pupil_radius < iris_radius");
        if (e.image_path.find(',') != std::string::npos || e.subject_id.find(',') != std::string::npos)
            throw ParameterError("manifest fields may not contain commas: " + e.image_path);
        if (!seen.emplace(e.subject_id, e.eye_side, e.image_path).second)
            throw ParameterError("duplicate manifest entry " + e.subject_id + "/" + e.image_path);
    }
}

std::string DatasetManifest::to_csv() const {
    std::string out = "subject_id,eye_side,image_path,pupil_radius,iris_radius\n";
    for (const auto& e : entries) {
        out += e.subject_id + "," + side_code(e.eye_side) + "," + e.image_path + "," +
               csv::format_double(e.pupil_radius) + "," + csv::format_double(e.iris_radius) + "\n";
    }
    return out;
}

DatasetManifest DatasetManifest::from_csv(const std::string& text) {
    const auto table = csv::parse(text, kManifestHeader);
    DatasetManifest m;
    for (const auto& row : table.rows) {
        m.entries.push_back({row[0], parse_side(row[1]), row[2], csv::parse_double(row[3], "pupil_radius"),
                             csv::parse_double(row[4], "iris_radius")});
    }
    m.validate();
    return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) { return from_csv(read_text(path)); }

void DatasetManifest::save(const std::filesystem::path& path) const {
    validate();
    write_text(path, to_csv());
}

std::size_t count_valid_pairs(const DatasetManifest& manifest) {
    const auto& e = manifest.entries;
    std::size_t n = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = i + 1; j < e.size(); ++j)
            if (valid_pair(e[i], e[j])) ++n;
    return n;
}

std::vector<MorphPair> select_random(const DatasetManifest& manifest, std::size_t n_pairs, std::uint64_t seed) {
    const auto& e = manifest.entries;
    std::vector<MorphPair> all;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = i + 1; j < e.size(); ++j)
            if (valid_pair(e[i], e[j])) all.push_back({i, j, PairStrategy::random});

    if (n_pairs > all.size())
        throw CapacityError("requested " + std::to_string(n_pairs) + " random pairs but only " +
                                std::to_string(all.size()) + " valid pairs exist",
                            all.size());

    // Partial Fisher-Yates: the first n_pairs slots are a uniform sample.
    Rng rng(derive_seed(seed, {0x5e1ec7}));
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const std::size_t pick = k + rng.below(all.size() - k);
        std::swap(all[k], all[pick]);
    }
    all.resize(n_pairs);
    return all;
}

std::vector<MorphPair> select_by_radius(const DatasetManifest& manifest, std::size_t n_pairs) {
    const auto& e = manifest.entries;

    struct Candidate {
        double d_pupil;
        double d_iris;
        std::string subj_lo, subj_hi;
        std::size_t a, b;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = i + 1; j < e.size(); ++j) {
            if (!valid_pair(e[i], e[j])) continue;
            // a: smaller pupil radius, then smaller subject id
            auto [a, b] = std::tie(e[i].pupil_radius, e[i].subject_id) <= std::tie(e[j].pupil_radius, e[j].subject_id)
                              ? std::pair{i, j}
                              : std::pair{j, i};
            candidates.push_back({std::abs(e[i].pupil_radius - e[j].pupil_radius),
                                  std::abs(e[i].iris_radius - e[j].iris_radius),
                                  std::min(e[i].subject_id, e[j].subject_id), std::max(e[i].subject_id, e[j].subject_id),
                                  a, b});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
        return std::tie(x.d_pupil, x.d_iris, x.subj_lo, x.subj_hi, e[x.a].image_path, e[x.b].image_path) <
               std::tie(y.d_pupil, y.d_iris, y.subj_lo, y.subj_hi, e[y.a].image_path, e[y.b].image_path);
    });

    // Accepting in global gap order is the greedy closest-remaining match;
    // the two eye sides never compete for images so they interleave freely.
    std::vector<bool> used(e.size(), false);
    std::vector<MorphPair> out;
    for (const auto& c : candidates) {
        if (used[c.a] || used[c.b]) continue;
        used[c.a] = used[c.b] = true;
        out.push_back({c.a, c.b, PairStrategy::radius});
    }
    if (n_pairs > out.size())
        throw CapacityError("requested " + std::to_string(n_pairs) + " radius pairs but greedy matching yields only " +
                                std::to_string(out.size()),
                            out.size());
    out.resize(n_pairs);
    return out;
}

std::string pairs_to_csv(const DatasetManifest& manifest, const std::vector<MorphPair>& pairs) {
    std::string out = "pathA,pathB,strategy\n";
    for (const auto& p : pairs)
        out += manifest.entries.at(p.a).image_path + "," + manifest.entries.at(p.b).image_path + "," +
               to_string(p.strategy) + "\n";
    return out;
}

std::vector<MorphPair> pairs_from_csv(const DatasetManifest& manifest, const std::string& text) {
    std::map<std::string, std::size_t> by_path;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (!by_path.emplace(manifest.entries[i].image_path, i).second)
            throw FormatError("image path " + manifest.entries[i].image_path + " appears twice in manifest");
    }
    const auto table = csv::parse(text, kPairsHeader);
    std::vector<MorphPair> out;
    for (const auto& row : table.rows) {
        const auto ia = by_path.find(row[0]);
        const auto ib = by_path.find(row[1]);
        if (ia == by_path.end() || ib == by_path.end())
            throw FormatError("pair references image not in manifest: " + row[0] + "," + row[1]);
        if (!valid_pair(manifest.entries[ia->second], manifest.entries[ib->second]))
            throw FormatError("pair " + row[0] + "," + row[1] + " violates distinct-subject/same-side rule");
        out.push_back({ia->second, ib->second, parse_strategy(row[2])});
    }
    return out;
}

}  // namespace morphiris
