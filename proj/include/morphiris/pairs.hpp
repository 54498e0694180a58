#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace morphiris {

enum class EyeSide : std::uint8_t { left, right };

char side_code(EyeSide side);
EyeSide parse_side(std::string_view code);

struct ManifestEntry {
    std::string subject_id;
    EyeSide eye_side = EyeSide::left;
    std::string image_path;
    double pupil_radius = 0.0;
    double iris_radius = 0.0;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Image listing shared by generation, pair selection and the pipeline.
/// CSV: subject_id,eye_side,image_path,pupil_radius,iris_radius.
/// Relative image paths are resolved against the manifest's directory.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    /// Throws ParameterError on duplicate (subject, side, path) or bad radii.
    void validate() const;
    std::string to_csv() const;
    static DatasetManifest from_csv(const std::string& text);

    static DatasetManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

enum class PairStrategy : std::uint8_t { random, radius };

std::string to_string(PairStrategy s);
PairStrategy parse_strategy(std::string_view name);

/// Indices into the manifest the pair was drawn from.
struct MorphPair {
    std::size_t a = 0;
    std::size_t b = 0;
    PairStrategy strategy = PairStrategy::random;

    friend bool operator==(const MorphPair&, const MorphPair&) = default;
};

/// Number of (distinct-subject, same-side) image pairs available.
std::size_t count_valid_pairs(const DatasetManifest& manifest);

/// Uniform sample without replacement from all valid pairs. Throws
/// CapacityError when fewer than n_pairs exist.
std::vector<MorphPair> select_random(const DatasetManifest& manifest, std::size_t n_pairs, std::uint64_t seed);

/// Greedy radius matching per eye side: repeatedly takes the unused
/// cross-subject pair with the smallest pupil-radius gap (ties: iris-radius
/// gap, then subject ids), each image at most once. Pairs come back in
/// non-decreasing gap order; entry a has the smaller pupil radius.
std::vector<MorphPair> select_by_radius(const DatasetManifest& manifest, std::size_t n_pairs);

/// Pair list CSV: pathA,pathB,strategy (paths as written in the manifest).
std::string pairs_to_csv(const DatasetManifest& manifest, const std::vector<MorphPair>& pairs);
std::vector<MorphPair> pairs_from_csv(const DatasetManifest& manifest, const std::string& text);

}  // namespace morphiris
