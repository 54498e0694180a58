#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "morphiris/features.hpp"

namespace morphiris {

enum class ClassLabel : std::uint8_t { bonafide = 0, morph = 1 };

/// Flat binary tree. Internal nodes route f[feature] <= threshold left;
/// leaves (feature == -1) hold the morph-class probability.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double p_morph = 0.0;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> f) const;
    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = 12;
    std::size_t min_leaf = 2;
    /// 0 selects floor(sqrt(n_features)).
    std::size_t mtry = 0;
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    std::uint64_t seed = 0;
    /// Name of the feature extractor the trees were trained on; empty if unknown.
    std::string feature_set;

    /// "RFM1" little-endian: magic, u32 version, u32 n_features, u64 seed,
    /// u32 feature_set length and its bytes, u32 n_trees, then per tree u32 n_nodes and per node
    /// i32 feature, f64 threshold, i32 left, i32 right, f64 p_morph.
    std::vector<std::uint8_t> serialize() const;
    static ForestModel deserialize(std::span<const std::uint8_t> bytes);
    void save(const std::filesystem::path& path) const;
    static ForestModel load(const std::filesystem::path& path);

    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Bootstrap + Gini random forest. Each tree draws its own RNG stream from
/// (seed, tree index), so parallel construction is order-independent.
ForestModel rf_train(std::span<const FeatureVector> features, std::span<const ClassLabel> labels,
                     const ForestParams& params);

/// Same training, also returning the out-of-bag accuracy (samples never
/// out of bag are skipped).
std::pair<ForestModel, double> rf_train_oob(std::span<const FeatureVector> features,
                                            std::span<const ClassLabel> labels, const ForestParams& params);

/// Mean morph probability over trees, in [0, 1].
double rf_predict(const ForestModel& model, std::span<const double> f);

}  // namespace morphiris
