#include "morphiris/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "morphiris/errors.hpp"
#include "morphiris/image.hpp"
#include "morphiris/parallel.hpp"
#include "morphiris/random.hpp"

namespace morphiris {

double DecisionTree::predict(std::span<const double> f) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(f[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].p_morph;
}

namespace {

struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

double gini(double morph, double total) {
    if (total <= 0.0) return 0.0;
    const double p = morph / total;
    return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(std::span<const FeatureVector> x, std::span<const ClassLabel> y, const ForestParams& params,
                std::size_t mtry, Rng& rng)
        : x_(x), y_(y), params_(params), mtry_(mtry), rng_(rng), features_(x[0].size()) {
        std::iota(features_.begin(), features_.end(), 0);
    }

    DecisionTree build(std::vector<std::size_t> samples) {
        tree_.nodes.clear();
        grow(samples, 0);
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::vector<std::size_t>& samples, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const double total = static_cast<double>(samples.size());
        const double morph = static_cast<double>(
            std::count_if(samples.begin(), samples.end(), [&](std::size_t s) { return y_[s] == ClassLabel::morph; }));
        tree_.nodes[id].p_morph = morph / total;

        const bool pure = morph == 0.0 || morph == total;
        if (pure || depth >= params_.max_depth || samples.size() < 2 * params_.min_leaf) return id;

        const Split best = find_split(samples, morph);
        if (best.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto s : samples)
            (x_[s][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        tree_.nodes[id].feature = best.feature;
        tree_.nodes[id].threshold = best.threshold;
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    Split find_split(const std::vector<std::size_t>& samples, double morph_total) {
        // Partial Fisher-Yates over the feature index pool draws mtry distinct features.
        const std::size_t d = features_.size();
        const double n = static_cast<double>(samples.size());
        const double parent = gini(morph_total, n);
        Split best;
        best.impurity = parent - 1e-12;

        std::vector<std::pair<double, bool>> column(samples.size());
        for (std::size_t k = 0; k < std::min(mtry_, d); ++k) {
            std::swap(features_[k], features_[k + rng_.below(d - k)]);
            const std::size_t f = features_[k];
            for (std::size_t i = 0; i < samples.size(); ++i)
                column[i] = {x_[samples[i]][f], y_[samples[i]] == ClassLabel::morph};
            std::sort(column.begin(), column.end());

            double left_morph = 0.0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                left_morph += column[i].second ? 1.0 : 0.0;
                if (column[i].first == column[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                if (nl < static_cast<double>(params_.min_leaf) || nr < static_cast<double>(params_.min_leaf)) continue;
                const double impurity =
                    (nl * gini(left_morph, nl) + nr * gini(morph_total - left_morph, nr)) / n;
                if (impurity < best.impurity) {
                    best.impurity = impurity;
                    best.feature = static_cast<std::int32_t>(f);
                    const double lo = column[i].first, hi = column[i + 1].first;
                    const double mid = lo + 0.5 * (hi - lo);
                    // Adjacent doubles: the midpoint rounds onto hi and would empty the right side.
                    best.threshold = mid < hi ? mid : lo;
                }
            }
        }
        return best;
    }

    std::span<const FeatureVector> x_;
    std::span<const ClassLabel> y_;
    const ForestParams& params_;
    std::size_t mtry_;
    Rng& rng_;
    std::vector<std::size_t> features_;
    DecisionTree tree_;
};

void check_training_set(std::span<const FeatureVector> x, std::span<const ClassLabel> y, const ForestParams& p) {
    if (x.size() != y.size()) throw ParameterError("rf_train: feature and label counts differ");
    if (x.empty() || x[0].empty()) throw ParameterError("rf_train: empty training set");
    for (const auto& f : x) {
        if (f.size() != x[0].size()) throw ParameterError("rf_train: inconsistent feature lengths");
        for (double v : f)
            if (!std::isfinite(v)) throw ParameterError("rf_train: non-finite feature value");
    }
    const auto morphs = std::count(y.begin(), y.end(), ClassLabel::morph);
    const auto bona = static_cast<std::ptrdiff_t>(y.size()) - morphs;
    if (morphs == 0 || bona == 0) throw ParameterError("rf_train: training set contains a single class");
    if (morphs < 2 || bona < 2) throw ParameterError("rf_train: need at least 2 samples per class");
    if (p.n_trees == 0 || p.min_leaf == 0) throw ParameterError("rf_train: n_trees and min_leaf must be >= 1");
}

struct Trained {
    ForestModel model;
    std::vector<std::vector<std::size_t>> bags;
};

Trained train(std::span<const FeatureVector> x, std::span<const ClassLabel> y, const ForestParams& params) {
    check_training_set(x, y, params);
    const std::size_t d = x[0].size();
    const std::size_t mtry = params.mtry ? std::min(params.mtry, d)
                                         : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(d))));

    Trained out;
    out.model.n_features = d;
    out.model.seed = params.seed;
    out.model.trees.resize(params.n_trees);
    out.bags.resize(params.n_trees);

    parallel_for(params.n_trees, [&](std::size_t t) {
        Rng rng(derive_seed(params.seed, {t, 0x7ee}));
        std::vector<std::size_t> bag(x.size());
        for (auto& s : bag) s = rng.below(x.size());
        out.bags[t] = bag;
        TreeBuilder builder(x, y, params, mtry, rng);
        out.model.trees[t] = builder.build(std::move(bag));
    });
    return out;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    const auto bits = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
    if constexpr (std::endian::native == std::endian::little)
        out.insert(out.end(), bits.begin(), bits.end());
    else
        out.insert(out.end(), bits.rbegin(), bits.rend());
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > b_.size())
            throw FormatError("forest model truncated at byte offset " + std::to_string(pos_));
        std::array<std::uint8_t, sizeof(T)> bits;
        std::copy_n(b_.begin() + static_cast<std::ptrdiff_t>(pos_), sizeof(T), bits.begin());
        if constexpr (std::endian::native != std::endian::little) std::reverse(bits.begin(), bits.end());
        pos_ += sizeof(T);
        return std::bit_cast<T>(bits);
    }
    bool done() const { return pos_ == b_.size(); }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 4;
};

}  // namespace

ForestModel rf_train(std::span<const FeatureVector> features, std::span<const ClassLabel> labels,
                     const ForestParams& params) {
    return train(features, labels, params).model;
}

std::pair<ForestModel, double> rf_train_oob(std::span<const FeatureVector> features,
                                            std::span<const ClassLabel> labels, const ForestParams& params) {
    auto trained = train(features, labels, params);
    std::size_t correct = 0, counted = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        double sum = 0.0;
        std::size_t votes = 0;
        for (std::size_t t = 0; t < trained.model.trees.size(); ++t) {
            const auto& bag = trained.bags[t];
            if (std::find(bag.begin(), bag.end(), i) != bag.end()) continue;
            sum += trained.model.trees[t].predict(features[i]);
            ++votes;
        }
        if (votes == 0) continue;
        ++counted;
        const bool says_morph = sum / static_cast<double>(votes) >= 0.5;
        if (says_morph == (labels[i] == ClassLabel::morph)) ++correct;
    }
    const double acc = counted ? static_cast<double>(correct) / static_cast<double>(counted) : 0.0;
    return {std::move(trained.model), acc};
}

double rf_predict(const ForestModel& model, std::span<const double> f) {
    if (f.size() != model.n_features)
        throw ModelError("rf_predict: feature length " + std::to_string(f.size()) + " does not match model (" +
                         std::to_string(model.n_features) + ")");
    if (model.trees.empty()) throw ModelError("rf_predict: model has no trees");
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.predict(f);
    return sum / static_cast<double>(model.trees.size());
}

std::vector<std::uint8_t> ForestModel::serialize() const {
    std::vector<std::uint8_t> out = {'R', 'F', 'M', '1'};
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n_features));
    put<std::uint64_t>(out, seed);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(feature_set.size()));
    out.insert(out.end(), feature_set.begin(), feature_set.end());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(trees.size()));
    for (const auto& t : trees) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.nodes.size()));
        for (const auto& n : t.nodes) {
            put<std::int32_t>(out, n.feature);
            put<double>(out, n.threshold);
            put<std::int32_t>(out, n.left);
            put<std::int32_t>(out, n.right);
            put<double>(out, n.p_morph);
        }
    }
    return out;
}

ForestModel ForestModel::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "RFM1", 4) != 0)
        throw FormatError("forest model: bad magic (expected RFM1) at byte offset 0");
    Reader r(bytes);
    if (const auto version = r.get<std::uint32_t>(); version != 1)
        throw FormatError("forest model: unsupported version " + std::to_string(version));
    ForestModel m;
    m.n_features = r.get<std::uint32_t>();
    m.seed = r.get<std::uint64_t>();
    const auto name_len = r.get<std::uint32_t>();
    if (name_len > 64) throw FormatError("forest model: feature set name too long");
    for (std::uint32_t k = 0; k < name_len; ++k) m.feature_set.push_back(static_cast<char>(r.get<std::uint8_t>()));
    const auto n_trees = r.get<std::uint32_t>();
    for (std::uint32_t t = 0; t < n_trees; ++t) {
        DecisionTree tree;
        const auto n_nodes = r.get<std::uint32_t>();
        if (n_nodes == 0) throw FormatError("forest model: empty tree");
        for (std::uint32_t k = 0; k < n_nodes; ++k) {
            TreeNode n;
            n.feature = r.get<std::int32_t>();
            n.threshold = r.get<double>();
            n.left = r.get<std::int32_t>();
            n.right = r.get<std::int32_t>();
            n.p_morph = r.get<double>();
            const bool leaf = n.feature < 0;
            if (!leaf && (static_cast<std::size_t>(n.feature) >= m.n_features || n.left <= static_cast<std::int32_t>(k) ||
                          n.right <= static_cast<std::int32_t>(k) || n.left >= static_cast<std::int32_t>(n_nodes) ||
                          n.right >= static_cast<std::int32_t>(n_nodes)))
                throw FormatError("forest model: malformed node " + std::to_string(k) + " in tree " + std::to_string(t));
            if (!(n.p_morph >= 0.0 && n.p_morph <= 1.0)) throw FormatError("forest model: leaf probability outside [0,1]");
            tree.nodes.push_back(n);
        }
        m.trees.push_back(std::move(tree));
    }
    if (!r.done()) throw FormatError("forest model: trailing bytes");
    return m;
}

void ForestModel::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

ForestModel ForestModel::load(const std::filesystem::path& path) {
    try {
        return deserialize(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace morphiris
