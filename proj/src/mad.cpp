#include "morphiris/mad.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "morphiris/errors.hpp"
#include "morphiris/parallel.hpp"
#include "morphiris/random.hpp"

namespace morphiris {

std::string MadReport::to_json() const {
    nlohmann::ordered_json j;
    j["eer"] = eer;
    j["eer_threshold"] = threshold;
    j["macer"] = macer;
    j["bpcer"] = bpcer;
    j["bpcer_at"] = {{"0.10", bpcer_at_10}, {"0.01", bpcer_at_1}};
    j["confusion"] = {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}};
    j["counts"] = {{"train_bonafide", n_train_bonafide},
                   {"train_morph", n_train_morph},
                   {"test_bonafide", n_test_bonafide},
                   {"test_morph", n_test_morph}};
    return j.dump(2) + "\n";
}

MadReport evaluate_detector(std::span<const double> morph_scores, std::span<const double> bonafide_scores) {
    if (morph_scores.empty() || bonafide_scores.empty())
        throw MetricError("evaluate_detector: need both morph and bona fide scores");
    // Morphs play the "mated" role under similarity polarity: FNMR is then
    // the fraction of morphs below threshold (MACER), FMR the fraction of
    // bona fide at or above it (BPCER).
    ScoreSet set;
    set.mated.assign(morph_scores.begin(), morph_scores.end());
    set.nonmated.assign(bonafide_scores.begin(), bonafide_scores.end());
    set.polarity = Polarity::similarity;

    MadReport r;
    const auto op = eer(set);
    r.eer = op.rate;
    r.threshold = op.threshold;
    r.det = det_points(set);

    DecisionSet d;
    for (double s : morph_scores) d.morph_decisions.push_back(s >= r.threshold);
    for (double s : bonafide_scores) d.bonafide_decisions.push_back(s >= r.threshold);
    r.macer = macer(d);
    r.bpcer = bpcer(d);
    for (bool m : d.morph_decisions) ++(m ? r.confusion.tp : r.confusion.fn);
    for (bool m : d.bonafide_decisions) ++(m ? r.confusion.fp : r.confusion.tn);

    r.bpcer_at_10 = bpcer_at_macer(morph_scores, bonafide_scores, 0.10).rate;
    r.bpcer_at_1 = bpcer_at_macer(morph_scores, bonafide_scores, 0.01).rate;
    return r;
}

std::vector<FeatureVector> extract_all(std::span<const GrayImage> images, Extractor e) {
    std::vector<FeatureVector> out(images.size());
    parallel_for(images.size(), [&](std::size_t i) { out[i] = extract(images[i], e); });
    return out;
}

std::vector<bool> split_by_subject(std::span<const BonafideImage> bonafide, std::uint64_t seed,
                                   double train_fraction) {
    std::vector<std::string> subjects;
    for (const auto& b : bonafide) subjects.push_back(b.subject);
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());

    Rng rng(derive_seed(seed, {0x5b1u}));
    for (std::size_t i = subjects.size(); i > 1; --i) std::swap(subjects[i - 1], subjects[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(subjects.size())));
    if (n_train == 0 || n_train >= subjects.size())
        throw ParameterError("smad split: " + std::to_string(subjects.size()) +
                             " subject(s) cannot fill both train and test partitions");

    std::map<std::string, bool> in_train;
    for (std::size_t i = 0; i < subjects.size(); ++i) in_train[subjects[i]] = i < n_train;
    std::vector<bool> flags;
    for (const auto& b : bonafide) flags.push_back(in_train.at(b.subject));
    return flags;
}

MadReport smad_experiment(std::span<const BonafideImage> bonafide, std::span<const GrayImage> morphs_train,
                          std::span<const GrayImage> morphs_test, Extractor extractor, std::uint64_t split_seed,
                          const ForestParams& forest) {
    if (bonafide.empty() || morphs_train.empty() || morphs_test.empty())
        throw ParameterError("smad_experiment: bona fide and both morph sets must be non-empty");
    const auto train_flags = split_by_subject(bonafide, split_seed);

    std::vector<GrayImage> bona_imgs;
    for (const auto& b : bonafide) bona_imgs.push_back(b.image);
    const auto bona_feat = extract_all(bona_imgs, extractor);
    const auto train_morph_feat = extract_all(morphs_train, extractor);
    const auto test_morph_feat = extract_all(morphs_test, extractor);

    std::vector<FeatureVector> x;
    std::vector<ClassLabel> y;
    std::vector<const FeatureVector*> test_bona;
    for (std::size_t i = 0; i < bonafide.size(); ++i) {
        if (train_flags[i]) {
            x.push_back(bona_feat[i]);
            y.push_back(ClassLabel::bonafide);
        } else {
            test_bona.push_back(&bona_feat[i]);
        }
    }
    const std::size_t n_train_bona = x.size();
    for (const auto& f : train_morph_feat) {
        x.push_back(f);
        y.push_back(ClassLabel::morph);
    }

    const auto model = rf_train(x, y, forest);

    std::vector<double> morph_scores(test_morph_feat.size()), bona_scores(test_bona.size());
    parallel_for(morph_scores.size(), [&](std::size_t i) { morph_scores[i] = rf_predict(model, test_morph_feat[i]); });
    parallel_for(bona_scores.size(), [&](std::size_t i) { bona_scores[i] = rf_predict(model, *test_bona[i]); });

    auto report = evaluate_detector(morph_scores, bona_scores);
    report.n_train_bonafide = n_train_bona;
    report.n_train_morph = train_morph_feat.size();
    report.n_test_bonafide = bona_scores.size();
    report.n_test_morph = morph_scores.size();
    return report;
}

}  // namespace morphiris
