#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "morphiris/features.hpp"
#include "morphiris/forest.hpp"
#include "morphiris/image.hpp"
#include "morphiris/metrics.hpp"

namespace morphiris {

struct BonafideImage {
    std::string subject;
    GrayImage image;
};

struct Confusion {
    std::size_t tp = 0;  // morph flagged as morph
    std::size_t fp = 0;  // bona fide flagged as morph
    std::size_t tn = 0;
    std::size_t fn = 0;
};

/// Detector evaluation. MACER, BPCER and the confusion matrix are taken at
/// the EER threshold (morph declared at score >= threshold).
struct MadReport {
    double eer = 0.0;
    double threshold = 0.0;
    double macer = 0.0;
    double bpcer = 0.0;
    double bpcer_at_10 = 0.0;
    double bpcer_at_1 = 0.0;
    Confusion confusion;
    std::size_t n_train_bonafide = 0;
    std::size_t n_train_morph = 0;
    std::size_t n_test_bonafide = 0;
    std::size_t n_test_morph = 0;
    std::vector<DetPoint> det;

    std::string to_json() const;
    std::string det_to_csv() const { return det_csv(det); }
};

/// Scores detector outputs (higher = more morph-like).
MadReport evaluate_detector(std::span<const double> morph_scores, std::span<const double> bonafide_scores);

std::vector<FeatureVector> extract_all(std::span<const GrayImage> images, Extractor e);

/// Subject-disjoint split: subjects are shuffled under `seed` and the first
/// round(0.7 n) go to training. Returns the training flag per image.
std::vector<bool> split_by_subject(std::span<const BonafideImage> bonafide, std::uint64_t seed,
                                   double train_fraction = 0.7);

/// Trains on bona fide (train split) + morphs of type X and tests on bona
/// fide (test split) + morphs of type Y.
MadReport smad_experiment(std::span<const BonafideImage> bonafide, std::span<const GrayImage> morphs_train,
                          std::span<const GrayImage> morphs_test, Extractor extractor, std::uint64_t split_seed,
                          const ForestParams& forest = {});

}  // namespace morphiris
