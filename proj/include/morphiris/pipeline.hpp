#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphiris/config.hpp"
#include "morphiris/geometry.hpp"
#include "morphiris/image.hpp"
#include "morphiris/iriscode.hpp"
#include "morphiris/mad.hpp"
#include "morphiris/metrics.hpp"
#include "morphiris/pairs.hpp"
#include "morphiris/segmentation.hpp"

namespace morphiris {

inline constexpr const char* kToolVersion = "1.0.0";

/// Threshold segmentation followed by circle fitting.
struct Segmentation {
    LabelMask mask;
    IrisGeometry geometry;
};

Segmentation segment_image(const GrayImage& img, Thresholds thresholds = {});
/// Writes <stem>.mask.pgm and <stem>.geom.
void save_segmentation(const std::filesystem::path& stem, const Segmentation& seg);
Segmentation load_segmentation(const std::filesystem::path& stem);

/// File stem of a manifest image path ("data/S001_L_0.pgm" -> "S001_L_0").
std::string image_stem(const std::string& image_path);

enum class ScoreLabel { mated, nonmated, morph_a, morph_b };

std::string to_string(ScoreLabel l);
ScoreLabel parse_score_label(std::string_view text);

/// One row of a score file: idA,idB,label,score,shift. Morph rows carry the
/// morph id in idA and the probe in idB; their attempt number is their
/// position among the rows of the same morph and label.
struct ScoreRow {
    std::string id_a;
    std::string id_b;
    ScoreLabel label = ScoreLabel::mated;
    double score = 0.0;
    long shift = 0;
};

std::string scores_to_csv(const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> scores_from_csv(const std::string& text);
/// Mated and non-mated rows as a dissimilarity score set.
ScoreSet to_score_set(const std::vector<ScoreRow>& rows);
bool has_morph_rows(const std::vector<ScoreRow>& rows);

/// Groups the morph rows of one table per system into records ordered by
/// morph id. Every morph must appear in every table.
std::vector<MorphAttackRecord> to_attack_records(const std::vector<std::vector<ScoreRow>>& per_system);

/// Manifest indices of the first image of every (subject, side), in
/// manifest order. These are the morph parents; the remaining images are
/// kept back as attack probes.
std::vector<std::size_t> reference_indices(const DatasetManifest& manifest);

struct CodedImage {
    std::string stem;
    std::string subject;
    EyeSide side = EyeSide::left;
    const IrisCode* code = nullptr;
};

/// Mated rows for every within-eye pair; non-mated rows between the first
/// image of each (subject, side) and those of other subjects on the same
/// side. Rows are ordered by image index pair.
std::vector<ScoreRow> compare_bonafide(const std::vector<CodedImage>& images, std::size_t max_shift);

/// Attack attempts of one morph: attempt k compares the morph with the k-th
/// remaining image of each parent's eye, at most `probe_cap` per parent.
/// A null morph code (morph failed enrolment) scores 1.0 everywhere.
std::vector<ScoreRow> compare_morph(const std::string& morph_id, const IrisCode* morph_code,
                                         const std::vector<CodedImage>& images, std::size_t parent_a,
                                         std::size_t parent_b, std::size_t probe_cap, std::size_t max_shift);

/// Attack attempts: attempt k pairs the k-th morphA and k-th morphB row of
/// a morph; it succeeds when the larger score is at most delta, as in
/// attack_success.
struct AttackTally {
    std::size_t attempts = 0;
    std::size_t successes = 0;
    double rate() const { return attempts ? static_cast<double>(successes) / static_cast<double>(attempts) : 0.0; }
};
AttackTally tally_attacks(const std::vector<ScoreRow>& rows, double delta);

struct ThresholdEntry {
    std::string criterion;
    double threshold = 0.0;
    double fmr = 0.0;
    double fnmr = 0.0;
};

struct SystemSummary {
    std::string name;
    SummaryStats mated;
    SummaryStats nonmated;
    double d_prime = 0.0;
    double eer = 0.0;
    double eer_threshold = 0.0;
    std::vector<ThresholdEntry> thresholds;
    std::vector<std::pair<double, double>> fnmr_at;  // (target FMR, FNMR)
};

/// d', EER, FNMR at each FMR target and the rates at the fixed decision
/// threshold delta. Every threshold carries the criterion that produced it.
SystemSummary analyze_system(const std::string& name, const ScoreSet& scores, std::span<const double> fmr_targets,
                             std::optional<double> delta);

struct StrategySystemSummary {
    std::string system;
    SummaryStats morph_scores;
    AttackTally attacks;
    double fmr_at_delta = 0.0;
    double fnmr_at_delta = 0.0;
    double mmpmr_minmax = 0.0;
    double mmpmr_prodavg = 0.0;
    double rmmr_minmax = 0.0;
    double rmmr_prodavg = 0.0;
};

struct StrategySummary {
    std::string strategy;
    std::size_t pairs = 0;
    std::size_t segmentation_failures = 0;
    std::vector<StrategySystemSummary> systems;
    std::vector<std::vector<double>> map;
};

/// Vulnerability section of one strategy from its per-system morph scores
/// and the bona fide scores of the same systems.
StrategySummary summarize_strategy(const std::string& strategy, std::size_t pairs, std::size_t segmentation_failures,
                                   const std::vector<std::string>& system_names,
                                   const std::vector<std::vector<ScoreRow>>& per_system,
                                   const std::vector<ScoreSet>& bonafide, double delta, std::size_t probe_cap);

struct MadSummary {
    std::string train_type;
    std::string test_type;
    std::string extractor;
    MadReport report;
};

struct VulnReport {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    double delta = kDefaultDelta;
    std::size_t probe_cap = 0;
    std::vector<SystemSummary> systems;
    std::vector<StrategySummary> strategies;
    std::vector<MadSummary> mad;

    std::string to_json() const;
};

/// Full experiment: gen -> segment -> normalize -> encode -> select-pairs ->
/// morph -> segment/normalize/encode morphs -> compare -> report (-> mad).
/// Each artefact is skipped when already present, so an interrupted run
/// resumes where it stopped. Throws PipelineError naming the stage and item
/// after writing <out>/partial_manifest.txt.
VulnReport cmd_run(const ExperimentConfig& config);

}  // namespace morphiris
