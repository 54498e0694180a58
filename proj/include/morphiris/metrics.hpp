#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace morphiris {

enum class Polarity { dissimilarity, similarity };

/// Mated and non-mated comparison scores. With dissimilarity polarity a
/// comparison is a match when score < threshold; with similarity polarity
/// when score >= threshold.
struct ScoreSet {
    std::vector<double> mated;
    std::vector<double> nonmated;
    Polarity polarity = Polarity::dissimilarity;
};

struct DetPoint {
    double threshold;
    double fmr;
    double fnmr;
};

struct OperatingPoint {
    double rate;       // EER, FNMR or BPCER depending on the query
    double threshold;
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population
};

SummaryStats summarize(std::span<const double> values);

/// |mu_m - mu_n| / sqrt((sigma_m^2 + sigma_n^2) / 2), population sigmas.
double d_prime(const ScoreSet& scores);

/// Error rates at -inf, every distinct score, and +inf, in increasing
/// threshold order.
std::vector<DetPoint> det_points(const ScoreSet& scores);

/// CSV with header threshold,fmr,fnmr, one row per DET point.
std::string det_csv(std::span<const DetPoint> points);

/// FMR/FNMR at one threshold under the set's polarity.
DetPoint rates_at(const ScoreSet& scores, double threshold);

/// Equal error rate: exact crossing when a DET point has FMR == FNMR
/// (lowest such threshold), otherwise linear interpolation between the
/// two DET points that bracket the sign change of FMR - FNMR.
OperatingPoint eer(const ScoreSet& scores);

/// Lowest FNMR among DET points with FMR <= target (step function; ties go
/// to the lower FMR, then the lower threshold).
OperatingPoint fnmr_at_fmr(const ScoreSet& scores, double target_fmr);

struct DecisionSet {
    std::vector<bool> morph_decisions;     // Res_i, true = classified as morph
    std::vector<bool> bonafide_decisions;  // RES_i, true = classified as morph
};

double macer(const DecisionSet& d);
double bpcer(const DecisionSet& d);

/// Detector scores, higher = more morph-like; morph declared at score >=
/// threshold. Picks the largest candidate threshold with MACER <= target
/// and reports BPCER there.
OperatingPoint bpcer_at_macer(std::span<const double> morph_scores, std::span<const double> bonafide_scores,
                              double target_macer);

double triplet_loss(double d_ap, double d_an, double margin);

/// Per-morph attack scores: attempts[system][subject] holds the comparison
/// scores of that subject's probes against the morph (subject 0 = A, 1 = B).
struct MorphAttackRecord {
    std::string morph_id;
    std::vector<std::vector<std::vector<double>>> attempts;
};

enum class MmpmrVariant { minmax, prodavg };

std::string to_string(MmpmrVariant v);

/// minmax: fraction of morphs whose every subject has a best attempt that
/// matches; prodavg: mean over morphs of the product of per-subject match
/// fractions. Uses scores of `system`.
double mmpmr(std::span<const MorphAttackRecord> records, double tau, MmpmrVariant variant,
             Polarity polarity = Polarity::dissimilarity, std::size_t system = 0);

/// MMPMR + FNMR at the same threshold; may exceed 1.
double rmmr(double mmpmr_value, double fnmr_value);

/// Entry [i-1][j-1]: fraction of morphs for which at least j systems are
/// fooled, a system being fooled when each contributing subject has at
/// least i matching attempts on it.
std::vector<std::vector<double>> map_matrix(std::span<const MorphAttackRecord> records,
                                            std::span<const double> taus_per_system, std::size_t max_attempts,
                                            Polarity polarity = Polarity::dissimilarity);

/// Match decision for one score.
bool is_match(double score, double threshold, Polarity polarity);

}  // namespace morphiris
