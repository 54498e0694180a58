#include "morphiris/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "morphiris/csv.hpp"
#include "morphiris/errors.hpp"

namespace morphiris {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double count_below(const std::vector<double>& sorted, double t) {
    return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v)) throw MetricError(std::string(what) + " contains a non-finite score");
}

std::vector<double> sorted_copy(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    std::sort(out.begin(), out.end());
    return out;
}

// -inf, each distinct value of both lists, +inf.
std::vector<double> candidate_thresholds(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> t;
    t.reserve(a.size() + b.size() + 2);
    t.push_back(-kInf);
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(t));
    t.push_back(kInf);
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

void require_nonempty(const ScoreSet& s) {
    if (s.mated.empty() || s.nonmated.empty()) throw MetricError("score set needs mated and non-mated scores");
    require_finite(s.mated, "mated");
    require_finite(s.nonmated, "non-mated");
}

DetPoint rates_sorted(const std::vector<double>& mated, const std::vector<double>& nonmated, Polarity polarity,
                      double t) {
    const double nm = static_cast<double>(mated.size()), nn = static_cast<double>(nonmated.size());
    const double mated_below = count_below(mated, t), nonmated_below = count_below(nonmated, t);
    if (polarity == Polarity::dissimilarity) return {t, nonmated_below / nn, (nm - mated_below) / nm};
    return {t, (nn - nonmated_below) / nn, mated_below / nm};
}

}  // namespace

bool is_match(double score, double threshold, Polarity polarity) {
    return polarity == Polarity::dissimilarity ? score < threshold : score >= threshold;
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    s.n = values.size();
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(s.n);
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(s.n));
    return s;
}

double d_prime(const ScoreSet& scores) {
    if (scores.mated.size() < 2 || scores.nonmated.size() < 2)
        throw MetricError("d': need at least 2 mated and 2 non-mated scores");
    require_nonempty(scores);
    const auto m = summarize(scores.mated), n = summarize(scores.nonmated);
    const double spread = std::sqrt(0.5 * (m.stddev * m.stddev + n.stddev * n.stddev));
    const double gap = std::abs(m.mean - n.mean);
    if (spread == 0.0) {
        if (gap == 0.0) return 0.0;
        throw MetricError("d': both distributions have zero variance");
    }
    return gap / spread;
}

std::vector<DetPoint> det_points(const ScoreSet& scores) {
    require_nonempty(scores);
    const auto mated = sorted_copy(scores.mated), nonmated = sorted_copy(scores.nonmated);
    std::vector<DetPoint> out;
    for (double t : candidate_thresholds(mated, nonmated)) out.push_back(rates_sorted(mated, nonmated, scores.polarity, t));
    return out;
}

DetPoint rates_at(const ScoreSet& scores, double threshold) {
    require_nonempty(scores);
    return rates_sorted(sorted_copy(scores.mated), sorted_copy(scores.nonmated), scores.polarity, threshold);
}

OperatingPoint eer(const ScoreSet& scores) {
    const auto det = det_points(scores);
    for (const auto& p : det)
        if (p.fmr == p.fnmr) return {p.fmr, p.threshold};

    for (std::size_t k = 0; k + 1 < det.size(); ++k) {
        const double d0 = det[k].fmr - det[k].fnmr, d1 = det[k + 1].fmr - det[k + 1].fnmr;
        if ((d0 < 0) == (d1 < 0)) continue;
        const double t = d0 / (d0 - d1);
        const double rate = det[k].fmr + t * (det[k + 1].fmr - det[k].fmr);
        const double lo = det[k].threshold, hi = det[k + 1].threshold;
        double threshold;
        if (std::isfinite(lo) && std::isfinite(hi))
            threshold = lo + t * (hi - lo);
        else
            threshold = std::isfinite(lo) ? lo : hi;
        return {rate, threshold};
    }
    throw MetricError("eer: FMR and FNMR never cross");
}

OperatingPoint fnmr_at_fmr(const ScoreSet& scores, double target_fmr) {
    if (!(target_fmr > 0.0 && target_fmr < 1.0)) throw MetricError("fnmr_at_fmr: target must lie in (0, 1)");
    const auto det = det_points(scores);
    const DetPoint* best = nullptr;
    for (const auto& p : det) {
        if (p.fmr > target_fmr) continue;
        if (!best || p.fnmr < best->fnmr || (p.fnmr == best->fnmr && p.fmr < best->fmr)) best = &p;
    }
    if (!best) throw MetricError("fnmr_at_fmr: no threshold reaches FMR <= target");
    return {best->fnmr, best->threshold};
}

double macer(const DecisionSet& d) {
    if (d.morph_decisions.empty()) throw MetricError("MACER: no morph presentations");
    const auto missed = std::count(d.morph_decisions.begin(), d.morph_decisions.end(), false);
    return static_cast<double>(missed) / static_cast<double>(d.morph_decisions.size());
}

double bpcer(const DecisionSet& d) {
    if (d.bonafide_decisions.empty()) throw MetricError("BPCER: no bona fide presentations");
    const auto flagged = std::count(d.bonafide_decisions.begin(), d.bonafide_decisions.end(), true);
    return static_cast<double>(flagged) / static_cast<double>(d.bonafide_decisions.size());
}

OperatingPoint bpcer_at_macer(std::span<const double> morph_scores, std::span<const double> bonafide_scores,
                              double target_macer) {
    if (morph_scores.empty() || bonafide_scores.empty())
        throw MetricError("bpcer_at_macer: need morph and bona fide scores");
    if (!(target_macer >= 0.0 && target_macer < 1.0)) throw MetricError("bpcer_at_macer: target must lie in [0, 1)");
    require_finite(morph_scores, "morph");
    require_finite(bonafide_scores, "bona fide");
    const auto morph = sorted_copy(morph_scores), bona = sorted_copy(bonafide_scores);
    const double nm = static_cast<double>(morph.size()), nb = static_cast<double>(bona.size());

    const auto candidates = candidate_thresholds(morph, bona);
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        const double macer_here = count_below(morph, *it) / nm;
        if (macer_here <= target_macer) return {(nb - count_below(bona, *it)) / nb, *it};
    }
    throw MetricError("bpcer_at_macer: target MACER unreachable");
}

double triplet_loss(double d_ap, double d_an, double margin) { return std::max(d_ap - d_an + margin, 0.0); }

std::string to_string(MmpmrVariant v) { return v == MmpmrVariant::minmax ? "minmax" : "prodavg"; }

namespace {

const std::vector<std::vector<double>>& system_attempts(const MorphAttackRecord& r, std::size_t system) {
    if (system >= r.attempts.size())
        throw MetricError("morph " + r.morph_id + " has no scores for system " + std::to_string(system));
    const auto& subjects = r.attempts[system];
    if (subjects.empty()) throw MetricError("morph " + r.morph_id + " has no contributing subjects");
    for (const auto& a : subjects)
        if (a.empty()) throw MetricError("morph " + r.morph_id + " has a subject with zero attempts");
    return subjects;
}

}  // namespace

double mmpmr(std::span<const MorphAttackRecord> records, double tau, MmpmrVariant variant, Polarity polarity,
             std::size_t system) {
    if (records.empty()) throw MetricError("mmpmr: no morph records");
    double total = 0.0;
    for (const auto& rec : records) {
        const auto& subjects = system_attempts(rec, system);
        if (variant == MmpmrVariant::minmax) {
            bool all = true;
            for (const auto& a : subjects) {
                const double best = polarity == Polarity::dissimilarity ? *std::min_element(a.begin(), a.end())
                                                                        : *std::max_element(a.begin(), a.end());
                all = all && is_match(best, tau, polarity);
            }
            total += all ? 1.0 : 0.0;
        } else {
            double prod = 1.0;
            for (const auto& a : subjects) {
                const auto hits = std::count_if(a.begin(), a.end(), [&](double s) { return is_match(s, tau, polarity); });
                prod *= static_cast<double>(hits) / static_cast<double>(a.size());
            }
            total += prod;
        }
    }
    return total / static_cast<double>(records.size());
}

double rmmr(double mmpmr_value, double fnmr_value) { return mmpmr_value + fnmr_value; }

std::vector<std::vector<double>> map_matrix(std::span<const MorphAttackRecord> records,
                                            std::span<const double> taus_per_system, std::size_t max_attempts,
                                            Polarity polarity) {
    if (records.empty()) throw MetricError("map: no morph records");
    if (max_attempts == 0) throw MetricError("map: max_attempts must be >= 1");
    const std::size_t systems = taus_per_system.size();
    if (systems == 0) throw MetricError("map: need at least one system threshold");

    std::vector<std::vector<double>> out(max_attempts, std::vector<double>(systems, 0.0));
    for (const auto& rec : records) {
        if (rec.attempts.size() != systems)
            throw MetricError("map: morph " + rec.morph_id + " covers " + std::to_string(rec.attempts.size()) +
                              " systems, expected " + std::to_string(systems));
        // Per system: the number of successful attempts every subject reaches.
        std::vector<std::size_t> level(systems);
        for (std::size_t s = 0; s < systems; ++s) {
            std::size_t weakest = max_attempts;
            for (const auto& a : system_attempts(rec, s)) {
                const std::size_t used = std::min(a.size(), max_attempts);
                const auto hits = std::count_if(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(used),
                                                [&](double v) { return is_match(v, taus_per_system[s], polarity); });
                weakest = std::min(weakest, static_cast<std::size_t>(hits));
            }
            level[s] = weakest;
        }
        for (std::size_t i = 1; i <= max_attempts; ++i) {
            const auto fooled = static_cast<std::size_t>(std::count_if(level.begin(), level.end(), [&](std::size_t l) { return l >= i; }));
            for (std::size_t j = 1; j <= fooled; ++j) out[i - 1][j - 1] += 1.0;
        }
    }
    for (auto& row : out)
        for (auto& v : row) v /= static_cast<double>(records.size());
    return out;
}

std::string det_csv(std::span<const DetPoint> points) {
    std::string out = "threshold,fmr,fnmr\n";
    for (const auto& p : points)
        out += csv::format_double(p.threshold) + ',' + csv::format_double(p.fmr) + ',' + csv::format_double(p.fnmr) + '\n';
    return out;
}

}  // namespace morphiris
