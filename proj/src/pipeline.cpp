#include "morphiris/pipeline.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "json.hpp"
#include "morphiris/csv.hpp"
#include "morphiris/errors.hpp"
#include "morphiris/iriscode.hpp"
#include "morphiris/morph.hpp"
#include "morphiris/normalization.hpp"
#include "morphiris/parallel.hpp"
#include "morphiris/random.hpp"
#include "morphiris/segmentation.hpp"
#include "morphiris/synth.hpp"

namespace morphiris {

namespace fs = std::filesystem;

Segmentation segment_image(const GrayImage& img, Thresholds thresholds) {
    Segmentation s;
    s.mask = segment_threshold(img, thresholds);
    s.geometry = geometry_from_mask(s.mask);
    return s;
}

void save_segmentation(const fs::path& stem, const Segmentation& seg) {
    save_pgm(fs::path(stem.string() + ".mask.pgm"), seg.mask.to_image());
    write_text(fs::path(stem.string() + ".geom"), format_geometry(seg.geometry));
}

Segmentation load_segmentation(const fs::path& stem) {
    Segmentation s;
    s.mask = LabelMask::from_image(load_pgm(fs::path(stem.string() + ".mask.pgm")));
    s.geometry = parse_geometry(read_text(fs::path(stem.string() + ".geom")));
    return s;
}

std::string image_stem(const std::string& image_path) { return fs::path(image_path).stem().string(); }

std::string to_string(ScoreLabel l) {
    switch (l) {
        case ScoreLabel::mated: return "mated";
        case ScoreLabel::nonmated: return "nonmated";
        case ScoreLabel::morph_a: return "morphA";
        case ScoreLabel::morph_b: return "morphB";
    }
    return "?";
}

ScoreLabel parse_score_label(std::string_view text) {
    for (auto l : {ScoreLabel::mated, ScoreLabel::nonmated, ScoreLabel::morph_a, ScoreLabel::morph_b})
        if (text == to_string(l)) return l;
    throw FormatError("scores: label must be mated, nonmated, morphA or morphB, got '" + std::string(text) + "'");
}

std::string scores_to_csv(const std::vector<ScoreRow>& rows) {
    std::string out = "idA,idB,label,score,shift\n";
    for (const auto& r : rows)
        out += r.id_a + ',' + r.id_b + ',' + to_string(r.label) + ',' + csv::format_double(r.score) + ',' +
               std::to_string(r.shift) + '\n';
    return out;
}

std::vector<ScoreRow> scores_from_csv(const std::string& text) {
    const auto table = csv::parse(text, {"idA", "idB", "label", "score", "shift"});
    std::vector<ScoreRow> rows;
    for (const auto& f : table.rows) {
        ScoreRow r;
        r.id_a = f[0];
        r.id_b = f[1];
        r.label = parse_score_label(f[2]);
        r.score = csv::parse_double(f[3], "score");
        r.shift = static_cast<long>(csv::parse_int(f[4], "shift"));
        rows.push_back(std::move(r));
    }
    return rows;
}

ScoreSet to_score_set(const std::vector<ScoreRow>& rows) {
    ScoreSet s;
    for (const auto& r : rows) {
        if (r.label == ScoreLabel::mated) s.mated.push_back(r.score);
        if (r.label == ScoreLabel::nonmated) s.nonmated.push_back(r.score);
    }
    return s;
}

bool has_morph_rows(const std::vector<ScoreRow>& rows) {
    return std::any_of(rows.begin(), rows.end(), [](const ScoreRow& r) {
        return r.label == ScoreLabel::morph_a || r.label == ScoreLabel::morph_b;
    });
}

std::vector<MorphAttackRecord> to_attack_records(const std::vector<std::vector<ScoreRow>>& per_system) {
    if (per_system.empty()) throw MetricError("attack records: no systems");
    const std::size_t n_sys = per_system.size();
    std::map<std::string, MorphAttackRecord> by_id;
    for (std::size_t s = 0; s < n_sys; ++s) {
        for (const auto& r : per_system[s]) {
            if (r.label != ScoreLabel::morph_a && r.label != ScoreLabel::morph_b) continue;
            auto& rec = by_id[r.id_a];
            rec.morph_id = r.id_a;
            if (rec.attempts.empty()) rec.attempts.assign(n_sys, std::vector<std::vector<double>>(2));
            rec.attempts[s][r.label == ScoreLabel::morph_a ? 0 : 1].push_back(r.score);
        }
    }
    std::vector<MorphAttackRecord> out;
    for (auto& [id, rec] : by_id) {
        for (std::size_t s = 0; s < n_sys; ++s)
            for (const auto& a : rec.attempts[s])
                if (a.empty()) throw MetricError("attack records: morph " + id + " lacks scores on system " + std::to_string(s));
        out.push_back(std::move(rec));
    }
    return out;
}

AttackTally tally_attacks(const std::vector<ScoreRow>& rows, double delta) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_morph;
    for (const auto& r : rows) {
        if (r.label == ScoreLabel::morph_a) by_morph[r.id_a].first.push_back(r.score);
        if (r.label == ScoreLabel::morph_b) by_morph[r.id_a].second.push_back(r.score);
    }
    AttackTally t;
    for (const auto& [id, ab] : by_morph) {
        for (std::size_t k = 0; k < std::min(ab.first.size(), ab.second.size()); ++k) {
            ++t.attempts;
            if (std::max(ab.first[k], ab.second[k]) <= delta) ++t.successes;
        }
    }
    return t;
}

std::vector<std::size_t> reference_indices(const DatasetManifest& manifest) {
    std::set<std::pair<std::string, EyeSide>> seen;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
        if (seen.insert({manifest.entries[i].subject_id, manifest.entries[i].eye_side}).second) out.push_back(i);
    return out;
}

std::vector<ScoreRow> compare_bonafide(const std::vector<CodedImage>& images, std::size_t max_shift) {
    std::map<std::pair<std::string, EyeSide>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < images.size(); ++i) groups[{images[i].subject, images[i].side}].push_back(i);
    std::vector<std::size_t> references;
    for (const auto& [key, members] : groups) references.push_back(members.front());
    std::sort(references.begin(), references.end());

    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (const auto& [key, members] : groups)
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) jobs.emplace_back(members[a], members[b]);
    for (std::size_t a = 0; a < references.size(); ++a)
        for (std::size_t b = a + 1; b < references.size(); ++b) {
            const auto& ia = images[references[a]];
            const auto& ib = images[references[b]];
            if (ia.side == ib.side && ia.subject != ib.subject) jobs.emplace_back(references[a], references[b]);
        }
    std::sort(jobs.begin(), jobs.end());

    for (const auto& img : images)
        if (!img.code) throw ParameterError("compare: no iris code for " + img.stem);
    std::vector<ScoreRow> rows(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t k) {
        const auto [a, b] = jobs[k];
        const auto score = hamming(*images[a].code, *images[b].code, max_shift);
        rows[k] = {images[a].stem, images[b].stem,
                   images[a].subject == images[b].subject ? ScoreLabel::mated : ScoreLabel::nonmated, score.hd,
                   score.best_shift};
    });
    return rows;
}

std::vector<ScoreRow> compare_morph(const std::string& morph_id, const IrisCode* morph_code,
                                         const std::vector<CodedImage>& images, std::size_t parent_a,
                                         std::size_t parent_b, std::size_t probe_cap, std::size_t max_shift) {
    std::vector<ScoreRow> rows;
    const std::size_t parents[2] = {parent_a, parent_b};
    for (int side = 0; side < 2; ++side) {
        const auto& parent = images.at(parents[side]);
        std::size_t attempt = 0;
        for (std::size_t i = 0; i < images.size() && attempt < probe_cap; ++i) {
            const auto& probe = images[i];
            if (i == parents[side] || probe.subject != parent.subject || probe.side != parent.side) continue;
            ++attempt;
            ScoreRow r{morph_id, probe.stem, side == 0 ? ScoreLabel::morph_a : ScoreLabel::morph_b, 1.0, 0};
            if (morph_code) {
                if (!probe.code) throw ParameterError("compare: no iris code for " + probe.stem);
                const auto score = hamming(*morph_code, *probe.code, max_shift);
                r.score = score.hd;
                r.shift = score.best_shift;
            }
            rows.push_back(r);
        }
        if (attempt == 0) throw ParameterError("compare: parent " + parent.stem + " has no probe images");
    }
    return rows;
}

StrategySummary summarize_strategy(const std::string& strategy, std::size_t pairs, std::size_t segmentation_failures,
                                   const std::vector<std::string>& system_names,
                                   const std::vector<std::vector<ScoreRow>>& per_system,
                                   const std::vector<ScoreSet>& bonafide, double delta, std::size_t probe_cap) {
    if (system_names.size() != per_system.size() || bonafide.size() != per_system.size())
        throw ParameterError("summarize_strategy: system count mismatch");
    StrategySummary summary;
    summary.strategy = strategy;
    summary.pairs = pairs;
    summary.segmentation_failures = segmentation_failures;
    const auto records = to_attack_records(per_system);
    for (std::size_t s = 0; s < per_system.size(); ++s) {
        StrategySystemSummary ss;
        ss.system = system_names[s];
        std::vector<double> all;
        for (const auto& r : per_system[s])
            if (r.label == ScoreLabel::morph_a || r.label == ScoreLabel::morph_b) all.push_back(r.score);
        ss.morph_scores = summarize(all);
        ss.attacks = tally_attacks(per_system[s], delta);
        const auto rates = rates_at(bonafide[s], delta);
        ss.fmr_at_delta = rates.fmr;
        ss.fnmr_at_delta = rates.fnmr;
        ss.mmpmr_minmax = mmpmr(records, delta, MmpmrVariant::minmax, Polarity::dissimilarity, s);
        ss.mmpmr_prodavg = mmpmr(records, delta, MmpmrVariant::prodavg, Polarity::dissimilarity, s);
        ss.rmmr_minmax = rmmr(ss.mmpmr_minmax, rates.fnmr);
        ss.rmmr_prodavg = rmmr(ss.mmpmr_prodavg, rates.fnmr);
        summary.systems.push_back(ss);
    }
    const std::vector<double> taus(per_system.size(), delta);
    summary.map = map_matrix(records, taus, probe_cap);
    return summary;
}

SystemSummary analyze_system(const std::string& name, const ScoreSet& scores, std::span<const double> fmr_targets,
                             std::optional<double> delta) {
    SystemSummary s;
    s.name = name;
    s.mated = summarize(scores.mated);
    s.nonmated = summarize(scores.nonmated);
    s.d_prime = d_prime(scores);
    const auto e = eer(scores);
    s.eer = e.rate;
    s.eer_threshold = e.threshold;
    const auto at_eer = rates_at(scores, e.threshold);
    s.thresholds.push_back({"eer", e.threshold, at_eer.fmr, at_eer.fnmr});
    for (double target : fmr_targets) {
        const auto op = fnmr_at_fmr(scores, target);
        const auto r = rates_at(scores, op.threshold);
        s.thresholds.push_back({"fmr<=" + csv::format_double(target), op.threshold, r.fmr, r.fnmr});
        s.fnmr_at.emplace_back(target, op.rate);
    }
    if (delta) {
        const auto r = rates_at(scores, *delta);
        s.thresholds.push_back({"fixed", *delta, r.fmr, r.fnmr});
    }
    return s;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson stats_json(const SummaryStats& s) { return {{"n", s.n}, {"mean", s.mean}, {"stddev", s.stddev}}; }

// JSON keys for rates use a fixed two-significant-digit style ("0.10").
std::string rate_key(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, v >= 0.01 ? "%.2f" : "%.3g", v);
    return buf;
}

}  // namespace

std::string VulnReport::to_json() const {
    ojson j;
    j["provenance"] = {{"config_hash", config_hash}, {"seed", seed}, {"tool_version", tool_version}};
    j["delta"] = delta;
    j["probe_cap"] = probe_cap;

    ojson systems_j = ojson::array();
    for (const auto& s : systems) {
        ojson sj;
        sj["system"] = s.name;
        sj["mated"] = stats_json(s.mated);
        sj["nonmated"] = stats_json(s.nonmated);
        sj["d_prime"] = s.d_prime;
        sj["eer"] = s.eer;
        ojson th = ojson::array();
        for (const auto& t : s.thresholds)
            th.push_back({{"criterion", t.criterion}, {"threshold", t.threshold}, {"fmr", t.fmr}, {"fnmr", t.fnmr}});
        sj["thresholds"] = th;
        ojson fa = ojson::object();
        for (const auto& [target, rate] : s.fnmr_at) fa[rate_key(target)] = rate;
        sj["fnmr_at"] = fa;
        systems_j.push_back(sj);
    }
    j["systems"] = systems_j;

    ojson strategies_j = ojson::array();
    for (const auto& st : strategies) {
        ojson stj;
        stj["strategy"] = st.strategy;
        stj["pairs"] = st.pairs;
        stj["segmentation_failures"] = st.segmentation_failures;
        ojson per = ojson::array();
        for (const auto& s : st.systems) {
            per.push_back({{"system", s.system},
                           {"morph_scores", stats_json(s.morph_scores)},
                           {"attack_attempts", s.attacks.attempts},
                           {"attack_successes", s.attacks.successes},
                           {"attack_success_rate", s.attacks.rate()},
                           {"threshold", {{"criterion", "fixed"}, {"value", delta}}},
                           {"fmr", s.fmr_at_delta},
                           {"fnmr", s.fnmr_at_delta},
                           {"mmpmr", {{"minmax", s.mmpmr_minmax}, {"prodavg", s.mmpmr_prodavg}}},
                           {"rmmr", {{"minmax", s.rmmr_minmax}, {"prodavg", s.rmmr_prodavg}}}});
        }
        stj["systems"] = per;
        stj["map"] = {{"rows", "attempts 1..probe_cap"}, {"cols", "systems 1..n"}, {"matrix", st.map}};
        strategies_j.push_back(stj);
    }
    j["vulnerability"] = strategies_j;

    if (!mad.empty()) {
        ojson mj = ojson::array();
        for (const auto& m : mad) {
            mj.push_back({{"train_morphs", m.train_type},
                          {"test_morphs", m.test_type},
                          {"extractor", m.extractor},
                          {"eer", m.report.eer},
                          {"macer", m.report.macer},
                          {"bpcer", m.report.bpcer},
                          {"bpcer_at", {{"0.10", m.report.bpcer_at_10}, {"0.01", m.report.bpcer_at_1}}}});
        }
        j["mad"] = mj;
    }
    return j.dump(2) + "\n";
}

namespace {

/// Records finished stages so a failure can list what is already on disk.
class Progress {
public:
    explicit Progress(fs::path out) : out_(std::move(out)) {}

    void done(const std::string& stage, std::size_t artefacts) { stages_.emplace_back(stage, artefacts); }

    [[noreturn]] void fail(const std::string& stage, const std::string& item, const std::string& what) {
        std::string text = "# completed stages (stage artefacts)\n";
        for (const auto& [s, n] : stages_) text += s + " " + std::to_string(n) + "\n";
        text += "# failed\n" + stage + " " + item + "\n";
        const auto path = out_ / "partial_manifest.txt";
        try {
            write_text(path, text);
        } catch (const std::exception&) {
        }
        throw PipelineError(stage, item, what + " (partial outputs: " + path.string() + ")");
    }

private:
    fs::path out_;
    std::vector<std::pair<std::string, std::size_t>> stages_;
};

fs::path with_suffix(const fs::path& stem, const std::string& suffix) { return fs::path(stem.string() + suffix); }

// Writes through a temporary name so an interrupted stage never leaves a
// truncated file that a resumed run would mistake for output.
template <typename Writer>
void produce(const fs::path& target, Writer&& write) {
    const auto tmp = with_suffix(target, ".part");
    write(tmp);
    fs::rename(tmp, target);
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

/// Runs body(i) for every item in parallel, converting the first failure
/// (lowest index) into a stage error.
template <typename Body>
void run_items(Progress& progress, const std::string& stage, const std::vector<std::string>& ids, Body&& body) {
    std::vector<std::optional<std::string>> errors(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        try {
            body(i);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (errors[i]) progress.fail(stage, ids[i], *errors[i]);
    progress.done(stage, ids.size());
}

struct Image {
    std::string stem;
    std::string subject;
    EyeSide side;
    fs::path path;
    double pupil_radius;
};

struct Dataset {
    DatasetManifest manifest;  // image paths relative to the run directory
    std::vector<Image> images;
};

Dataset stage_generate(const ExperimentConfig& cfg, Progress& progress) {
    const fs::path out = cfg.out_dir;
    DatasetManifest source;
    fs::path base;
    if (cfg.manifest) {
        source = DatasetManifest::load(*cfg.manifest);
        base = cfg.manifest->parent_path();
        progress.done("gen", 0);
    } else {
        const auto data = out / "data";
        const auto manifest_path = data / "manifest.csv";
        base = data;
        if (!fs::exists(manifest_path)) {
            try {
                generate_dataset(cfg.dataset, data);
            } catch (const std::exception& e) {
                progress.fail("gen", data.string(), e.what());
            }
        }
        source = DatasetManifest::load(manifest_path);
        // Regenerate any image deleted since the manifest was written.
        std::vector<std::tuple<std::size_t, EyeSide, std::size_t>> missing;
        for (std::size_t s = 0; s < cfg.dataset.n_subjects; ++s)
            for (EyeSide side : {EyeSide::left, EyeSide::right})
                for (std::size_t k = 0; k < cfg.dataset.images_per_subject; ++k)
                    if (!fs::exists(data / image_name(s, side, k))) missing.emplace_back(s, side, k);
        std::vector<std::string> ids;
        for (const auto& [s, side, k] : missing) ids.push_back(image_name(s, side, k));
        run_items(progress, "gen", ids, [&](std::size_t i) {
            const auto& [s, side, k] = missing[i];
            const auto [img, geom] = render_eye(capture_spec(cfg.dataset, s, side, k));
            produce(data / ids[i], [&](const fs::path& p) { save_pgm(p, img); });
        });
    }

    Dataset d;
    std::set<std::string> stems;
    for (const auto& e : source.entries) {
        const fs::path resolved = fs::path(e.image_path).is_absolute() ? fs::path(e.image_path) : base / e.image_path;
        auto rel = resolved.lexically_relative(out);
        if (rel.empty()) rel = fs::absolute(resolved);
        const auto stem = image_stem(e.image_path);
        if (!stems.insert(stem).second) progress.fail("gen", e.image_path, "duplicate image stem " + stem);
        d.images.push_back({stem, e.subject_id, e.eye_side, resolved, e.pupil_radius});
        auto entry = e;
        entry.image_path = rel.generic_string();
        d.manifest.entries.push_back(entry);
    }
    return d;
}

/// segment -> normalize -> encode for a list of images. With `tolerate`
/// set, segmentation failures are recorded in <seg>/<stem>.segfail instead
/// of aborting.
std::vector<std::vector<std::optional<IrisCode>>> process_images(const ExperimentConfig& cfg, Progress& progress,
                                                                 const std::string& prefix,
                                                                 const std::vector<std::string>& stems,
                                                                 const std::vector<fs::path>& paths,
                                                                 const fs::path& root, bool tolerate) {
    const auto seg_dir = root / "seg";
    const auto sheet_dir = root / "sheets";
    make_dirs(seg_dir);
    make_dirs(sheet_dir);

    run_items(progress, prefix + "segment", stems, [&](std::size_t i) {
        const auto stem = seg_dir / stems[i];
        if (fs::exists(with_suffix(stem, ".geom")) || fs::exists(with_suffix(stem, ".segfail"))) return;
        Segmentation seg;
        try {
            seg = segment_image(load_pgm(paths[i]));
        } catch (const Error& e) {
            if (!tolerate || e.is_validation()) throw;
            produce(with_suffix(stem, ".segfail"), [&](const fs::path& p) { write_text(p, std::string(e.what()) + "\n"); });
            return;
        }
        save_pgm(with_suffix(stem, ".mask.pgm"), seg.mask.to_image());
        produce(with_suffix(stem, ".geom"), [&](const fs::path& p) { write_text(p, format_geometry(seg.geometry)); });
    });

    auto failed = [&](std::size_t i) { return fs::exists(with_suffix(seg_dir / stems[i], ".segfail")); };

    run_items(progress, prefix + "normalize", stems, [&](std::size_t i) {
        const auto stem = sheet_dir / stems[i];
        if (failed(i) || fs::exists(with_suffix(stem, ".rsmask.pgm"))) return;
        const auto seg = load_segmentation(seg_dir / stems[i]);
        const auto sheet = unwrap(load_pgm(paths[i]), seg.geometry, cfg.sheet, seg.mask);
        save_pgm(with_suffix(stem, ".rs.pgm"), sheet.intensity_image());
        produce(with_suffix(stem, ".rsmask.pgm"), [&](const fs::path& p) { save_pgm(p, sheet.validity_image()); });
    });

    std::vector<std::vector<std::optional<IrisCode>>> codes(cfg.systems.size(),
                                                            std::vector<std::optional<IrisCode>>(stems.size()));
    for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
        const auto code_dir = root / "codes" / cfg.systems[s].name;
        make_dirs(code_dir);
        run_items(progress, prefix + "encode/" + cfg.systems[s].name, stems, [&](std::size_t i) {
            if (failed(i)) return;
            const auto path = code_dir / (stems[i] + ".irc");
            if (!fs::exists(path)) {
                const auto code = encode(RubberSheet::load(sheet_dir / stems[i]), cfg.systems[s].params);
                produce(path, [&](const fs::path& p) { code.save(p); });
            }
            codes[s][i] = IrisCode::load(path);
        });
    }
    return codes;
}

void write_if_missing(const fs::path& path, const std::string& text) {
    if (fs::exists(path)) return;
    produce(path, [&](const fs::path& p) { write_text(p, text); });
}

}  // namespace

VulnReport cmd_run(const ExperimentConfig& cfg) {
    cfg.validate();
    const fs::path out = cfg.out_dir;
    make_dirs(out);
    Progress progress(out);

    const auto hash = cfg.hash();
    const auto hash_path = out / "config.hash";
    if (fs::exists(hash_path)) {
        const auto stored = read_text(hash_path);
        if (stored != hash + "\n")
            progress.fail("config", hash_path.string(),
                          "config hash mismatch: directory was produced by config " +
                              stored.substr(0, stored.find('\n')) + ", current config hashes to " + hash);
    } else {
        write_text(out / "config.txt", cfg.canonical());
        produce(hash_path, [&](const fs::path& p) { write_text(p, hash + "\n"); });
    }
    progress.done("config", 1);

    const auto dataset = stage_generate(cfg, progress);
    std::vector<std::string> stems;
    std::vector<fs::path> paths;
    for (const auto& img : dataset.images) {
        stems.push_back(img.stem);
        paths.push_back(img.path);
    }
    const auto codes = process_images(cfg, progress, "", stems, paths, out, false);

    const auto references = reference_indices(dataset.manifest);

    std::vector<std::string> system_names;
    for (const auto& sys : cfg.systems) system_names.push_back(sys.name);
    auto coded = [&](std::size_t s) {
        std::vector<CodedImage> v;
        for (std::size_t i = 0; i < dataset.images.size(); ++i)
            v.push_back({stems[i], dataset.images[i].subject, dataset.images[i].side,
                         codes[s][i] ? &*codes[s][i] : nullptr});
        return v;
    };

    const auto score_dir = out / "scores";
    make_dirs(score_dir);
    std::vector<ScoreSet> score_sets;
    for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
        const auto path = score_dir / (system_names[s] + ".csv");
        try {
            if (!fs::exists(path)) {
                const auto rows = compare_bonafide(coded(s), cfg.max_shift);
                produce(path, [&](const fs::path& p) { write_text(p, scores_to_csv(rows)); });
            }
            score_sets.push_back(to_score_set(scores_from_csv(read_text(path))));
        } catch (const std::exception& e) {
            progress.fail("compare", system_names[s], e.what());
        }
        progress.done("compare/" + system_names[s], 1);
    }

    VulnReport report;
    report.config_hash = hash;
    report.seed = cfg.seed;
    report.delta = cfg.delta;
    report.probe_cap = cfg.probe_cap;
    for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
        try {
            report.systems.push_back(analyze_system(cfg.systems[s].name, score_sets[s], cfg.fmr_targets, cfg.delta));
        } catch (const std::exception& e) {
            progress.fail("report", cfg.systems[s].name, e.what());
        }
    }

    DatasetManifest ref_manifest;
    std::vector<std::size_t> ref_to_image;
    for (auto i : references) {
        ref_manifest.entries.push_back(dataset.manifest.entries[i]);
        ref_to_image.push_back(i);
    }

    std::map<PairStrategy, std::vector<fs::path>> morph_paths;
    for (const auto strategy : cfg.strategies) {
        const auto name = to_string(strategy);
        const auto pairs_path = out / ("pairs_" + name + ".csv");
        std::vector<MorphPair> pairs;
        try {
            if (!fs::exists(pairs_path)) {
                pairs = strategy == PairStrategy::radius
                            ? select_by_radius(ref_manifest, cfg.pair_count)
                            : select_random(ref_manifest, cfg.pair_count, derive_seed(cfg.seed, {0x9a125}));
                produce(pairs_path, [&](const fs::path& p) { write_text(p, pairs_to_csv(ref_manifest, pairs)); });
            }
            pairs = pairs_from_csv(ref_manifest, read_text(pairs_path));
        } catch (const std::exception& e) {
            progress.fail("select-pairs", name, e.what());
        }
        progress.done("select-pairs/" + name, 1);

        const auto morph_dir = out / "morphs" / name;
        make_dirs(morph_dir);
        std::vector<std::string> morph_stems;
        std::vector<fs::path> mpaths;
        for (const auto& p : pairs) {
            const auto file = morph_file_name(stems[ref_to_image[p.a]], stems[ref_to_image[p.b]], cfg.alpha);
            morph_stems.push_back(image_stem(file));
            mpaths.push_back(morph_dir / file);
        }
        run_items(progress, "morph/" + name, morph_stems, [&](std::size_t k) {
            if (fs::exists(mpaths[k])) return;
            const auto ia = ref_to_image[pairs[k].a], ib = ref_to_image[pairs[k].b];
            const auto ga = load_segmentation(out / "seg" / stems[ia]).geometry;
            const auto gb = load_segmentation(out / "seg" / stems[ib]).geometry;
            const auto m = morph_pair(load_pgm(paths[ia]), ga, load_pgm(paths[ib]), gb, cfg.alpha, stems[ia], stems[ib]);
            produce(mpaths[k], [&](const fs::path& p) { save_pgm(p, m.morph); });
        });
        morph_paths[strategy] = mpaths;

        const auto morph_codes = process_images(cfg, progress, "morph/" + name + "/", morph_stems, mpaths, morph_dir, true);

        std::size_t seg_failures = 0;
        for (const auto& c : morph_codes.front())
            if (!c) ++seg_failures;

        std::vector<std::vector<ScoreRow>> per_system;
        for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
            const auto path = score_dir / ("morph_" + name + "_" + system_names[s] + ".csv");
            if (!fs::exists(path)) {
                const auto images = coded(s);
                std::vector<std::vector<ScoreRow>> rows(pairs.size());
                run_items(progress, "compare-morphs/" + name + "/" + system_names[s], morph_stems, [&](std::size_t k) {
                    const auto& mc = morph_codes[s][k];
                    rows[k] = compare_morph(morph_stems[k], mc ? &*mc : nullptr, images, ref_to_image[pairs[k].a],
                                            ref_to_image[pairs[k].b], cfg.probe_cap, cfg.max_shift);
                });
                std::vector<ScoreRow> flat;
                for (auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
                produce(path, [&](const fs::path& p) { write_text(p, scores_to_csv(flat)); });
            }
            per_system.push_back(scores_from_csv(read_text(path)));
        }

        StrategySummary summary;
        try {
            summary = summarize_strategy(name, pairs.size(), seg_failures, system_names, per_system, score_sets,
                                         cfg.delta, cfg.probe_cap);
        } catch (const std::exception& e) {
            progress.fail("report", name, e.what());
        }
        report.strategies.push_back(std::move(summary));
    }

    if (cfg.mad_enabled) {
        const auto mad_dir = out / "mad";
        make_dirs(mad_dir);
        std::vector<BonafideImage> bonafide;
        for (const auto& img : dataset.images) bonafide.push_back({img.subject, load_pgm(img.path)});
        auto load_all = [](const std::vector<fs::path>& ps) {
            std::vector<GrayImage> v;
            for (const auto& p : ps) v.push_back(load_pgm(p));
            return v;
        };
        const auto extractor = to_string(cfg.mad_extractor);
        for (std::size_t x = 0; x < cfg.strategies.size(); ++x) {
            for (std::size_t y = 0; y < cfg.strategies.size(); ++y) {
                if (x == y) continue;
                const auto tx = to_string(cfg.strategies[x]), ty = to_string(cfg.strategies[y]);
                const auto stem = mad_dir / ("train_" + tx + "_test_" + ty + "_" + extractor);
                MadSummary ms{tx, ty, extractor, {}};
                try {
                    ms.report = smad_experiment(bonafide, load_all(morph_paths[cfg.strategies[x]]),
                                                load_all(morph_paths[cfg.strategies[y]]), cfg.mad_extractor,
                                                derive_seed(cfg.seed, {0x5a17}), cfg.mad_forest);
                } catch (const std::exception& e) {
                    progress.fail("mad", stem.filename().string(), e.what());
                }
                write_if_missing(with_suffix(stem, ".json"), ms.report.to_json());
                write_if_missing(with_suffix(stem, "_det.csv"), ms.report.det_to_csv());
                report.mad.push_back(std::move(ms));
            }
        }
        progress.done("mad", report.mad.size());
    }

    write_if_missing(out / "report.json", report.to_json());
    progress.done("report", 1);
    return report;
}

}  // namespace morphiris
