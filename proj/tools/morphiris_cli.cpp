#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "morphiris/config.hpp"
#include "morphiris/csv.hpp"
#include "morphiris/errors.hpp"
#include "morphiris/forest.hpp"
#include "morphiris/iriscode.hpp"
#include "morphiris/mad.hpp"
#include "morphiris/morph.hpp"
#include "morphiris/normalization.hpp"
#include "morphiris/pairs.hpp"
#include "morphiris/parallel.hpp"
#include "morphiris/pipeline.hpp"
#include "morphiris/random.hpp"
#include "morphiris/segmentation.hpp"
#include "morphiris/synth.hpp"

namespace fs = std::filesystem;
using namespace morphiris;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    return fs::path(p).is_absolute() ? fs::path(p) : base / p;
}

fs::path parent_or_dot(const fs::path& p) { return p.parent_path().empty() ? fs::path(".") : p.parent_path(); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_text(out, text);
}

std::vector<fs::path> images_in(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ParameterError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& f : csv::split_line(text)) out.push_back(csv::parse_double(f, what));
    if (out.empty()) throw ParameterError(what + ": empty list");
    return out;
}

/// Pair rows with image paths resolved against the pair file's directory.
struct PairPaths {
    fs::path a;
    fs::path b;
};

std::vector<PairPaths> read_pair_paths(const fs::path& pairs_file) {
    const auto table = csv::parse(read_text(pairs_file), {"pathA", "pathB", "strategy"});
    const auto base = parent_or_dot(pairs_file);
    std::vector<PairPaths> out;
    for (const auto& row : table.rows) out.push_back({resolve(base, row[0]), resolve(base, row[1])});
    return out;
}

struct Args {
    // shared
    std::string manifest, out, seed_text;
    std::uint64_t seed = 0;
    // gen-synthetic
    std::size_t subjects = 10, images = 4;
    double pupil_min = 20.0, pupil_max = 40.0;
    // segment / normalize / encode
    std::string image, image_dir, seg_dir, sheets;
    Thresholds thresholds;
    bool keep_going = false;
    std::size_t rows = 64, cols = 512;
    CodecParams codec;
    // select-pairs / morph
    std::string strategy = "radius";
    std::size_t count = 20;
    bool all_images = false;
    std::string pairs;
    double alpha = 0.5;
    // compare
    std::string codes, morph_codes, morph_out;
    std::size_t probe_cap = 5, max_shift = 8;
    // vuln-report
    std::vector<std::string> scores, morph_scores;
    std::string fmr_targets = "0.10,0.05,0.01";
    double delta = kDefaultDelta;
    // mad
    std::string morphs, model, extractor, report, det;
    ForestParams forest;
    bool oob = false;
    // run
    std::string config;
};

struct InputImage {
    std::string stem;
    fs::path path;
};

/// Images named by --manifest or, with --images, every .pgm in a directory.
std::vector<InputImage> input_images(const Args& a, const char* command) {
    std::vector<InputImage> out;
    if (!a.image_dir.empty()) {
        if (!a.manifest.empty()) throw ParameterError(std::string(command) + ": give --manifest or --images, not both");
        for (const auto& p : images_in(a.image_dir)) out.push_back({p.stem().string(), p});
        return out;
    }
    if (a.manifest.empty()) throw ParameterError(std::string(command) + ": give --manifest or --images");
    const auto m = DatasetManifest::load(a.manifest);
    const auto base = parent_or_dot(a.manifest);
    for (const auto& e : m.entries) out.push_back({image_stem(e.image_path), resolve(base, e.image_path)});
    return out;
}

fs::path marker(const fs::path& dir, const std::string& stem) { return dir / (stem + ".segfail"); }

int cmd_gen(const Args& a) {
    DatasetOptions opt;
    opt.n_subjects = a.subjects;
    opt.images_per_subject = a.images;
    opt.pupil_radius_range = {a.pupil_min, a.pupil_max};
    opt.seed = a.seed;
    const auto m = generate_dataset(opt, a.out);
    std::cout << "wrote " << m.entries.size() << " images and " << (fs::path(a.out) / "manifest.csv").string() << "\n";
    return 0;
}

int cmd_segment(const Args& a) {
    ensure_dir(a.out);
    if (!a.image.empty()) {
        const auto seg = segment_image(load_pgm(a.image), a.thresholds);
        save_segmentation(fs::path(a.out) / image_stem(a.image), seg);
        std::cout << format_geometry(seg.geometry);
        return 0;
    }
    const auto inputs = input_images(a, "segment");
    std::atomic<std::size_t> failures{0};
    parallel_for(inputs.size(), [&](std::size_t i) {
        const auto& in = inputs[i];
        try {
            save_segmentation(fs::path(a.out) / in.stem, segment_image(load_pgm(in.path), a.thresholds));
        } catch (const Error& err) {
            if (!a.keep_going || err.is_validation()) throw PipelineError("segment", in.path.string(), err.what());
            write_text(marker(a.out, in.stem), std::string(err.what()) + "\n");
            ++failures;
        }
    });
    std::cout << "segmented " << inputs.size() - failures << " of " << inputs.size() << " images";
    if (failures) std::cout << " (" << failures << " failures marked .segfail)";
    std::cout << "\n";
    return 0;
}

int cmd_normalize(const Args& a) {
    ensure_dir(a.out);
    const auto inputs = input_images(a, "normalize");
    std::atomic<std::size_t> skipped{0};
    parallel_for(inputs.size(), [&](std::size_t i) {
        const auto& in = inputs[i];
        if (fs::exists(marker(a.seg_dir, in.stem))) {
            fs::copy_file(marker(a.seg_dir, in.stem), marker(a.out, in.stem), fs::copy_options::overwrite_existing);
            ++skipped;
            return;
        }
        try {
            const auto seg = load_segmentation(fs::path(a.seg_dir) / in.stem);
            unwrap(load_pgm(in.path), seg.geometry, {a.rows, a.cols}, seg.mask).save(fs::path(a.out) / in.stem);
        } catch (const Error& err) {
            throw PipelineError("normalize", in.path.string(), err.what());
        }
    });
    std::cout << "normalized " << inputs.size() - skipped << " images\n";
    return 0;
}

int cmd_encode(const Args& a) {
    ensure_dir(a.out);
    std::vector<std::string> stems;
    for (const auto& p : images_in(a.sheets)) {
        const auto name = p.filename().string();
        if (name.size() > 7 && name.ends_with(".rs.pgm")) stems.push_back(name.substr(0, name.size() - 7));
    }
    parallel_for(stems.size(), [&](std::size_t i) {
        try {
            encode(RubberSheet::load(fs::path(a.sheets) / stems[i]), a.codec).save(fs::path(a.out) / (stems[i] + ".irc"));
        } catch (const Error& err) {
            throw PipelineError("encode", stems[i], err.what());
        }
    });
    for (const auto& e : fs::directory_iterator(a.sheets))
        if (e.path().extension() == ".segfail")
            fs::copy_file(e.path(), fs::path(a.out) / e.path().filename(), fs::copy_options::overwrite_existing);
    std::cout << "encoded " << stems.size() << " sheets\n";
    return 0;
}

int cmd_select_pairs(const Args& a) {
    const auto full = DatasetManifest::load(a.manifest);
    const auto base = parent_or_dot(a.manifest);
    const auto out_dir = fs::absolute(parent_or_dot(a.out)).lexically_normal();

    DatasetManifest pool;
    std::vector<std::size_t> picked;
    if (a.all_images) {
        for (std::size_t i = 0; i < full.entries.size(); ++i) picked.push_back(i);
    } else {
        picked = reference_indices(full);
    }
    for (auto i : picked) {
        auto e = full.entries[i];
        const auto abs = fs::absolute(resolve(base, e.image_path)).lexically_normal();
        e.image_path = abs.lexically_relative(out_dir).generic_string();
        pool.entries.push_back(e);
    }
    const auto strategy = parse_strategy(a.strategy);
    if (strategy == PairStrategy::random && a.seed_text.empty()) throw ParameterError("select-pairs: random strategy needs --seed");
    const auto pairs = strategy == PairStrategy::radius ? select_by_radius(pool, a.count)
                                                        : select_random(pool, a.count, a.seed);
    write_text(a.out, pairs_to_csv(pool, pairs));
    std::cout << "selected " << pairs.size() << " pairs\n";
    return 0;
}

int cmd_morph(const Args& a) {
    ensure_dir(a.out);
    const auto pairs = read_pair_paths(a.pairs);
    parallel_for(pairs.size(), [&](std::size_t i) {
        const auto& p = pairs[i];
        const auto sa = image_stem(p.a.string()), sb = image_stem(p.b.string());
        try {
            const auto ia = load_pgm(p.a), ib = load_pgm(p.b);
            const auto m = morph_pair(ia, segment_image(ia).geometry, ib, segment_image(ib).geometry, a.alpha, sa, sb);
            save_pgm(fs::path(a.out) / morph_file_name(sa, sb, a.alpha), m.morph);
        } catch (const Error& err) {
            throw PipelineError("morph", sa + "," + sb, err.what());
        }
    });
    std::cout << "wrote " << pairs.size() << " morphs\n";
    return 0;
}

int cmd_compare(const Args& a) {
    const auto m = DatasetManifest::load(a.manifest);
    std::vector<IrisCode> codes(m.entries.size());
    std::vector<CodedImage> images;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto stem = image_stem(m.entries[i].image_path);
        codes[i] = IrisCode::load(fs::path(a.codes) / (stem + ".irc"));
        images.push_back({stem, m.entries[i].subject_id, m.entries[i].eye_side, &codes[i]});
    }
    if (!a.out.empty()) {
        write_text(a.out, scores_to_csv(compare_bonafide(images, a.max_shift)));
        std::cout << "wrote " << a.out << "\n";
    }
    if (!a.pairs.empty()) {
        if (a.morph_codes.empty() || a.morph_out.empty())
            throw ParameterError("compare: --pairs needs --morph-codes and --morph-out");
        std::map<std::string, std::size_t> by_stem;
        for (std::size_t i = 0; i < images.size(); ++i) by_stem[images[i].stem] = i;
        std::vector<ScoreRow> rows;
        for (const auto& p : read_pair_paths(a.pairs)) {
            const auto sa = image_stem(p.a.string()), sb = image_stem(p.b.string());
            if (!by_stem.count(sa) || !by_stem.count(sb))
                throw ParameterError("compare: pair " + sa + "," + sb + " is not in the manifest");
            const auto morph_id = image_stem(morph_file_name(sa, sb, a.alpha));
            const auto code_path = fs::path(a.morph_codes) / (morph_id + ".irc");
            std::optional<IrisCode> mc;
            if (fs::exists(code_path))
                mc = IrisCode::load(code_path);
            else if (!fs::exists(marker(a.morph_codes, morph_id)))
                throw IoError("compare: no iris code " + code_path.string() + " and no segmentation-failure marker");
            const auto r = compare_morph(morph_id, mc ? &*mc : nullptr, images, by_stem[sa], by_stem[sb], a.probe_cap,
                                         a.max_shift);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        write_text(a.morph_out, scores_to_csv(rows));
        std::cout << "wrote " << a.morph_out << "\n";
    }
    if (a.out.empty() && a.pairs.empty()) throw ParameterError("compare: nothing to do (give --out and/or --pairs)");
    return 0;
}

int cmd_vuln_report(const Args& a) {
    const auto targets = parse_list(a.fmr_targets, "--fmr-targets");
    for (double t : targets)
        if (!(t > 0.0 && t < 1.0)) throw ParameterError("--fmr-targets: values must lie in (0, 1)");

    VulnReport report;
    report.delta = a.delta;
    report.probe_cap = a.probe_cap;
    std::string provenance;
    std::vector<ScoreSet> sets;
    std::vector<std::string> names;
    std::vector<std::vector<ScoreRow>> tables;
    if (!a.morph_scores.empty() && a.morph_scores.size() != a.scores.size())
        throw ParameterError("vuln-report: give one --morph-scores file per --scores file");
    for (std::size_t k = 0; k < a.scores.size(); ++k) {
        const auto text = read_text(a.scores[k]);
        provenance += text;
        tables.push_back(scores_from_csv(text));
        if (!a.morph_scores.empty()) {
            const auto morph_text = read_text(a.morph_scores[k]);
            provenance += morph_text;
            for (auto& r : scores_from_csv(morph_text)) tables.back().push_back(std::move(r));
        }
        sets.push_back(to_score_set(tables.back()));
        names.push_back(fs::path(a.scores[k]).stem().string());
        report.systems.push_back(analyze_system(names.back(), sets.back(), targets, a.delta));
    }
    const auto with_morphs = std::count_if(tables.begin(), tables.end(), [](const auto& t) { return has_morph_rows(t); });
    if (with_morphs != 0 && static_cast<std::size_t>(with_morphs) != tables.size())
        throw ParameterError("vuln-report: either every scores file or none must contain morph rows");
    if (with_morphs != 0) {
        std::set<std::string> ids;
        for (const auto& r : tables.front())
            if (r.label == ScoreLabel::morph_a || r.label == ScoreLabel::morph_b) ids.insert(r.id_a);
        report.strategies.push_back(summarize_strategy("morphs", ids.size(), 0, names, tables, sets, a.delta, a.probe_cap));
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(provenance)));
    report.config_hash = hash;
    emit(report.to_json(), a.out);
    return 0;
}

std::vector<BonafideImage> load_bonafide(const std::string& manifest) {
    const auto m = DatasetManifest::load(manifest);
    const auto base = parent_or_dot(manifest);
    std::vector<BonafideImage> out;
    for (const auto& e : m.entries) out.push_back({e.subject_id, load_pgm(resolve(base, e.image_path))});
    return out;
}

std::vector<GrayImage> load_images(const std::string& dir) {
    std::vector<GrayImage> out;
    for (const auto& p : images_in(dir)) out.push_back(load_pgm(p));
    if (out.empty()) throw ParameterError("no .pgm images in " + dir);
    return out;
}

int cmd_mad_train(const Args& a) {
    const auto extractor = parse_extractor(a.extractor.empty() ? "freq" : a.extractor);
    std::vector<GrayImage> imgs;
    std::vector<ClassLabel> labels;
    for (auto& b : load_bonafide(a.manifest)) {
        imgs.push_back(std::move(b.image));
        labels.push_back(ClassLabel::bonafide);
    }
    for (auto& m : load_images(a.morphs)) {
        imgs.push_back(std::move(m));
        labels.push_back(ClassLabel::morph);
    }
    auto params = a.forest;
    params.seed = a.seed;
    const auto features = extract_all(imgs, extractor);
    if (a.oob) {
        auto [model, acc] = rf_train_oob(features, labels, params);
        model.feature_set = to_string(extractor);
        model.save(a.out);
        std::cout << "out-of-bag accuracy " << acc << "\n";
    } else {
        auto model = rf_train(features, labels, params);
        model.feature_set = to_string(extractor);
        model.save(a.out);
    }
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

int cmd_mad_eval(const Args& a) {
    const auto model = ForestModel::load(a.model);
    std::string name = a.extractor.empty() ? model.feature_set : a.extractor;
    if (name.empty()) name = "freq";
    if (!model.feature_set.empty() && name != model.feature_set)
        throw ParameterError("--extractor " + name + " does not match the model, which was trained on " +
                             model.feature_set + " features");
    const auto extractor = parse_extractor(name);
    std::vector<GrayImage> bona;
    for (auto& b : load_bonafide(a.manifest)) bona.push_back(std::move(b.image));
    const auto morphs = load_images(a.morphs);
    auto score = [&](const std::vector<GrayImage>& v) {
        std::vector<double> s;
        for (const auto& f : extract_all(v, extractor)) s.push_back(rf_predict(model, f));
        return s;
    };
    auto report = evaluate_detector(score(morphs), score(bona));
    report.n_test_bonafide = bona.size();
    report.n_test_morph = morphs.size();
    emit(report.to_json(), a.report);
    if (!a.det.empty()) write_text(a.det, report.det_to_csv());
    return 0;
}

int cmd_run_config(const Args& a) {
    const auto cfg = load_config(a.config);
    const auto report = cmd_run(cfg);
    std::cout << "report: " << (cfg.out_dir / "report.json").string() << "\n";
    for (const auto& s : report.systems)
        std::printf("%s: d'=%.3f EER=%.4f\n", s.name.c_str(), s.d_prime, s.eer);
    for (const auto& st : report.strategies)
        for (const auto& s : st.systems)
            std::printf("%s/%s: attack success %.3f (%zu/%zu), MMPMR minmax %.3f\n", st.strategy.c_str(),
                        s.system.c_str(), s.attacks.rate(), s.attacks.successes, s.attacks.attempts, s.mmpmr_minmax);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iris morphing attack toolkit"};
    app.require_subcommand(1);
    Args a;

    auto seed_opt = [&](CLI::App* c, bool required) {
        auto* o = c->add_option("--seed", a.seed_text, "random seed (unsigned integer)");
        if (required) o->required();
    };

    auto* gen = app.add_subcommand("gen-synthetic", "render a synthetic periocular dataset");
    gen->add_option("--subjects", a.subjects, "number of subjects")->check(CLI::PositiveNumber);
    gen->add_option("--images", a.images, "images per subject and eye")->check(CLI::PositiveNumber);
    gen->add_option("--pupil-min", a.pupil_min, "smallest pupil radius");
    gen->add_option("--pupil-max", a.pupil_max, "largest pupil radius");
    gen->add_option("--out", a.out, "output directory")->required();
    seed_opt(gen, true);

    auto* seg = app.add_subcommand("segment", "threshold segmentation and circle fitting");
    seg->add_option("--manifest", a.manifest, "dataset manifest");
    seg->add_option("--image", a.image, "single image instead of a manifest");
    seg->add_option("--images", a.image_dir, "every .pgm in a directory (e.g. morphs)");
    seg->add_flag("--keep-going", a.keep_going, "record failures as <stem>.segfail and continue");
    seg->add_option("--out", a.out, "output directory for .mask.pgm/.geom")->required();
    seg->add_option("--pupil-thresh", a.thresholds.pupil, "intensities below this are pupil");
    seg->add_option("--iris-thresh", a.thresholds.iris, "intensities below this (and not pupil) are iris");

    auto* norm = app.add_subcommand("normalize", "rubber-sheet unwrapping");
    norm->add_option("--manifest", a.manifest, "dataset manifest");
    norm->add_option("--images", a.image_dir, "every .pgm in a directory (e.g. morphs)");
    norm->add_option("--seg", a.seg_dir, "segmentation directory")->required();
    norm->add_option("--out", a.out, "output directory for .rs.pgm/.rsmask.pgm")->required();
    norm->add_option("--rows", a.rows, "radial samples")->check(CLI::PositiveNumber);
    norm->add_option("--cols", a.cols, "angular samples")->check(CLI::PositiveNumber);

    auto* enc = app.add_subcommand("encode", "log-Gabor iris codes");
    enc->add_option("--sheets", a.sheets, "rubber-sheet directory")->required();
    enc->add_option("--out", a.out, "output directory for .irc")->required();
    enc->add_option("--wavelength", a.codec.wavelength, "filter wavelength in samples");
    enc->add_option("--sigma-ratio", a.codec.sigma_ratio, "log-Gabor bandwidth ratio");
    enc->add_option("--rows-used", a.codec.rows_used, "encoded rows")->check(CLI::PositiveNumber);

    auto* sel = app.add_subcommand("select-pairs", "choose morph pairs");
    sel->add_option("--manifest", a.manifest, "dataset manifest")->required();
    sel->add_option("--strategy", a.strategy, "radius or random");
    sel->add_option("--count", a.count, "number of pairs")->check(CLI::PositiveNumber);
    sel->add_flag("--all-images", a.all_images, "pair any image, not only the first of each eye");
    sel->add_option("--out", a.out, "pairs CSV")->required();
    seed_opt(sel, false);

    auto* mor = app.add_subcommand("morph", "create morphs from a pair list");
    mor->add_option("--pairs", a.pairs, "pairs CSV")->required();
    mor->add_option("--alpha", a.alpha, "blending factor")->check(CLI::Range(0.0, 1.0));
    mor->add_option("--out", a.out, "output directory")->required();

    auto* cmp = app.add_subcommand("compare", "mated, non-mated and morph attack scores");
    cmp->add_option("--manifest", a.manifest, "dataset manifest")->required();
    cmp->add_option("--codes", a.codes, "iris code directory of the dataset")->required();
    cmp->add_option("--out", a.out, "bona fide scores CSV");
    cmp->add_option("--max-shift", a.max_shift, "rotation search range in columns");
    cmp->add_option("--pairs", a.pairs, "pairs CSV of the morphs");
    cmp->add_option("--alpha", a.alpha, "blending factor used for the morphs");
    cmp->add_option("--morph-codes", a.morph_codes, "iris code directory of the morphs");
    cmp->add_option("--morph-out", a.morph_out, "morph attack scores CSV");
    cmp->add_option("--probe-cap", a.probe_cap, "attempts per contributing subject")->check(CLI::PositiveNumber);

    auto* vr = app.add_subcommand("vuln-report", "metrics report from score files");
    vr->add_option("--scores", a.scores, "scores CSV, one per recognition system")->required();
    vr->add_option("--morph-scores", a.morph_scores, "morph attack scores CSV for the --scores file in the same position");
    vr->add_option("--fmr-targets", a.fmr_targets, "comma-separated FMR operating points");
    vr->add_option("--delta", a.delta, "decision threshold for attacks");
    vr->add_option("--probe-cap", a.probe_cap, "attempts per subject for MAP")->check(CLI::PositiveNumber);
    vr->add_option("--out", a.out, "report JSON (stdout when absent)");

    auto* mt = app.add_subcommand("mad-train", "train the morphing attack detector");
    mt->add_option("--bonafide", a.manifest, "bona fide manifest")->required();
    mt->add_option("--morphs", a.morphs, "directory of morph images")->required();
    mt->add_option("--extractor", a.extractor, "gray or freq (default freq)");
    mt->add_option("--trees", a.forest.n_trees, "number of trees")->check(CLI::PositiveNumber);
    mt->add_option("--max-depth", a.forest.max_depth, "maximum tree depth");
    mt->add_option("--min-leaf", a.forest.min_leaf, "minimum samples per leaf")->check(CLI::PositiveNumber);
    mt->add_option("--mtry", a.forest.mtry, "features tried per split (0 = sqrt)");
    mt->add_flag("--oob", a.oob, "report out-of-bag accuracy");
    mt->add_option("--out", a.out, "model file")->required();
    seed_opt(mt, true);

    auto* me = app.add_subcommand("mad-eval", "evaluate a trained detector");
    me->add_option("--model", a.model, "model file")->required();
    me->add_option("--bonafide", a.manifest, "bona fide manifest")->required();
    me->add_option("--morphs", a.morphs, "directory of morph images")->required();
    me->add_option("--extractor", a.extractor, "gray or freq (default: the one stored in the model)");
    me->add_option("--report", a.report, "report JSON (stdout when absent)");
    me->add_option("--det", a.det, "DET CSV");

    auto* run = app.add_subcommand("run", "full experiment from a config file");
    run->add_option("--config", a.config, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!a.seed_text.empty()) {
            const auto v = csv::parse_int(a.seed_text, "--seed");
            if (v < 0) throw ParameterError("--seed must be non-negative");
            a.seed = static_cast<std::uint64_t>(v);
        }
        if (gen->parsed()) return cmd_gen(a);
        if (seg->parsed()) return cmd_segment(a);
        if (norm->parsed()) return cmd_normalize(a);
        if (enc->parsed()) return cmd_encode(a);
        if (sel->parsed()) return cmd_select_pairs(a);
        if (mor->parsed()) return cmd_morph(a);
        if (cmp->parsed()) return cmd_compare(a);
        if (vr->parsed()) return cmd_vuln_report(a);
        if (mt->parsed()) return cmd_mad_train(a);
        if (me->parsed()) return cmd_mad_eval(a);
        if (run->parsed()) return cmd_run_config(a);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_validation() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
