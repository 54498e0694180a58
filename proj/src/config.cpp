#include "morphiris/config.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "morphiris/csv.hpp"
#include "morphiris/errors.hpp"
#include "morphiris/image.hpp"
#include "morphiris/random.hpp"

namespace morphiris {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    for (const auto& f : csv::split_line(value)) {
        auto t = trim(f);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::size_t to_count(const std::string& v, const std::string& key) {
    const auto n = csv::parse_int(v, key);
    if (n < 0) throw ParameterError("config: " + key + " must be non-negative");
    return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParameterError("config: " + key + " expects true/false, got '" + v + "'");
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
    return out;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
    using csv::format_double;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("seed", std::to_string(seed));
    if (manifest) {
        kv.emplace_back("dataset.manifest", manifest->generic_string());
    } else {
        kv.emplace_back("dataset.subjects", std::to_string(dataset.n_subjects));
        kv.emplace_back("dataset.images_per_subject", std::to_string(dataset.images_per_subject));
        kv.emplace_back("dataset.pupil_min", format_double(dataset.pupil_radius_range.first));
        kv.emplace_back("dataset.pupil_max", format_double(dataset.pupil_radius_range.second));
        kv.emplace_back("dataset.iris_min", format_double(dataset.iris_radius_range.first));
        kv.emplace_back("dataset.iris_max", format_double(dataset.iris_radius_range.second));
        kv.emplace_back("dataset.width", std::to_string(dataset.width));
        kv.emplace_back("dataset.height", std::to_string(dataset.height));
        kv.emplace_back("dataset.center_jitter", format_double(dataset.center_jitter));
        kv.emplace_back("dataset.max_rotation", format_double(dataset.max_rotation));
        kv.emplace_back("dataset.max_radial_shift", format_double(dataset.max_radial_shift));
        kv.emplace_back("dataset.max_occlusion", format_double(dataset.max_occlusion));
        kv.emplace_back("dataset.noise_sigma", format_double(dataset.noise_sigma));
    }
    std::vector<std::string> names;
    for (auto s : strategies) names.push_back(to_string(s));
    kv.emplace_back("pairs.strategies", join(names));
    kv.emplace_back("pairs.count", std::to_string(pair_count));
    kv.emplace_back("morph.alpha", format_double(alpha));
    kv.emplace_back("sheet.rows", std::to_string(sheet.rows));
    kv.emplace_back("sheet.cols", std::to_string(sheet.cols));
    std::vector<std::string> waves;
    for (const auto& s : systems) waves.push_back(format_double(s.params.wavelength));
    kv.emplace_back("codec.wavelengths", join(waves));
    if (!systems.empty()) {
        kv.emplace_back("codec.sigma_ratio", format_double(systems.front().params.sigma_ratio));
        kv.emplace_back("codec.rows_used", std::to_string(systems.front().params.rows_used));
        kv.emplace_back("codec.epsilon", format_double(systems.front().params.epsilon));
    }
    kv.emplace_back("compare.max_shift", std::to_string(max_shift));
    kv.emplace_back("compare.probe_cap", std::to_string(probe_cap));
    kv.emplace_back("thresholds.delta", format_double(delta));
    std::vector<std::string> targets;
    for (double t : fmr_targets) targets.push_back(format_double(t));
    kv.emplace_back("thresholds.fmr_targets", join(targets));
    kv.emplace_back("mad.enabled", mad_enabled ? "true" : "false");
    if (mad_enabled) {
        kv.emplace_back("mad.extractor", to_string(mad_extractor));
        kv.emplace_back("mad.trees", std::to_string(mad_forest.n_trees));
        kv.emplace_back("mad.max_depth", std::to_string(mad_forest.max_depth));
        kv.emplace_back("mad.min_leaf", std::to_string(mad_forest.min_leaf));
        kv.emplace_back("mad.mtry", std::to_string(mad_forest.mtry));
    }
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
}

void ExperimentConfig::validate() const {
    if (systems.empty()) throw ParameterError("config: at least one codec system is required");
    if (strategies.empty()) throw ParameterError("config: pairs.strategies is empty");
    if (pair_count == 0) throw ParameterError("config: pairs.count must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("config: morph.alpha must lie in [0, 1]");
    if (sheet.rows < 2 || sheet.cols < 8) throw ParameterError("config: sheet dimensions too small");
    if (probe_cap == 0) throw ParameterError("config: compare.probe_cap must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("config: thresholds.delta must lie in (0, 1)");
    for (double t : fmr_targets)
        if (!(t > 0.0 && t < 1.0)) throw ParameterError("config: FMR targets must lie in (0, 1)");
    for (const auto& s : systems) {
        if (!(s.params.wavelength >= 2.0)) throw ParameterError("config: codec wavelength must be >= 2");
        if (s.params.rows_used == 0 || s.params.rows_used > sheet.rows)
            throw ParameterError("config: codec.rows_used must lie in [1, sheet.rows]");
    }
    if (manifest && !std::filesystem::exists(*manifest))
        throw ParameterError("config: dataset.manifest " + manifest->string() + " does not exist");
    if (!manifest && dataset.n_subjects < 2) throw ParameterError("config: dataset.subjects must be >= 2");
    if (!manifest && dataset.images_per_subject < 2)
        throw ParameterError("config: dataset.images_per_subject must be >= 2 (one reference plus probes)");
    if (mad_enabled && strategies.size() < 2)
        throw ParameterError("config: mad.enabled needs two pair strategies for the cross-type protocol");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    bool have_seed = false;
    std::vector<double> wavelengths{24.0, 16.0};
    CodecParams codec;

    const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
        {"seed",
         [&](const std::string& v, const std::string& k) {
             const auto n = csv::parse_int(v, k);
             if (n < 0) throw ParameterError("config: seed must be non-negative");
             cfg.seed = static_cast<std::uint64_t>(n);
             have_seed = true;
         }},
        {"out_dir", [&](const std::string& v, const std::string&) { cfg.out_dir = base_dir / v; }},
        {"dataset.manifest", [&](const std::string& v, const std::string&) { cfg.manifest = base_dir / v; }},
        {"dataset.subjects", [&](const std::string& v, const std::string& k) { cfg.dataset.n_subjects = to_count(v, k); }},
        {"dataset.images_per_subject",
         [&](const std::string& v, const std::string& k) { cfg.dataset.images_per_subject = to_count(v, k); }},
        {"dataset.pupil_min",
         [&](const std::string& v, const std::string& k) { cfg.dataset.pupil_radius_range.first = csv::parse_double(v, k); }},
        {"dataset.pupil_max",
         [&](const std::string& v, const std::string& k) { cfg.dataset.pupil_radius_range.second = csv::parse_double(v, k); }},
        {"dataset.iris_min",
         [&](const std::string& v, const std::string& k) { cfg.dataset.iris_radius_range.first = csv::parse_double(v, k); }},
        {"dataset.iris_max",
         [&](const std::string& v, const std::string& k) { cfg.dataset.iris_radius_range.second = csv::parse_double(v, k); }},
        {"dataset.width", [&](const std::string& v, const std::string& k) { cfg.dataset.width = to_count(v, k); }},
        {"dataset.height", [&](const std::string& v, const std::string& k) { cfg.dataset.height = to_count(v, k); }},
        {"dataset.center_jitter",
         [&](const std::string& v, const std::string& k) { cfg.dataset.center_jitter = csv::parse_double(v, k); }},
        {"dataset.max_rotation",
         [&](const std::string& v, const std::string& k) { cfg.dataset.max_rotation = csv::parse_double(v, k); }},
        {"dataset.max_radial_shift",
         [&](const std::string& v, const std::string& k) { cfg.dataset.max_radial_shift = csv::parse_double(v, k); }},
        {"dataset.max_occlusion",
         [&](const std::string& v, const std::string& k) { cfg.dataset.max_occlusion = csv::parse_double(v, k); }},
        {"dataset.noise_sigma",
         [&](const std::string& v, const std::string& k) { cfg.dataset.noise_sigma = csv::parse_double(v, k); }},
        {"pairs.strategies",
         [&](const std::string& v, const std::string&) {
             cfg.strategies.clear();
             for (const auto& s : split_list(v)) cfg.strategies.push_back(parse_strategy(s));
         }},
        {"pairs.count", [&](const std::string& v, const std::string& k) { cfg.pair_count = to_count(v, k); }},
        {"morph.alpha", [&](const std::string& v, const std::string& k) { cfg.alpha = csv::parse_double(v, k); }},
        {"sheet.rows", [&](const std::string& v, const std::string& k) { cfg.sheet.rows = to_count(v, k); }},
        {"sheet.cols", [&](const std::string& v, const std::string& k) { cfg.sheet.cols = to_count(v, k); }},
        {"codec.wavelengths",
         [&](const std::string& v, const std::string& k) {
             wavelengths.clear();
             for (const auto& s : split_list(v)) wavelengths.push_back(csv::parse_double(s, k));
         }},
        {"codec.sigma_ratio", [&](const std::string& v, const std::string& k) { codec.sigma_ratio = csv::parse_double(v, k); }},
        {"codec.rows_used", [&](const std::string& v, const std::string& k) { codec.rows_used = to_count(v, k); }},
        {"codec.epsilon", [&](const std::string& v, const std::string& k) { codec.epsilon = csv::parse_double(v, k); }},
        {"codec.comparator",
         [&](const std::string& v, const std::string&) {
             if (v != "hamming") throw ParameterError("config: unknown comparator '" + v + "' (supported: hamming)");
         }},
        {"compare.max_shift", [&](const std::string& v, const std::string& k) { cfg.max_shift = to_count(v, k); }},
        {"compare.probe_cap", [&](const std::string& v, const std::string& k) { cfg.probe_cap = to_count(v, k); }},
        {"thresholds.delta", [&](const std::string& v, const std::string& k) { cfg.delta = csv::parse_double(v, k); }},
        {"thresholds.fmr_targets",
         [&](const std::string& v, const std::string& k) {
             cfg.fmr_targets.clear();
             for (const auto& s : split_list(v)) cfg.fmr_targets.push_back(csv::parse_double(s, k));
         }},
        {"mad.enabled", [&](const std::string& v, const std::string& k) { cfg.mad_enabled = to_bool(v, k); }},
        {"mad.extractor", [&](const std::string& v, const std::string&) { cfg.mad_extractor = parse_extractor(v); }},
        {"mad.trees", [&](const std::string& v, const std::string& k) { cfg.mad_forest.n_trees = to_count(v, k); }},
        {"mad.max_depth", [&](const std::string& v, const std::string& k) { cfg.mad_forest.max_depth = to_count(v, k); }},
        {"mad.min_leaf", [&](const std::string& v, const std::string& k) { cfg.mad_forest.min_leaf = to_count(v, k); }},
        {"mad.mtry", [&](const std::string& v, const std::string& k) { cfg.mad_forest.mtry = to_count(v, k); }},
    };

    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = trim(std::string_view(body).substr(0, eq));
        const auto value = trim(std::string_view(body).substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ParameterError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ParameterError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        it->second(value, key);
    }
    if (!have_seed) throw ParameterError("config: 'seed' is required");

    cfg.dataset.seed = derive_seed(cfg.seed, {0xda7a});
    cfg.mad_forest.seed = derive_seed(cfg.seed, {0xf0e5});
    for (double w : wavelengths) {
        CodecSystem s;
        s.params = codec;
        s.params.wavelength = w;
        s.name = "hd_w" + csv::format_double(w);
        cfg.systems.push_back(s);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace morphiris
