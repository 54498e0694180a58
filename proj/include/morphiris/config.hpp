#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "morphiris/features.hpp"
#include "morphiris/forest.hpp"
#include "morphiris/iriscode.hpp"
#include "morphiris/normalization.hpp"
#include "morphiris/pairs.hpp"
#include "morphiris/synth.hpp"

namespace morphiris {

/// One iris-code recognition system run side by side with the others.
struct CodecSystem {
    std::string name;
    CodecParams params;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "run";

    /// When set, images come from this manifest instead of the generator.
    std::optional<std::filesystem::path> manifest;
    DatasetOptions dataset;

    std::vector<PairStrategy> strategies{PairStrategy::radius, PairStrategy::random};
    std::size_t pair_count = 20;
    double alpha = 0.5;

    SheetSize sheet;
    std::vector<CodecSystem> systems;
    std::size_t max_shift = 8;

    std::size_t probe_cap = 5;
    double delta = kDefaultDelta;
    std::vector<double> fmr_targets{0.10, 0.05, 0.01, 0.001};

    bool mad_enabled = false;
    Extractor mad_extractor = Extractor::freq;
    ForestParams mad_forest;

    /// Canonical key = value listing of every effective setting.
    std::string canonical() const;
    /// FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const;
    void validate() const;
};

/// Parses the flat config format: `section.key = value` lines, `#` starts a
/// comment, blank lines ignored. `seed` is mandatory. Relative paths are
/// resolved against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace morphiris
