#pragma once

#include <string>
#include <vector>

#include "morphiris/image.hpp"

namespace morphiris {

using FeatureVector = std::vector<double>;

enum class Extractor { gray, freq };

std::string to_string(Extractor e);
Extractor parse_extractor(std::string_view name);

inline constexpr std::size_t kFeatureSide = 64;
inline constexpr std::size_t kFeatureLength = kFeatureSide * kFeatureSide;

/// Box-filter resample: each output pixel is the area-weighted mean of the
/// source pixels its footprint overlaps. Values stay real (no rounding).
std::vector<double> resample_area(const GrayImage& img, std::size_t out_w, std::size_t out_h);

/// 64x64 area-resampled intensities scaled to [0, 1], row-major.
FeatureVector feat_gray(const GrayImage& img);

/// 64x64 area-resampled image rounded to 8 bits and scaled to [0, 1], 2-D
/// DFT magnitude, log(1 + |F|), quadrants swapped so DC sits at (32, 32),
/// row-major.
FeatureVector feat_freq(const GrayImage& img);

FeatureVector extract(const GrayImage& img, Extractor e);

}  // namespace morphiris
