#include "morphiris/features.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>

#include "morphiris/errors.hpp"

namespace morphiris {

std::string to_string(Extractor e) { return e == Extractor::gray ? "gray" : "freq"; }

Extractor parse_extractor(std::string_view name) {
    if (name == "gray") return Extractor::gray;
    if (name == "freq") return Extractor::freq;
    throw ParameterError("unknown feature extractor '" + std::string(name) + "' (expected gray or freq)");
}

namespace {

// Overlap weights of source cells [k, k+1) with output cell i of a
// src->dst box resample along one axis.
std::vector<std::vector<std::pair<std::size_t, double>>> axis_weights(std::size_t src, std::size_t dst) {
    std::vector<std::vector<std::pair<std::size_t, double>>> w(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t i = 0; i < dst; ++i) {
        const double lo = static_cast<double>(i) * scale, hi = static_cast<double>(i + 1) * scale;
        for (auto k = static_cast<std::size_t>(std::floor(lo)); k < src && static_cast<double>(k) < hi; ++k) {
            const double overlap = std::min(hi, static_cast<double>(k + 1)) - std::max(lo, static_cast<double>(k));
            if (overlap > 0.0) w[i].emplace_back(k, overlap / scale);
        }
    }
    return w;
}

}  // namespace

std::vector<double> resample_area(const GrayImage& img, std::size_t out_w, std::size_t out_h) {
    if (out_w == 0 || out_h == 0) throw ParameterError("resample: output size must be positive");
    std::vector<double> out(out_w * out_h, 0.0);
    if (img.width() == out_w && img.height() == out_h) {
        std::copy(img.pixels().begin(), img.pixels().end(), out.begin());
        return out;
    }
    const auto wx = axis_weights(img.width(), out_w);
    const auto wy = axis_weights(img.height(), out_h);
    for (std::size_t y = 0; y < out_h; ++y)
        for (std::size_t x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (const auto& [sy, fy] : wy[y])
                for (const auto& [sx, fx] : wx[x]) acc += fy * fx * img.at(sx, sy);
            out[y * out_w + x] = acc;
        }
    return out;
}

FeatureVector feat_gray(const GrayImage& img) {
    auto v = resample_area(img, kFeatureSide, kFeatureSide);
    for (double& x : v) x /= 255.0;
    return v;
}

namespace {

// In-place separable 2-D DFT of an n x n grid.
void dft2(std::vector<std::complex<double>>& grid, std::size_t n, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(n), out;
    for (std::size_t y = 0; y < n; ++y) {
        std::copy(grid.begin() + y * n, grid.begin() + (y + 1) * n, in.begin());
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        std::copy(out.begin(), out.end(), grid.begin() + y * n);
    }
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) in[y] = grid[y * n + x];
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        for (std::size_t y = 0; y < n; ++y) grid[y * n + x] = out[y];
    }
}

}  // namespace

FeatureVector feat_freq(const GrayImage& img) {
    const std::size_t n = kFeatureSide;
    const auto pix = resample_area(img, n, n);

    // The power spectrum is taken as the DFT of the circular autocorrelation.
    // On 8-bit samples the autocorrelation is an exact integer array, so a
    // circularly shifted input yields bit-identical features.
    std::vector<std::complex<double>> grid(n * n);
    for (std::size_t i = 0; i < n * n; ++i) grid[i] = std::round(pix[i]);
    dft2(grid, n, false);
    for (auto& z : grid) z = std::norm(z);
    dft2(grid, n, true);
    for (auto& z : grid) z = std::round(z.real());
    dft2(grid, n, false);

    const double dc_power = std::abs(grid[0].real());
    FeatureVector out(n * n);
    const std::size_t half = n / 2;
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u = 0; u < n; ++u) {
            double power = grid[v * n + u].real();
            if (power <= 1e-12 * dc_power) power = 0.0;
            const std::size_t sy = (v + half) % n, sx = (u + half) % n;
            out[sy * n + sx] = std::log1p(std::sqrt(power) / 255.0);
        }
    return out;
}

FeatureVector extract(const GrayImage& img, Extractor e) {
    return e == Extractor::gray ? feat_gray(img) : feat_freq(img);
}

}  // namespace morphiris
