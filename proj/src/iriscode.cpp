#include "morphiris/iriscode.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>

#include "morphiris/errors.hpp"
#include "morphiris/image.hpp"

namespace morphiris {

IrisCode::IrisCode(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64), real_(rows * words_), imag_(rows * words_),
      mask_(rows * words_) {
    if (rows == 0 || cols == 0) throw ParameterError("iris code dimensions must be positive");
}

void IrisCode::set(std::size_t r, std::size_t c, bool re, bool im, bool valid) {
    const std::size_t w = r * words_ + c / 64;
    const std::uint64_t bit = std::uint64_t{1} << (c % 64);
    auto put = [&](std::vector<std::uint64_t>& plane, bool v) { plane[w] = v ? (plane[w] | bit) : (plane[w] & ~bit); };
    put(real_, re);
    put(imag_, im);
    put(mask_, valid);
}

std::size_t IrisCode::valid_count() const {
    std::size_t n = 0;
    for (auto w : mask_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

IrisCode IrisCode::rotated(long shift) const {
    IrisCode out(rows_, cols_);
    const long n = static_cast<long>(cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) {
            const auto dst = static_cast<std::size_t>(((static_cast<long>(c) + shift) % n + n) % n);
            out.set(r, dst, real_bit(r, c), imag_bit(r, c), mask_bit(r, c));
        }
    return out;
}

IrisCode IrisCode::complemented() const {
    IrisCode out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out.set(r, c, !real_bit(r, c), !imag_bit(r, c), mask_bit(r, c));
    return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> IrisCode::serialize() const {
    std::vector<std::uint8_t> out = {'I', 'R', 'C', '1'};
    put_u32(out, static_cast<std::uint32_t>(rows_));
    put_u32(out, static_cast<std::uint32_t>(cols_));
    const std::size_t nbits = rows_ * cols_;
    const std::size_t plane_bytes = (nbits + 7) / 8;
    for (int plane = 0; plane < 3; ++plane) {
        const std::size_t base = out.size();
        out.resize(base + plane_bytes, 0);
        for (std::size_t i = 0; i < nbits; ++i) {
            const std::size_t r = i / cols_, c = i % cols_;
            const bool bit = plane == 0 ? real_bit(r, c) : plane == 1 ? imag_bit(r, c) : mask_bit(r, c);
            if (bit) out[base + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
        }
    }
    return out;
}

IrisCode IrisCode::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "IRC1", 4) != 0)
        throw FormatError("iris code: bad magic (expected IRC1) at byte offset 0");
    const std::size_t rows = get_u32(bytes, 4), cols = get_u32(bytes, 8);
    if (rows == 0 || cols == 0) throw FormatError("iris code: zero dimension");
    const std::size_t nbits = rows * cols;
    const std::size_t plane_bytes = (nbits + 7) / 8;
    if (bytes.size() != 12 + 3 * plane_bytes)
        throw FormatError("iris code: expected " + std::to_string(12 + 3 * plane_bytes) + " bytes, got " +
                          std::to_string(bytes.size()));
    IrisCode code(rows, cols);
    auto bit = [&](int plane, std::size_t i) {
        return (bytes[12 + plane * plane_bytes + i / 8] >> (i % 8)) & 1u;
    };
    for (std::size_t i = 0; i < nbits; ++i) code.set(i / cols, i % cols, bit(0, i), bit(1, i), bit(2, i));
    return code;
}

void IrisCode::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

IrisCode IrisCode::load(const std::filesystem::path& path) {
    try {
        return deserialize(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<std::size_t> encoded_rows(std::size_t sheet_rows, std::size_t rows_used) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < rows_used; ++k) out.push_back((2 * k + 1) * sheet_rows / (2 * rows_used));
    return out;
}

std::vector<double> log_gabor_response(std::size_t n, double wavelength, double sigma_ratio) {
    std::vector<double> g(n, 0.0);
    const double f0 = 1.0 / wavelength;
    const double denom = 2.0 * std::log(sigma_ratio) * std::log(sigma_ratio);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(n);
        const double l = std::log(f / f0);
        g[k] = std::exp(-l * l / denom);
    }
    return g;
}

IrisCode encode(const RubberSheet& sheet, const CodecParams& params) {
    if (!(params.wavelength >= 4.0)) throw ParameterError("encode: wavelength must be >= 4 samples");
    if (!(params.sigma_ratio > 0.0 && params.sigma_ratio < 1.0))
        throw ParameterError("encode: sigma_ratio must lie in (0, 1)");
    if (params.rows_used == 0 || params.rows_used > sheet.rows())
        throw ParameterError("encode: rows_used must lie in [1, sheet rows]");
    if (sheet.valid_count() == 0) throw EncodeError("encode: rubber sheet has no valid samples");

    const std::size_t n = sheet.cols();
    const auto filter = log_gabor_response(n, params.wavelength, params.sigma_ratio);
    const auto rows = encoded_rows(sheet.rows(), params.rows_used);

    IrisCode code(rows.size(), n);
    Eigen::FFT<double> fft;
    std::vector<double> signal(n);
    std::vector<std::complex<double>> spectrum, response;

    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t r = rows[k];
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t c = 0; c < n; ++c)
            if (sheet.valid(r, c)) {
                sum += sheet.intensity(r, c);
                ++count;
            }
        const double fill = count ? sum / static_cast<double>(count) : 0.0;
        double energy = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            signal[c] = sheet.valid(r, c) ? sheet.intensity(r, c) : fill;
            energy += signal[c] * signal[c];
        }
        const double floor_mag = params.epsilon * std::sqrt(energy / static_cast<double>(n));

        fft.fwd(spectrum, signal);
        for (std::size_t i = 0; i < n; ++i) spectrum[i] *= filter[i];
        fft.inv(response, spectrum);

        for (std::size_t c = 0; c < n; ++c) {
            const auto z = response[c];
            const bool valid = sheet.valid(r, c) && std::abs(z) > floor_mag;
            code.set(k, c, z.real() >= 0.0, z.imag() >= 0.0, valid);
        }
    }
    return code;
}

namespace {

// 64 columns of one code row starting at column (64*word + shift) mod cols,
// zero beyond the row length.
std::uint64_t shifted_word(std::span<const std::uint64_t> plane, std::size_t words, std::size_t cols, std::size_t row,
                           std::size_t word, std::size_t shift) {
    const std::uint64_t* base = plane.data() + row * words;
    if (cols % 64 == 0) {
        const std::size_t start = (word * 64 + shift) % cols;
        const std::size_t q = start / 64, b = start % 64;
        if (b == 0) return base[q];
        return (base[q] >> b) | (base[(q + 1) % words] << (64 - b));
    }
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < 64; ++i) {
        const std::size_t col = word * 64 + i;
        if (col >= cols) break;
        const std::size_t src = (col + shift) % cols;
        out |= ((base[src / 64] >> (src % 64)) & 1u) << i;
    }
    return out;
}

}  // namespace

ComparisonScore hamming(const IrisCode& a, const IrisCode& b, std::size_t max_shift) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ComparisonError("hamming: code dimensions differ (" + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()) + ")");
    const std::size_t cols = a.cols(), words = a.words_per_row();
    const long limit = static_cast<long>(std::min(max_shift, cols - 1));

    std::size_t best_diff = 0, best_bits = 0;
    long best_shift = 0;
    bool found = false;

    // Visit 0, -1, +1, -2, +2, ...; only strictly better scores replace.
    for (long step = 0; step <= 2 * limit; ++step) {
        const long s = step == 0 ? 0 : (step % 2 ? -(step + 1) / 2 : step / 2);
        const auto offset = static_cast<std::size_t>((s % static_cast<long>(cols) + static_cast<long>(cols)) %
                                                     static_cast<long>(cols));
        std::size_t diff = 0, bits = 0;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            for (std::size_t w = 0; w < words; ++w) {
                const std::size_t i = r * words + w;
                const std::uint64_t m = a.mask_plane()[i] & shifted_word(b.mask_plane(), words, cols, r, w, offset);
                const std::uint64_t dr = a.real_plane()[i] ^ shifted_word(b.real_plane(), words, cols, r, w, offset);
                const std::uint64_t di = a.imag_plane()[i] ^ shifted_word(b.imag_plane(), words, cols, r, w, offset);
                diff += static_cast<std::size_t>(std::popcount(dr & m) + std::popcount(di & m));
                bits += static_cast<std::size_t>(std::popcount(m));
            }
        }
        if (bits == 0) continue;
        bits *= 2;
        // diff/bits < best_diff/best_bits, compared exactly
        if (!found || diff * best_bits < best_diff * bits) {
            best_diff = diff;
            best_bits = bits;
            best_shift = s;
            found = true;
        }
    }
    if (!found) throw ComparisonError("hamming: no jointly valid bits at any shift");
    return {static_cast<double>(best_diff) / static_cast<double>(best_bits), best_shift, best_bits};
}

bool attack_success(const IrisCode& morph, const IrisCode& probe_a, const IrisCode& probe_b, double delta,
                    std::size_t max_shift) {
    const double hd_a = hamming(morph, probe_a, max_shift).hd;
    const double hd_b = hamming(morph, probe_b, max_shift).hd;
    return std::max(hd_a, hd_b) <= delta;
}

}  // namespace morphiris
