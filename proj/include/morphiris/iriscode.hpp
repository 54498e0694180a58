#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "morphiris/normalization.hpp"

namespace morphiris {

/// Phase-quantised iris template: two bits (sign of the real and imaginary
/// filter response) plus one validity bit per (row, angular column).
/// Rows are bit-packed into 64-bit words; padding bits are zero.
class IrisCode {
public:
    IrisCode() = default;
    IrisCode(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t words_per_row() const noexcept { return words_; }

    bool real_bit(std::size_t r, std::size_t c) const { return get(real_, r, c); }
    bool imag_bit(std::size_t r, std::size_t c) const { return get(imag_, r, c); }
    bool mask_bit(std::size_t r, std::size_t c) const { return get(mask_, r, c); }
    void set(std::size_t r, std::size_t c, bool re, bool im, bool valid);

    std::size_t valid_count() const;

    std::span<const std::uint64_t> real_plane() const noexcept { return real_; }
    std::span<const std::uint64_t> imag_plane() const noexcept { return imag_; }
    std::span<const std::uint64_t> mask_plane() const noexcept { return mask_; }

    /// Copy with every column moved right by `shift` (circularly).
    IrisCode rotated(long shift) const;
    /// Bitwise complement of both phase planes; mask unchanged.
    IrisCode complemented() const;

    /// "IRC1" blob: magic, u32 rows, u32 cols (little-endian), then the
    /// real, imaginary and mask planes, each rows*cols bits packed row-major
    /// LSB-first into ceil(rows*cols/8) bytes.
    std::vector<std::uint8_t> serialize() const;
    static IrisCode deserialize(std::span<const std::uint8_t> bytes);
    void save(const std::filesystem::path& path) const;
    static IrisCode load(const std::filesystem::path& path);

    friend bool operator==(const IrisCode&, const IrisCode&) = default;

private:
    bool get(const std::vector<std::uint64_t>& plane, std::size_t r, std::size_t c) const {
        return (plane[r * words_ + c / 64] >> (c % 64)) & 1u;
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> real_;
    std::vector<std::uint64_t> imag_;
    std::vector<std::uint64_t> mask_;
};

struct CodecParams {
    double wavelength = 24.0;
    double sigma_ratio = 0.5;
    std::size_t rows_used = 16;
    /// Responses with magnitude at or below epsilon * RMS(row) are masked.
    double epsilon = 1e-3;
};

/// Sheet rows sampled by the encoder: floor((k + 0.5) * rows / rows_used).
std::vector<std::size_t> encoded_rows(std::size_t sheet_rows, std::size_t rows_used);

/// Frequency response of the 1-D log-Gabor filter on an n-point periodic
/// signal: zero at DC and for negative frequencies.
std::vector<double> log_gabor_response(std::size_t n, double wavelength, double sigma_ratio);

/// Filters rows of the sheet along the angle and quantises the phase.
/// Invalid samples are replaced by the row's valid mean before filtering and
/// masked afterwards. Throws ParameterError for bad parameters and
/// EncodeError for a sheet without valid samples.
IrisCode encode(const RubberSheet& sheet, const CodecParams& params = {});

struct ComparisonScore {
    double hd = 1.0;
    long best_shift = 0;
    std::size_t valid_bits = 0;
};

/// Fractional Hamming distance over jointly valid bits, minimised over
/// circular shifts s in [-max_shift, max_shift] where column j of A meets
/// column j+s of B. Ties prefer the smaller |s|, then the negative shift.
ComparisonScore hamming(const IrisCode& a, const IrisCode& b, std::size_t max_shift = 8);

/// Attack criterion: max(HD(M, A'), HD(M, B')) <= delta.
bool attack_success(const IrisCode& morph, const IrisCode& probe_a, const IrisCode& probe_b, double delta = 0.32,
                    std::size_t max_shift = 8);

inline constexpr double kDefaultDelta = 0.32;

}  // namespace morphiris
