#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace morphiris {

/// Sub-pixel position. Origin top-left, x is the column, y the row; pixel
/// (i, j) has its centre at integer coordinates (i, j).
struct Point2D {
    double x = 0.0;
    double y = 0.0;

    friend Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2D operator*(double s, Point2D p) { return {s * p.x, s * p.y}; }
    friend bool operator==(const Point2D&, const Point2D&) = default;
};

/// 8-bit single-channel raster, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
    GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
    std::uint8_t& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }

    std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    std::span<std::uint8_t> pixels() noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> data_;
};

enum class Label : std::uint8_t { background = 0, iris = 1, pupil = 2 };

/// Per-pixel class map with the same layout as GrayImage.
class LabelMask {
public:
    LabelMask() = default;
    LabelMask(std::size_t width, std::size_t height, Label fill = Label::background);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }

    Label at(std::size_t x, std::size_t y) const { return labels_[y * width_ + x]; }
    Label& at(std::size_t x, std::size_t y) { return labels_[y * width_ + x]; }

    std::span<const Label> labels() const noexcept { return labels_; }

    /// Raw {0,1,2} raster, the on-disk mask encoding.
    GrayImage to_image() const;
    /// Rejects any pixel value outside {0,1,2}.
    static LabelMask from_image(const GrayImage& img);

    friend bool operator==(const LabelMask&, const LabelMask&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Label> labels_;
};

/// Decodes binary PGM (P5, maxval 255). Throws FormatError with the byte
/// offset of the problem.
GrayImage read_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_pgm(const GrayImage& img);

GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Bilinear interpolation of the four neighbours of p. Coordinates outside
/// the raster are clamped to the border.
double bilinear_sample(const GrayImage& img, Point2D p);

/// Rounds to the nearest integer (halves up) and clamps to [0, 255].
std::uint8_t to_pixel(double v) noexcept;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace morphiris
