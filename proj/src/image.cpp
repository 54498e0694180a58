#include "morphiris/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "morphiris/errors.hpp"

namespace morphiris {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), data_(width * height, fill) {
    if (width == 0 || height == 0) throw ParameterError("image dimensions must be positive");
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width == 0 || height == 0) throw ParameterError("image dimensions must be positive");
    if (data_.size() != width * height)
        throw ParameterError("image data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
}

LabelMask::LabelMask(std::size_t width, std::size_t height, Label fill)
    : width_(width), height_(height), labels_(width * height, fill) {
    if (width == 0 || height == 0) throw ParameterError("mask dimensions must be positive");
}

GrayImage LabelMask::to_image() const {
    std::vector<std::uint8_t> raw(labels_.size());
    std::transform(labels_.begin(), labels_.end(), raw.begin(),
                   [](Label l) { return static_cast<std::uint8_t>(l); });
    return GrayImage(width_, height_, std::move(raw));
}

LabelMask LabelMask::from_image(const GrayImage& img) {
    LabelMask mask(img.width(), img.height());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (px[i] > 2)
            throw FormatError("mask pixel " + std::to_string(i) + " has label " +
                              std::to_string(px[i]) + " outside {0,1,2}");
        mask.labels_[i] = static_cast<Label>(px[i]);
    }
    return mask;
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000UL) fail(std::string(field) + " too large", start);
            ++pos_;
        }
        if (pos_ == start) fail(std::string("expected ") + field, start);
        return v;
    }

    [[noreturn]] static void fail(const std::string& what, std::size_t at) {
        throw FormatError("PGM: " + what + " at byte offset " + std::to_string(at));
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        HeaderReader::fail("bad magic (expected P5)", 0);
    if (bytes.size() < 3 || !(std::isspace(bytes[2]) || bytes[2] == '#'))
        HeaderReader::fail("expected whitespace after magic", 2);

    HeaderReader reader(bytes.subspan(2));
    const auto width = reader.number("width");
    const auto height = reader.number("height");
    const std::size_t maxval_at = reader.offset() + 2;
    const auto maxval = reader.number("maxval");
    if (maxval != 255) HeaderReader::fail("maxval " + std::to_string(maxval) + " != 255", maxval_at);
    if (width == 0 || height == 0) HeaderReader::fail("zero dimension", 2);

    std::size_t pos = reader.offset() + 2;
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        HeaderReader::fail("missing whitespace after maxval", pos);
    ++pos;

    const std::size_t need = width * height;
    if (bytes.size() - pos < need)
        HeaderReader::fail("truncated payload: need " + std::to_string(need) + " bytes, have " +
                               std::to_string(bytes.size() - pos),
                           bytes.size());
    return GrayImage(width, height, std::vector<std::uint8_t>(bytes.begin() + pos, bytes.begin() + pos + need));
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

GrayImage load_pgm(const std::filesystem::path& path) {
    try {
        return read_pgm(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
    write_file(path, write_pgm(img));
}

double bilinear_sample(const GrayImage& img, Point2D p) {
    const double maxx = static_cast<double>(img.width() - 1);
    const double maxy = static_cast<double>(img.height() - 1);
    const double x = std::clamp(p.x, 0.0, maxx);
    const double y = std::clamp(p.y, 0.0, maxy);

    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);

    const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
    const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
    return (1.0 - fy) * top + fy * bottom;
}

std::uint8_t to_pixel(double v) noexcept {
    if (!(v > 0.0)) return 0;
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

}  // namespace morphiris
