#include "morphiris/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "morphiris/errors.hpp"

namespace morphiris {

RubberSheet::RubberSheet(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), intensity_(rows * cols, 0.0), valid_(rows * cols, 1) {
    if (rows < 2 || cols < 4) throw ParameterError("rubber sheet needs rows >= 2 and cols >= 4");
}

std::size_t RubberSheet::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1));
}

GrayImage RubberSheet::intensity_image() const {
    GrayImage img(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) img.at(c, r) = to_pixel(intensity(r, c));
    return img;
}

GrayImage RubberSheet::validity_image() const {
    GrayImage img(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) img.at(c, r) = valid(r, c) ? 255 : 0;
    return img;
}

RubberSheet RubberSheet::from_images(const GrayImage& intensity, const GrayImage& validity) {
    if (intensity.width() != validity.width() || intensity.height() != validity.height())
        throw FormatError("rubber sheet intensity/validity dimensions differ");
    RubberSheet sheet(intensity.height(), intensity.width());
    for (std::size_t r = 0; r < sheet.rows(); ++r) {
        for (std::size_t c = 0; c < sheet.cols(); ++c) {
            sheet.intensity(r, c) = intensity.at(c, r);
            const auto v = validity.at(c, r);
            if (v != 0 && v != 255) throw FormatError("rubber sheet validity must be 0 or 255");
            sheet.set_valid(r, c, v == 255);
        }
    }
    return sheet;
}

void RubberSheet::save(const std::filesystem::path& stem) const {
    save_pgm(stem.string() + ".rs.pgm", intensity_image());
    save_pgm(stem.string() + ".rsmask.pgm", validity_image());
}

RubberSheet RubberSheet::load(const std::filesystem::path& stem) {
    return from_images(load_pgm(stem.string() + ".rs.pgm"), load_pgm(stem.string() + ".rsmask.pgm"));
}

Point2D boundary_point(const EllipseParams& e, double theta) {
    const double r = e.radius();
    return {e.cx + r * std::cos(theta), e.cy + r * std::sin(theta)};
}

RubberSheet unwrap(const GrayImage& img, const IrisGeometry& geom, SheetSize size,
                   const std::optional<LabelMask>& occlusion_mask) {
    geom.validate();
    if (occlusion_mask && (occlusion_mask->width() != img.width() || occlusion_mask->height() != img.height()))
        throw ParameterError("unwrap: occlusion mask dimensions differ from image");

    RubberSheet sheet(size.rows, size.cols);
    const double maxx = static_cast<double>(img.width() - 1);
    const double maxy = static_cast<double>(img.height() - 1);

    for (std::size_t c = 0; c < size.cols; ++c) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(size.cols);
        const Point2D inner = boundary_point(geom.pupil, theta);
        const Point2D outer = boundary_point(geom.iris, theta);
        for (std::size_t r = 0; r < size.rows; ++r) {
            const double rho = static_cast<double>(r) / static_cast<double>(size.rows - 1);
            const Point2D src = (1.0 - rho) * inner + rho * outer;
            sheet.intensity(r, c) = bilinear_sample(img, src);

            bool ok = src.x >= 0.0 && src.y >= 0.0 && src.x <= maxx && src.y <= maxy;
            if (ok && occlusion_mask) {
                const auto px = static_cast<std::size_t>(std::lround(src.x));
                const auto py = static_cast<std::size_t>(std::lround(src.y));
                ok = occlusion_mask->at(px, py) != Label::background;
            }
            sheet.set_valid(r, c, ok);
        }
    }
    return sheet;
}

}  // namespace morphiris
