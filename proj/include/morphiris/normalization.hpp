#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "morphiris/geometry.hpp"
#include "morphiris/image.hpp"

namespace morphiris {

/// Polar unwrapping of the iris annulus. Row i is the radial position
/// i/(rows-1) from pupil (0) to iris (1) boundary; column j the angle
/// 2*pi*j/cols, measured from +x towards +y (clockwise on screen).
class RubberSheet {
public:
    RubberSheet(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double intensity(std::size_t r, std::size_t c) const { return intensity_[r * cols_ + c]; }
    double& intensity(std::size_t r, std::size_t c) { return intensity_[r * cols_ + c]; }
    bool valid(std::size_t r, std::size_t c) const { return valid_[r * cols_ + c] != 0; }
    void set_valid(std::size_t r, std::size_t c, bool v) { valid_[r * cols_ + c] = v ? 1 : 0; }

    std::size_t valid_count() const;

    /// Intensities rounded to 8 bits, and the validity plane as 0/255.
    GrayImage intensity_image() const;
    GrayImage validity_image() const;
    static RubberSheet from_images(const GrayImage& intensity, const GrayImage& validity);

    /// `<stem>.rs.pgm` and `<stem>.rsmask.pgm`.
    void save(const std::filesystem::path& stem) const;
    static RubberSheet load(const std::filesystem::path& stem);

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> intensity_;
    std::vector<unsigned char> valid_;
};

struct SheetSize {
    std::size_t rows = 64;
    std::size_t cols = 512;
};

/// Point on a boundary at angle theta from that boundary's own centre.
Point2D boundary_point(const EllipseParams& e, double theta);

/// Homogeneous rubber-sheet: source = (1-rho)·P(theta) + rho·I(theta),
/// bilinearly sampled. A sample is invalid when it falls outside the
/// raster or, with a mask, on a background/occluded pixel.
RubberSheet unwrap(const GrayImage& img, const IrisGeometry& geom, SheetSize size = {},
                   const std::optional<LabelMask>& occlusion_mask = std::nullopt);

}  // namespace morphiris
