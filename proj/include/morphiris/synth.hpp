#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "morphiris/geometry.hpp"
#include "morphiris/image.hpp"
#include "morphiris/pairs.hpp"

namespace morphiris {

/// Identity-stable iris pattern on a polar grid: rows run from the pupil
/// boundary (row 0) to the iris boundary, columns cover one full turn.
/// Values in [0, 1], periodic in the angular axis.
class IdentityTexture {
public:
    static constexpr std::size_t kRows = 64;
    static constexpr std::size_t kCols = 512;

    explicit IdentityTexture(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }
    double at(std::size_t row, std::size_t col) const { return grid_[row * kCols + col]; }
    /// rho in [0,1] (clamped), theta in radians (wrapped).
    double sample(double rho, double theta) const;

private:
    std::uint64_t seed_;
    std::vector<double> grid_;
};

struct EyeRenderSpec {
    std::uint64_t identity_seed = 0;
    double pupil_radius = 25.0;
    double iris_radius = 70.0;
    Point2D center{160.0, 120.0};
    std::size_t width = 320;
    std::size_t height = 240;
    std::uint64_t noise_seed = 0;
    /// Fraction of the iris diameter hidden under the upper eyelid, [0, 0.4].
    double occlusion_fraction = 0.0;
    /// Capture variation: in-plane torsion (radians) and radial texture shift
    /// (fraction of the annulus width).
    double rotation = 0.0;
    double radial_shift = 0.0;
    double noise_sigma = 1.5;

    /// Throws ParameterError on any invariant violation.
    void validate() const;
};

/// Intensity bands of rendered images.
struct RenderLevels {
    static constexpr double pupil = 18.0;
    static constexpr double iris_lo = 50.0;
    static constexpr double iris_hi = 170.0;
    static constexpr double sclera = 215.0;
    static constexpr double eyelid = 200.0;
};

std::pair<GrayImage, IrisGeometry> render_eye(const EyeRenderSpec& spec);
std::pair<GrayImage, IrisGeometry> render_eye(const EyeRenderSpec& spec, const IdentityTexture& texture);

/// Pixel-exact ground-truth labels for a spec (eyelid counts as background).
LabelMask render_labels(const EyeRenderSpec& spec);

struct DatasetOptions {
    std::size_t n_subjects = 10;
    std::size_t images_per_subject = 4;
    std::pair<double, double> pupil_radius_range{20.0, 40.0};
    std::pair<double, double> iris_radius_range{72.0, 84.0};
    std::size_t width = 320;
    std::size_t height = 240;
    double center_jitter = 4.0;
    double max_rotation = 0.015;
    double max_radial_shift = 0.01;
    double max_occlusion = 0.1;
    double noise_sigma = 1.5;
    std::uint64_t seed = 0;
};

/// Render spec for one capture; a pure function of (options, subject, side, index).
EyeRenderSpec capture_spec(const DatasetOptions& opt, std::size_t subject, EyeSide side, std::size_t index);

std::string subject_id(std::size_t subject);
std::string image_name(std::size_t subject, EyeSide side, std::size_t index);

/// Renders every capture into out_dir as S<subject>_<L|R>_<index>.pgm and
/// writes out_dir/manifest.csv with ground-truth radii and relative paths.
DatasetManifest generate_dataset(const DatasetOptions& opt, const std::filesystem::path& out_dir);

DatasetManifest generate_dataset(std::size_t n_subjects, std::size_t images_per_subject,
                                 std::pair<double, double> pupil_radius_range, std::uint64_t seed,
                                 const std::filesystem::path& out_dir);

}  // namespace morphiris
