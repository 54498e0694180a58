#pragma once

#include <string>

#include "morphiris/errors.hpp"
#include "morphiris/image.hpp"

namespace morphiris {

/// Boundary as reported by the localizer: centre plus min/max radii.
/// Circles have r_min == r_max.
struct EllipseParams {
    double cx = 0.0;
    double cy = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;

    Point2D center() const { return {cx, cy}; }
    /// Scalar radius used by every downstream formula.
    double radius() const { return 0.5 * (r_min + r_max); }

    static EllipseParams circle(double cx, double cy, double r) { return {cx, cy, r, r}; }
    friend bool operator==(const EllipseParams&, const EllipseParams&) = default;
};

struct IrisGeometry {
    EllipseParams pupil;
    EllipseParams iris;

    /// Empty string when valid, otherwise the first violated invariant.
    std::string violation() const;
    /// Throws GeometryError when invalid.
    void validate() const;

    friend bool operator==(const IrisGeometry&, const IrisGeometry&) = default;
};

/// Localization produced circles that do not form a usable iris; both
/// fitted circles are kept for diagnostics.
class GeometryError : public FitError {
public:
    GeometryError(const std::string& what, const IrisGeometry& fitted) : FitError(what), fitted_(fitted) {}
    const IrisGeometry& fitted() const noexcept { return fitted_; }

private:
    IrisGeometry fitted_;
};

std::string to_string(const EllipseParams& e);
std::string to_string(const IrisGeometry& g);

/// Plain-text persistence: two lines "pupil cx cy r_min r_max" and
/// "iris cx cy r_min r_max", full round-trip precision.
std::string format_geometry(const IrisGeometry& g);
IrisGeometry parse_geometry(const std::string& text);

}  // namespace morphiris
