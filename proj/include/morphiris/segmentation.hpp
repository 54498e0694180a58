#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "morphiris/geometry.hpp"
#include "morphiris/image.hpp"

namespace morphiris {

struct Thresholds {
    std::uint8_t pupil = 40;
    std::uint8_t iris = 180;
};

/// Intensity banding (pupil below `pupil`, iris below `iris`) followed by
/// keeping only the largest 4-connected component of each class. Throws
/// SegmentationError naming the class when a component is empty.
LabelMask segment_threshold(const GrayImage& img, Thresholds t = {});

/// Algebraic (Kasa) least-squares circle. Exact for points on a circle.
/// Throws FitError for fewer than 3 points or a singular (collinear) system.
EllipseParams fit_circle_lms(std::span<const Point2D> points);

/// Sub-pixel boundary samples of a region: for every region pixel with a
/// 4-neighbour outside the region, the midpoint between the two pixel
/// centres. Neighbours beyond the raster edge are ignored.
std::vector<Point2D> region_boundary(const LabelMask& mask, std::span<const Label> region);

/// Pupil from the pupil boundary, iris from the (pupil + iris) boundary.
/// Each circle is refitted after discarding boundary samples far from the
/// first fit (eyelid chords, stray pixels). Throws GeometryError when the
/// two circles do not nest.
IrisGeometry geometry_from_mask(const LabelMask& mask);

}  // namespace morphiris
