#pragma once
// Visual similarity (normalized mutual information) and point-set distances.

#include <span>

#include "sketchcbr/geometry.hpp"
#include "sketchcbr/image.hpp"
#include "sketchcbr/types.hpp"

namespace sketchcbr {

/// Normalized mutual information (H(A) + H(B)) / H(A, B) over a bins x bins
/// joint intensity histogram, entropies in nats. Symmetric, in (0, 2];
/// returns 1.0 when both images are constant. Throws DimensionError on
/// mismatched dimensions.
double nmi(const ImageGray& a, const ImageGray& b, int bins = 64);

/// Same, restricted to the intersection of two masks (1 = included).
double nmi_masked(const ImageGray& a, std::span<const std::uint8_t> mask_a, const ImageGray& b,
                  std::span<const std::uint8_t> mask_b, int bins = 64);

/// NMI between two region patches over the intersection of their masks.
double nmi_patches(const RegionPatch& a, const RegionPatch& b, int bins = 64);

/// Sum of squared Euclidean distances between corresponding points.
double point_set_distance(std::span<const Point> a, std::span<const Point> b);

}  // namespace sketchcbr
