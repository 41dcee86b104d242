#pragma once
// Per-region descriptors and the composite model input. Block layout of a
// region feature vector: upright SURF (64) | gray histogram (32) | gradient
// direction histogram (32) | simplified shape context (8 per landmark).

#include <array>
#include <span>
#include <vector>

#include "sketchcbr/geometry.hpp"

namespace sketchcbr {

inline constexpr int kSurfDim = 64;
inline constexpr int kGrayBins = 32;
inline constexpr int kDirBins = 32;
inline constexpr int kContextBinsPerPoint = 8;
inline constexpr int kOutlineSamples = 100;

/// Upright SURF-style descriptor: Haar response sums (dx, dy, |dx|, |dy|)
/// over a 4x4 grid covering the patch bounding box, L2-normalized. A patch
/// with no intensity variation yields the all-zero vector.
std::array<double, kSurfDim> surf_descriptor(const RegionPatch& patch);

/// Normalized 32-bin intensity histogram over the masked pixels.
std::array<double, kGrayBins> gray_histogram(const RegionPatch& patch);

/// Magnitude-weighted 32-bin histogram of Sobel gradient directions over the
/// masked pixels; uniform 1/32 when every gradient vanishes.
std::array<double, kDirBins> gradient_direction_histogram(const RegionPatch& patch);

/// The closed polyline through the points, resampled to `count` vertices at
/// uniform arc-length spacing.
std::vector<Point> resample_outline(std::span<const Point> points, int count);

/// 8-bin angular histogram (single radial bin) of the vertices around a
/// reference point, normalized to sum 1; vertices coinciding with the
/// reference are skipped.
std::array<double, kContextBinsPerPoint> angular_histogram(std::span<const Point> vertices,
                                                           Point reference);

/// Simplified shape context: the resampled outline's angular histogram per
/// landmark, concatenated in landmark order.
std::vector<double> shape_context(std::span<const Point> points);

struct FeatureVector {
    int region_id = 0;
    int num_landmarks = 0;
    std::vector<float> values;  // 128 + 8 * num_landmarks

    int dim() const { return static_cast<int>(values.size()); }
};

FeatureVector region_features(const RegionPatch& patch);

struct CompositeInput {
    int region_id = 0;
    int num_landmarks = 0;
    std::vector<float> values;  // 3 * (128 + 8 * num_landmarks)
};

/// Concatenates (input photo region, candidate photo region, interim sketch
/// region) feature blocks in that order.
CompositeInput compose_input(const FeatureVector& fx, const FeatureVector& fi,
                             const FeatureVector& sx);

/// Composite dimensionality for a region with the given landmark count.
constexpr int composite_dim(int num_landmarks) {
    return 3 * (kSurfDim + kGrayBins + kDirBins + kContextBinsPerPoint * num_landmarks);
}

}  // namespace sketchcbr
