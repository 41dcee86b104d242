#pragma once
// Landmark-driven geometry: moving-least-squares deformation fields, image
// remapping, nearest-landmark region segmentation, and the feature-point
// blending operator. All functions are pure; no shared mutable state.

#include <span>
#include <vector>

#include "sketchcbr/field.hpp"
#include "sketchcbr/image.hpp"
#include "sketchcbr/landmarks.hpp"
#include "sketchcbr/types.hpp"

namespace sketchcbr {

/// Dense similarity-MLS displacement field interpolating dst - src at the
/// control points (weights 1/|p - v|^2). Throws ControlPointError for fewer
/// than 3 points, CorrespondenceError on count mismatch, and
/// DegenerateGeometryError when the source points are collinear.
DisplacementField mls_field(std::span<const Point> src, std::span<const Point> dst, int width,
                            int height);

/// Exact (off-grid) evaluation of the same map's displacement at v.
Point mls_displacement_at(std::span<const Point> src, std::span<const Point> dst, Point v);

/// Inverse-warp remap: out(v) = bilinear sample of img at v - field(v).
/// Out-of-bounds samples are white (255).
ImageGray apply_field(const ImageGray& img, const DisplacementField& field);

/// Warps img so content at `from` landmarks lands on `to` landmarks, on an
/// out_w x out_h canvas. Sampling position is v + MLS(v; to -> from), which
/// is exact at the control points.
ImageGray warp_to_points(const ImageGray& img, std::span<const Point> from,
                         std::span<const Point> to, int out_w, int out_h);

struct RegionPatch {
    int region_id = 0;
    int x0 = 0, y0 = 0;            // bounding box origin in parent coordinates
    ImageGray image;               // parent crop over the bounding box
    std::vector<std::uint8_t> mask;  // 1 inside the region, bbox-local
    std::vector<Point> landmarks;  // patch-local coordinates

    int width() const { return image.width; }
    int height() const { return image.height; }
    bool in_mask(int x, int y) const {
        return mask[static_cast<std::size_t>(y) * image.width + x] != 0;
    }
};

/// Nearest-landmark (L2) segmentation of the face interior. The interior is
/// the rasterized convex hull of the landmarks; equidistant pixels go to the
/// lower region id. Returns one patch per region, ordered by region id.
std::vector<RegionPatch> segment_regions(const ImageGray& image, const LandmarkSet& landmarks,
                                         const RegionMap& map);

/// Pixel-level region labels for the same segmentation: 0 outside the face
/// interior, otherwise the region id. Used by face composition.
std::vector<std::int16_t> region_label_map(const LandmarkSet& landmarks, const RegionMap& map,
                                           int width, int height);

struct BlendResult {
    ImageGray image;
    std::vector<Point> points;
};

/// Feature-point blending: both images are MLS-warped to the interpolated
/// point set (1-omega)*ptsA + omega*ptsB and cross-dissolved with weight
/// omega. omega = 0 returns (a, ptsA) exactly; omega = 1 returns (b, ptsB).
BlendResult blend(const ImageGray& a, std::span<const Point> ptsA, const ImageGray& b,
                  std::span<const Point> ptsB, double omega);

}  // namespace sketchcbr
