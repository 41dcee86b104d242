#pragma once
// Internal helpers for moving region patches between coordinate frames.

#include "sketchcbr/case_library.hpp"
#include "sketchcbr/geometry.hpp"

namespace sketchcbr {

// Same geometry (bbox, mask, landmarks), content cropped from another parent
// image of identical dimensions.
inline RegionPatch patch_with_image(const RegionPatch& geometry, const ImageGray& parent) {
    RegionPatch out = geometry;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out.image.at(x, y) = parent.at(out.x0 + x, out.y0 + y);
        }
    }
    return out;
}

// Warps src content onto frame's canvas so src landmarks land on frame's
// landmarks; the result carries frame's geometry.
inline RegionPatch transplant_patch(const RegionPatch& src, const RegionPatch& frame) {
    RegionPatch out = frame;
    out.image =
        warp_to_points(src.image, src.landmarks, frame.landmarks, frame.width(), frame.height());
    return out;
}

// Photo and neutral-sketch region patches of one case, in its own frame.
struct CaseRegionViews {
    RegionPatch photo;
    RegionPatch neutral;
};

inline CaseRegionViews case_region_views(const Case& c, const RegionMap& map, int region_id) {
    // The neutral sketch shares the photo's landmark layout, so one
    // segmentation serves both images.
    const std::vector<RegionPatch> patches = segment_regions(c.photo, c.photo_landmarks, map);
    const RegionPatch& photo_patch = patches[region_id - 1];
    return {photo_patch, patch_with_image(photo_patch, c.neutral_sketch)};
}

}  // namespace sketchcbr
