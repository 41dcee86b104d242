#pragma once
// Deterministic synthetic face dataset for tests: rendered geometric faces
// with the 67-landmark scheme from docs/landmarks.md, paired with a fixed
// derived sketch style (edge extraction plus an optional landmark-driven
// exaggeration warp).

#include <filesystem>

#include "sketchcbr/case_library.hpp"
#include "sketchcbr/geometry.hpp"
#include "sketchcbr/image.hpp"
#include "sketchcbr/landmarks.hpp"

namespace sketchcbr::testsupport {

RegionMap synthetic_region_map();

struct DatasetOptions {
    int width = 200;
    int height = 250;
    int count = 20;
    bool exaggerate = true;
    std::uint64_t seed = 7;
};

struct SyntheticPair {
    ImageGray photo;
    ImageGray sketch;
    LandmarkSet photo_landmarks;
    LandmarkSet sketch_landmarks;
};

SyntheticPair make_pair(std::uint64_t seed, const DatasetOptions& opts);

CaseLibrary make_library(const DatasetOptions& opts);

// Writes manifest.json, region_map.json and the per-pair files; returns the
// manifest path.
std::filesystem::path write_dataset(const DatasetOptions& opts,
                                    const std::filesystem::path& dir);

// Misc test helpers.
ImageGray random_image(int width, int height, std::uint64_t seed);
RegionPatch full_patch(const ImageGray& img, std::vector<Point> landmarks, int region_id = 1);

}  // namespace sketchcbr::testsupport
