#pragma once
// Style exemplar cases: photo/sketch pair plus the derived neutral sketch and
// exaggeration field, and the persistent case library.
//
// On disk a library is a directory with library.json (style id, dims, region
// map, case order) and one subdirectory per case holding photo.png,
// sketch.png, neutral.png, field.efld and the three landmark JSON files.

#include <filesystem>
#include <string>
#include <vector>

#include "sketchcbr/field.hpp"
#include "sketchcbr/image.hpp"
#include "sketchcbr/landmarks.hpp"

namespace sketchcbr {

struct Case {
    std::string id;
    ImageGray photo;
    ImageGray sketch;
    ImageGray neutral_sketch;
    DisplacementField exaggeration_field;
    LandmarkSet photo_landmarks;
    LandmarkSet sketch_landmarks;
    LandmarkSet neutral_landmarks;  // equals photo_landmarks by construction
};

struct CaseLibrary {
    std::string style_id;
    int width = 0;
    int height = 0;
    RegionMap region_map;
    std::vector<Case> cases;

    std::size_t size() const { return cases.size(); }
};

/// Builds one case from an exemplar pair. The exaggeration field is the MLS
/// displacement photo landmarks -> sketch landmarks; the neutral sketch is
/// the sketch remapped by the reverse transformation. When the two landmark
/// sets are identical the sketch is copied and the field is all-zero.
Case build_case(std::string id, const ImageGray& photo, const ImageGray& sketch,
                const LandmarkSet& q_photo, const LandmarkSet& q_sketch);

/// Reads a dataset manifest (JSON list of {id, photo, sketch,
/// photo_landmarks, sketch_landmarks} with paths relative to the manifest)
/// and builds every case in manifest order.
CaseLibrary ingest_dataset(const std::filesystem::path& manifest_path,
                           const std::filesystem::path& region_map_path,
                           const std::string& style_id = "default");

void save_library(const CaseLibrary& lib, const std::filesystem::path& dir);
CaseLibrary load_library(const std::filesystem::path& dir);

}  // namespace sketchcbr
