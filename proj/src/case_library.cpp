#include "sketchcbr/case_library.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "sketchcbr/geometry.hpp"

namespace sketchcbr {

using nlohmann::json;

namespace {

constexpr int kLibraryFormatVersion = 1;

bool same_points(const LandmarkSet& a, const LandmarkSet& b) {
    return std::equal(a.points.begin(), a.points.end(), b.points.begin(), b.points.end());
}

json read_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot open ") + what + ": " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

Case build_case(std::string id, const ImageGray& photo, const ImageGray& sketch,
                const LandmarkSet& q_photo, const LandmarkSet& q_sketch) {
    if (!photo.same_dims(sketch)) {
        throw DimensionError("build_case " + id + ": photo and sketch dimensions differ");
    }
    validate_landmarks(q_photo, photo.width, photo.height, "case " + id + " photo landmarks");
    validate_landmarks(q_sketch, sketch.width, sketch.height, "case " + id + " sketch landmarks");

    Case c;
    c.id = std::move(id);
    c.photo = photo;
    c.sketch = sketch;
    c.photo_landmarks = q_photo;
    c.sketch_landmarks = q_sketch;
    c.neutral_landmarks = q_photo;  // neutralization aligns the sketch onto the photo layout

    if (same_points(q_photo, q_sketch)) {
        // No exaggeration in this exemplar.
        c.neutral_sketch = sketch;
        c.exaggeration_field = DisplacementField(photo.width, photo.height);
        return c;
    }

    c.exaggeration_field =
        mls_field(q_photo.span(), q_sketch.span(), photo.width, photo.height);
    const DisplacementField reverse =
        mls_field(q_sketch.span(), q_photo.span(), photo.width, photo.height);
    c.neutral_sketch = apply_field(sketch, reverse);
    return c;
}

CaseLibrary ingest_dataset(const std::filesystem::path& manifest_path,
                           const std::filesystem::path& region_map_path,
                           const std::string& style_id) {
    if (!std::filesystem::exists(manifest_path)) {
        throw IoError("manifest not found: " + manifest_path.string());
    }
    const json manifest = read_json_file(manifest_path, "dataset manifest");
    if (!manifest.is_array()) {
        throw FormatError(manifest_path.string() + ": manifest must be a JSON list");
    }
    if (manifest.empty()) {
        throw ValidationError(manifest_path.string() + ": manifest lists no exemplar pairs");
    }

    CaseLibrary lib;
    lib.style_id = style_id;
    lib.region_map = load_region_map(region_map_path);

    const std::filesystem::path base = manifest_path.parent_path();
    std::set<std::string> ids;
    for (const auto& entry : manifest) {
        for (const char* key : {"id", "photo", "sketch", "photo_landmarks", "sketch_landmarks"}) {
            if (!entry.contains(key)) {
                throw FormatError(manifest_path.string() + ": manifest entry missing '" +
                                  key + "'");
            }
        }
        const std::string id = entry["id"].get<std::string>();
        if (!ids.insert(id).second) {
            throw ValidationError(manifest_path.string() + ": duplicate case id '" + id + "'");
        }
        const auto resolve = [&](const char* key) {
            return base / entry[key].get<std::string>();
        };
        for (const char* key : {"photo", "sketch", "photo_landmarks", "sketch_landmarks"}) {
            if (!std::filesystem::exists(resolve(key))) {
                throw IoError("case " + id + ": missing file " + resolve(key).string());
            }
        }
        const ImageGray photo = load_png(resolve("photo"));
        const ImageGray sketch = load_png(resolve("sketch"));
        if (lib.cases.empty()) {
            lib.width = photo.width;
            lib.height = photo.height;
        }
        if (photo.width != lib.width || photo.height != lib.height ||
            !photo.same_dims(sketch)) {
            throw ValidationError("case " + id + ": image dimensions differ from the library (" +
                                  std::to_string(lib.width) + "x" + std::to_string(lib.height) +
                                  ")");
        }
        LandmarkSet q_photo;
        LandmarkSet q_sketch;
        try {
            q_photo = load_landmarks(resolve("photo_landmarks"));
            q_sketch = load_landmarks(resolve("sketch_landmarks"));
        } catch (const FormatError& e) {
            throw FormatError("case " + id + ": " + e.what());
        }
        lib.cases.push_back(build_case(id, photo, sketch, q_photo, q_sketch));
    }
    return lib;
}

void save_library(const CaseLibrary& lib, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json index;
    index["format_version"] = kLibraryFormatVersion;
    index["style_id"] = lib.style_id;
    index["width"] = lib.width;
    index["height"] = lib.height;
    json case_list = json::array();
    for (const Case& c : lib.cases) case_list.push_back(c.id);
    index["cases"] = case_list;

    save_region_map(lib.region_map, dir / "region_map.json");
    for (const Case& c : lib.cases) {
        const std::filesystem::path case_dir = dir / c.id;
        std::filesystem::create_directories(case_dir);
        save_png(c.photo, case_dir / "photo.png");
        save_png(c.sketch, case_dir / "sketch.png");
        save_png(c.neutral_sketch, case_dir / "neutral.png");
        save_field(c.exaggeration_field, case_dir / "field.efld");
        save_landmarks(c.photo_landmarks, case_dir / "landmarks_photo.json");
        save_landmarks(c.sketch_landmarks, case_dir / "landmarks_sketch.json");
        save_landmarks(c.neutral_landmarks, case_dir / "landmarks_neutral.json");
    }
    std::ofstream out(dir / "library.json");
    if (!out) throw IoError("cannot write library index: " + (dir / "library.json").string());
    out << index.dump(2) << '\n';
}

CaseLibrary load_library(const std::filesystem::path& dir) {
    const std::filesystem::path index_path = dir / "library.json";
    if (!std::filesystem::exists(index_path)) {
        throw IoError("no library index at " + index_path.string());
    }
    const json index = read_json_file(index_path, "library index");
    if (!index.contains("format_version") || !index["format_version"].is_number_integer()) {
        throw FormatError(index_path.string() + ": missing format_version");
    }
    if (index["format_version"].get<int>() != kLibraryFormatVersion) {
        throw VersionError(index_path.string() + ": unsupported library format version " +
                           index["format_version"].dump());
    }

    CaseLibrary lib;
    lib.style_id = index.value("style_id", std::string("default"));
    lib.width = index.value("width", 0);
    lib.height = index.value("height", 0);
    lib.region_map = load_region_map(dir / "region_map.json");
    for (const auto& id_json : index["cases"]) {
        const std::string id = id_json.get<std::string>();
        const std::filesystem::path case_dir = dir / id;
        Case c;
        c.id = id;
        c.photo = load_png(case_dir / "photo.png");
        c.sketch = load_png(case_dir / "sketch.png");
        c.neutral_sketch = load_png(case_dir / "neutral.png");
        c.exaggeration_field = load_field(case_dir / "field.efld");
        c.photo_landmarks = load_landmarks(case_dir / "landmarks_photo.json");
        c.sketch_landmarks = load_landmarks(case_dir / "landmarks_sketch.json");
        c.neutral_landmarks = load_landmarks(case_dir / "landmarks_neutral.json");
        if (c.photo.width != lib.width || c.photo.height != lib.height ||
            !c.photo.same_dims(c.sketch) || !c.photo.same_dims(c.neutral_sketch) ||
            c.exaggeration_field.width != lib.width ||
            c.exaggeration_field.height != lib.height) {
            throw ValidationError("case " + id + ": inconsistent dimensions in stored library");
        }
        lib.cases.push_back(std::move(c));
    }
    if (lib.cases.empty()) throw ValidationError(dir.string() + ": library has no cases");
    return lib;
}

}  // namespace sketchcbr
