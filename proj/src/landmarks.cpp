#include "sketchcbr/landmarks.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace sketchcbr {

using nlohmann::json;

void validate_landmarks(const LandmarkSet& set, int width, int height,
                        const std::string& source_name) {
    if (set.points.size() != kNumLandmarks) {
        throw FormatError(source_name + ": expected " + std::to_string(kNumLandmarks) +
                          " landmarks, got " + std::to_string(set.points.size()));
    }
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        const Point& p = set.points[i];
        if (!(p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height)) {
            throw ValidationError(source_name + ": landmark " + std::to_string(i) +
                                  " out of image bounds");
        }
    }
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open landmark file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("invalid landmark JSON in " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw FormatError(path.string() + ": landmark file must be a JSON array");
    LandmarkSet set;
    set.points.reserve(j.size());
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
            !entry[1].is_number()) {
            throw FormatError(path.string() + ": each landmark must be an [x, y] number pair");
        }
        set.points.push_back({entry[0].get<double>(), entry[1].get<double>()});
    }
    if (set.points.size() != kNumLandmarks) {
        throw FormatError(path.string() + ": expected " + std::to_string(kNumLandmarks) +
                          " landmarks, got " + std::to_string(set.points.size()));
    }
    return set;
}

void save_landmarks(const LandmarkSet& set, const std::filesystem::path& path) {
    json j = json::array();
    for (const Point& p : set.points) j.push_back({p.x, p.y});
    std::ofstream out(path);
    if (!out) throw IoError("cannot open landmark file for writing: " + path.string());
    out << j.dump(2) << '\n';
}

RegionMap::RegionMap(const std::array<int, kNumLandmarks>& assignment)
    : assignment_(assignment) {
    std::array<bool, kNumRegions> seen{};
    for (int i = 0; i < kNumLandmarks; ++i) {
        const int r = assignment_[i];
        if (r < 1 || r > kNumRegions) {
            throw ConfigError("landmark " + std::to_string(i) + " assigned to invalid region " +
                              std::to_string(r));
        }
        seen[r - 1] = true;
        by_region_[r - 1].push_back(i);
    }
    for (int r = 1; r <= kNumRegions; ++r) {
        if (!seen[r - 1]) {
            throw ConfigError("region " + std::to_string(r) + " has no landmarks assigned");
        }
    }
}

RegionMap load_region_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open region map: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("invalid region map JSON in " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw FormatError(path.string() + ": region map must be a JSON object");

    std::array<int, kNumLandmarks> assignment;
    assignment.fill(0);
    std::set<int> assigned;
    for (const auto& [key, value] : j.items()) {
        int region = 0;
        try {
            region = std::stoi(key);
        } catch (...) {
            throw FormatError(path.string() + ": region key '" + key + "' is not an integer");
        }
        if (region < 1 || region > kNumRegions) {
            throw FormatError(path.string() + ": region id " + key + " out of range 1..9");
        }
        if (!value.is_array()) {
            throw FormatError(path.string() + ": region " + key + " must map to an index array");
        }
        for (const auto& idx : value) {
            const int i = idx.get<int>();
            if (i < 0 || i >= kNumLandmarks) {
                throw FormatError(path.string() + ": landmark index " + std::to_string(i) +
                                  " out of range");
            }
            if (!assigned.insert(i).second) {
                throw FormatError(path.string() + ": landmark index " + std::to_string(i) +
                                  " assigned twice");
            }
            assignment[i] = region;
        }
    }
    if (assigned.size() != kNumLandmarks) {
        throw FormatError(path.string() + ": region map must assign all " +
                          std::to_string(kNumLandmarks) + " landmarks");
    }
    try {
        return RegionMap(assignment);
    } catch (const ConfigError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_region_map(const RegionMap& map, const std::filesystem::path& path) {
    json j = json::object();
    for (int r = 1; r <= kNumRegions; ++r) {
        j[std::to_string(r)] = map.indices_of(r);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open region map for writing: " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<Point> region_points(const LandmarkSet& set, const RegionMap& map, int region_id) {
    std::vector<Point> pts;
    for (int idx : map.indices_of(region_id)) pts.push_back(set.points[idx]);
    return pts;
}

}  // namespace sketchcbr
