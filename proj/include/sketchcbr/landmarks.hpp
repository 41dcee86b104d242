#pragma once
// Facial feature point sets and the landmark-to-region assignment.
// The 67-point index scheme is documented in docs/landmarks.md; the
// assignment itself is external configuration (a JSON region map), not
// hard-coded here.

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "sketchcbr/errors.hpp"
#include "sketchcbr/types.hpp"

namespace sketchcbr {

inline constexpr int kNumLandmarks = 67;
inline constexpr int kNumRegions = 9;

struct LandmarkSet {
    std::vector<Point> points;  // exactly kNumLandmarks entries

    std::span<const Point> span() const { return {points.data(), points.size()}; }
};

// Throws FormatError if the count is wrong, ValidationError if any point lies
// outside [0, width) x [0, height).
void validate_landmarks(const LandmarkSet& set, int width, int height,
                        const std::string& source_name);

LandmarkSet load_landmarks(const std::filesystem::path& path);
void save_landmarks(const LandmarkSet& set, const std::filesystem::path& path);

class RegionMap {
public:
    RegionMap() = default;

    // assignment[i] = region id in 1..kNumRegions for landmark i.
    explicit RegionMap(const std::array<int, kNumLandmarks>& assignment);

    int region_of(int landmark_index) const { return assignment_[landmark_index]; }

    // Landmark indices of one region, in ascending index order.
    const std::vector<int>& indices_of(int region_id) const {
        return by_region_[region_id - 1];
    }

    friend bool operator==(const RegionMap& a, const RegionMap& b) {
        return a.assignment_ == b.assignment_;
    }

private:
    std::array<int, kNumLandmarks> assignment_{};
    std::array<std::vector<int>, kNumRegions> by_region_;
};

RegionMap load_region_map(const std::filesystem::path& path);
void save_region_map(const RegionMap& map, const std::filesystem::path& path);

// Gathers the subset of points whose indices belong to the given region.
std::vector<Point> region_points(const LandmarkSet& set, const RegionMap& map, int region_id);

}  // namespace sketchcbr
