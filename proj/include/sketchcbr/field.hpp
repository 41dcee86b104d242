#pragma once
// Dense 2-D displacement field and its binary EFLD file format.
//
// EFLD layout (little-endian): magic "EFLD", version u8 = 1, u32 width,
// u32 height, then width*height (dx, dy) float32 pairs in row-major order.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sketchcbr/errors.hpp"
#include "sketchcbr/types.hpp"

namespace sketchcbr {

struct DisplacementField {
    int width = 0;
    int height = 0;
    std::vector<Vec2f> vectors;  // row-major

    DisplacementField() = default;
    DisplacementField(int w, int h)
        : width(w), height(h), vectors(static_cast<std::size_t>(w) * h) {}

    Vec2f at(int x, int y) const { return vectors[static_cast<std::size_t>(y) * width + x]; }
    Vec2f& at(int x, int y) { return vectors[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const DisplacementField& a, const DisplacementField& b);
};

// Bilinear sample of the field at a fractional position; clamps to the border.
Vec2f sample_field(const DisplacementField& field, double x, double y);

DisplacementField load_field(const std::filesystem::path& path);
void save_field(const DisplacementField& field, const std::filesystem::path& path);

}  // namespace sketchcbr
