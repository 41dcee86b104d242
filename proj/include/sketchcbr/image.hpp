#pragma once
// 8-bit grayscale image container plus PNG I/O.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sketchcbr/errors.hpp"

namespace sketchcbr {

struct ImageGray {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // row-major, data[y * width + x]

    ImageGray() = default;
    ImageGray(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    bool same_dims(const ImageGray& other) const {
        return width == other.width && height == other.height;
    }

    friend bool operator==(const ImageGray& a, const ImageGray& b) {
        return a.width == b.width && a.height == b.height && a.data == b.data;
    }
};

// Bilinear sample at (x, y). Positions outside [0, w-1] x [0, h-1] return
// the background value (white paper).
double bilinear_sample(const ImageGray& img, double x, double y, double background = 255.0);

ImageGray load_png(const std::filesystem::path& path);
void save_png(const ImageGray& img, const std::filesystem::path& path);

// Separable Gaussian smoothing with replicated borders.
ImageGray gaussian_blur(const ImageGray& img, int radius, double sigma);

// Half-resolution image by 2x2 averaging (odd edges replicate).
ImageGray downsample2(const ImageGray& img);

}  // namespace sketchcbr
