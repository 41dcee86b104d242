#include "sketchcbr/features.hpp"

#include <algorithm>
#include <cmath>

namespace sketchcbr {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::array<double, kSurfDim> surf_descriptor(const RegionPatch& patch) {
    const int w = patch.width();
    const int h = patch.height();
    if (w < 4 || h < 4) {
        throw PatchTooSmallError("surf_descriptor: patch " + std::to_string(w) + "x" +
                                 std::to_string(h) + " is smaller than 4x4");
    }
    std::array<double, kSurfDim> acc{};
    // 2x2 Haar responses, attributed to the top-left pixel of the support.
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            if (!patch.in_mask(x, y)) continue;
            const double i00 = patch.image.at(x, y);
            const double i10 = patch.image.at(x + 1, y);
            const double i01 = patch.image.at(x, y + 1);
            const double i11 = patch.image.at(x + 1, y + 1);
            const double dx = (i10 + i11) - (i00 + i01);
            const double dy = (i01 + i11) - (i00 + i10);
            const int cx = std::min(3, x * 4 / w);
            const int cy = std::min(3, y * 4 / h);
            double* cell = acc.data() + (cy * 4 + cx) * 4;
            cell[0] += dx;
            cell[1] += dy;
            cell[2] += std::abs(dx);
            cell[3] += std::abs(dy);
        }
    }
    double norm_sq = 0.0;
    for (const double v : acc) norm_sq += v * v;
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& v : acc) v *= inv;
    } else {
        acc.fill(0.0);
    }
    return acc;
}

std::array<double, kGrayBins> gray_histogram(const RegionPatch& patch) {
    std::array<double, kGrayBins> counts{};
    double total = 0.0;
    const int w = patch.width();
    for (int y = 0; y < patch.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            if (!patch.in_mask(x, y)) continue;
            ++counts[patch.image.at(x, y) >> 3];
            ++total;
        }
    }
    if (total == 0.0) throw EmptyRegionError("gray_histogram: patch mask is empty");
    for (double& v : counts) v /= total;
    return counts;
}

std::array<double, kDirBins> gradient_direction_histogram(const RegionPatch& patch) {
    const int w = patch.width();
    const int h = patch.height();
    if (w < 3 || h < 3) {
        throw PatchTooSmallError("gradient_direction_histogram: patch " + std::to_string(w) +
                                 "x" + std::to_string(h) + " is smaller than 3x3");
    }
    std::array<double, kDirBins> acc{};
    double total = 0.0;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            if (!patch.in_mask(x, y)) continue;
            const auto& img = patch.image;
            const double gx = (img.at(x + 1, y - 1) + 2.0 * img.at(x + 1, y) +
                               img.at(x + 1, y + 1)) -
                              (img.at(x - 1, y - 1) + 2.0 * img.at(x - 1, y) +
                               img.at(x - 1, y + 1));
            const double gy = (img.at(x - 1, y + 1) + 2.0 * img.at(x, y + 1) +
                               img.at(x + 1, y + 1)) -
                              (img.at(x - 1, y - 1) + 2.0 * img.at(x, y - 1) +
                               img.at(x + 1, y - 1));
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            const double angle = std::atan2(gy, gx);  // [-pi, pi]
            int bin = static_cast<int>((angle + kPi) * kDirBins / (2.0 * kPi));
            if (bin >= kDirBins) bin = 0;  // atan2 can return exactly +pi
            acc[bin] += mag;
            total += mag;
        }
    }
    if (total == 0.0) {
        acc.fill(1.0 / kDirBins);
        return acc;
    }
    for (double& v : acc) v /= total;
    return acc;
}

std::vector<Point> resample_outline(std::span<const Point> points, int count) {
    const std::size_t n = points.size();
    if (n < 2) throw ControlPointError("resample_outline: need at least 2 points");
    std::vector<double> seg_len(n);
    double perimeter = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        seg_len[i] = norm(points[(i + 1) % n] - points[i]);
        perimeter += seg_len[i];
    }
    if (perimeter <= 1e-12) {
        throw DegenerateGeometryError("resample_outline: outline has zero length");
    }
    std::vector<Point> vertices;
    vertices.reserve(count);
    const double step = perimeter / count;
    std::size_t seg = 0;
    double seg_start = 0.0;
    for (int k = 0; k < count; ++k) {
        const double target = k * step;
        while (seg_start + seg_len[seg] < target && seg + 1 < n) {
            seg_start += seg_len[seg];
            ++seg;
        }
        const double t = seg_len[seg] > 0.0 ? (target - seg_start) / seg_len[seg] : 0.0;
        const Point a = points[seg];
        const Point b = points[(seg + 1) % n];
        vertices.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return vertices;
}

std::array<double, kContextBinsPerPoint> angular_histogram(std::span<const Point> vertices,
                                                           Point reference) {
    std::array<double, kContextBinsPerPoint> counts{};
    double total = 0.0;
    for (const Point& v : vertices) {
        const Point d = v - reference;
        if (norm2(d) < 1e-16) continue;  // vertex coincides with the reference point
        const double angle = std::atan2(d.y, d.x);
        int bin = static_cast<int>((angle + kPi) * kContextBinsPerPoint / (2.0 * kPi));
        if (bin >= kContextBinsPerPoint) bin = 0;
        ++counts[bin];
        ++total;
    }
    if (total > 0.0) {
        for (double& v : counts) v /= total;
    }
    return counts;
}

std::vector<double> shape_context(std::span<const Point> points) {
    const std::vector<Point> vertices = resample_outline(points, kOutlineSamples);
    std::vector<double> out;
    out.reserve(points.size() * kContextBinsPerPoint);
    for (const Point& reference : points) {
        const auto hist = angular_histogram(vertices, reference);
        out.insert(out.end(), hist.begin(), hist.end());
    }
    return out;
}

FeatureVector region_features(const RegionPatch& patch) {
    FeatureVector fv;
    fv.region_id = patch.region_id;
    fv.num_landmarks = static_cast<int>(patch.landmarks.size());
    fv.values.reserve(kSurfDim + kGrayBins + kDirBins +
                      kContextBinsPerPoint * patch.landmarks.size());
    const auto append = [&fv](const auto& block) {
        for (const double v : block) fv.values.push_back(static_cast<float>(v));
    };
    append(surf_descriptor(patch));
    append(gray_histogram(patch));
    append(gradient_direction_histogram(patch));
    append(shape_context(patch.landmarks));
    return fv;
}

CompositeInput compose_input(const FeatureVector& fx, const FeatureVector& fi,
                             const FeatureVector& sx) {
    if (fx.region_id != fi.region_id || fx.region_id != sx.region_id ||
        fx.num_landmarks != fi.num_landmarks || fx.num_landmarks != sx.num_landmarks) {
        throw RegionMismatchError("compose_input: feature vectors come from different regions");
    }
    CompositeInput in;
    in.region_id = fx.region_id;
    in.num_landmarks = fx.num_landmarks;
    in.values.reserve(fx.values.size() + fi.values.size() + sx.values.size());
    in.values.insert(in.values.end(), fx.values.begin(), fx.values.end());
    in.values.insert(in.values.end(), fi.values.begin(), fi.values.end());
    in.values.insert(in.values.end(), sx.values.begin(), sx.values.end());
    return in;
}

}  // namespace sketchcbr
