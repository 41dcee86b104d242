#include "sketchcbr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sketchcbr/kernels.hpp"
#include "kernels/mls_pixel.hpp"

namespace sketchcbr {

namespace {

kernels::MlsControls make_controls(std::span<const Point> src, std::span<const Point> dst) {
    if (src.size() != dst.size()) {
        throw CorrespondenceError("control point count mismatch: " + std::to_string(src.size()) +
                                  " vs " + std::to_string(dst.size()));
    }
    if (src.size() < 3) {
        throw ControlPointError("need at least 3 control points, got " +
                                std::to_string(src.size()));
    }
    // Collinear sources leave the similarity fit underdetermined.
    std::size_t far_idx = 0;
    double far_d2 = 0.0;
    for (std::size_t i = 1; i < src.size(); ++i) {
        const double d2 = norm2(src[i] - src[0]);
        if (d2 > far_d2) {
            far_d2 = d2;
            far_idx = i;
        }
    }
    const double span_len = std::sqrt(far_d2);
    double max_dev = 0.0;
    if (span_len > 0.0) {
        const Point axis = src[far_idx] - src[0];
        for (const Point& p : src) {
            max_dev = std::max(max_dev, std::abs(cross(axis, p - src[0])) / span_len);
        }
    }
    if (max_dev < 1e-8 * (1.0 + span_len)) {
        throw DegenerateGeometryError("control points are collinear");
    }

    kernels::MlsControls c;
    c.px.reserve(src.size());
    c.py.reserve(src.size());
    c.qx.reserve(src.size());
    c.qy.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        c.px.push_back(src[i].x);
        c.py.push_back(src[i].y);
        c.qx.push_back(dst[i].x);
        c.qy.push_back(dst[i].y);
    }
    return c;
}

std::uint8_t to_gray(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

}  // namespace

DisplacementField mls_field(std::span<const Point> src, std::span<const Point> dst, int width,
                            int height) {
    if (width < 1 || height < 1) throw DimensionError("field dimensions must be positive");
    const kernels::MlsControls controls = make_controls(src, dst);
    DisplacementField field(width, height);
    kernels::active().mls_field(controls, width, height, field.vectors.data());
    return field;
}

Point mls_displacement_at(std::span<const Point> src, std::span<const Point> dst, Point v) {
    const kernels::MlsControls controls = make_controls(src, dst);
    const Vec2f d = kernels::detail::mls_eval_pixel(controls, v.x, v.y);
    return {static_cast<double>(d.dx), static_cast<double>(d.dy)};
}

ImageGray apply_field(const ImageGray& img, const DisplacementField& field) {
    if (img.width != field.width || img.height != field.height) {
        throw DimensionError("apply_field: image and field dimensions differ");
    }
    ImageGray out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Vec2f v = field.at(x, y);
            out.at(x, y) = to_gray(bilinear_sample(img, x - v.dx, y - v.dy));
        }
    }
    return out;
}

ImageGray warp_to_points(const ImageGray& img, std::span<const Point> from,
                         std::span<const Point> to, int out_w, int out_h) {
    if (from.size() == to.size() && img.width == out_w && img.height == out_h &&
        std::equal(from.begin(), from.end(), to.begin())) {
        return img;
    }
    const DisplacementField back = mls_field(to, from, out_w, out_h);
    ImageGray out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Vec2f v = back.at(x, y);
            out.at(x, y) = to_gray(bilinear_sample(img, x + v.dx, y + v.dy));
        }
    }
    return out;
}

namespace {

// Monotone-chain convex hull; returns vertices in counter-clockwise order.
std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(), [](Point a, Point b) { return a == b; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) throw DegenerateGeometryError("convex hull needs 3 distinct points");
    std::vector<Point> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

bool inside_hull(const std::vector<Point>& hull, Point p) {
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point a = hull[i];
        const Point b = hull[(i + 1) % hull.size()];
        if (cross(b - a, p - a) < -1e-9) return false;
    }
    return true;
}

}  // namespace

std::vector<std::int16_t> region_label_map(const LandmarkSet& landmarks, const RegionMap& map,
                                           int width, int height) {
    const std::vector<Point> hull = convex_hull(landmarks.points);
    std::vector<std::int16_t> labels(static_cast<std::size_t>(width) * height, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Point p{static_cast<double>(x), static_cast<double>(y)};
            if (!inside_hull(hull, p)) continue;
            double best_d2 = std::numeric_limits<double>::infinity();
            int best_region = 0;
            for (int i = 0; i < kNumLandmarks; ++i) {
                const double d2 = norm2(landmarks.points[i] - p);
                const int region = map.region_of(i);
                if (d2 < best_d2 || (d2 == best_d2 && region < best_region)) {
                    best_d2 = d2;
                    best_region = region;
                }
            }
            labels[static_cast<std::size_t>(y) * width + x] =
                static_cast<std::int16_t>(best_region);
        }
    }
    return labels;
}

std::vector<RegionPatch> segment_regions(const ImageGray& image, const LandmarkSet& landmarks,
                                         const RegionMap& map) {
    const std::vector<std::int16_t> labels =
        region_label_map(landmarks, map, image.width, image.height);

    struct Box {
        int min_x = std::numeric_limits<int>::max();
        int min_y = std::numeric_limits<int>::max();
        int max_x = -1, max_y = -1;
    };
    std::array<Box, kNumRegions> boxes;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const int r = labels[static_cast<std::size_t>(y) * image.width + x];
            if (r == 0) continue;
            Box& b = boxes[r - 1];
            b.min_x = std::min(b.min_x, x);
            b.min_y = std::min(b.min_y, y);
            b.max_x = std::max(b.max_x, x);
            b.max_y = std::max(b.max_y, y);
        }
    }

    std::vector<RegionPatch> patches;
    patches.reserve(kNumRegions);
    for (int r = 1; r <= kNumRegions; ++r) {
        const Box& b = boxes[r - 1];
        if (b.max_x < 0) {
            throw EmptyRegionError("region " + std::to_string(r) +
                                   " received no pixels during segmentation");
        }
        // Landmarks can fall slightly outside the pixel bbox of their region;
        // grow the box so patch-local landmark coordinates stay inside it.
        int min_x = b.min_x, min_y = b.min_y, max_x = b.max_x, max_y = b.max_y;
        for (int idx : map.indices_of(r)) {
            const Point p = landmarks.points[idx];
            min_x = std::min(min_x, static_cast<int>(std::floor(p.x)));
            min_y = std::min(min_y, static_cast<int>(std::floor(p.y)));
            max_x = std::max(max_x, static_cast<int>(std::ceil(p.x)));
            max_y = std::max(max_y, static_cast<int>(std::ceil(p.y)));
        }
        min_x = std::max(min_x, 0);
        min_y = std::max(min_y, 0);
        max_x = std::min(max_x, image.width - 1);
        max_y = std::min(max_y, image.height - 1);

        RegionPatch patch;
        patch.region_id = r;
        patch.x0 = min_x;
        patch.y0 = min_y;
        const int w = max_x - min_x + 1;
        const int h = max_y - min_y + 1;
        patch.image = ImageGray(w, h);
        patch.mask.assign(static_cast<std::size_t>(w) * h, 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                patch.image.at(x, y) = image.at(min_x + x, min_y + y);
                if (labels[static_cast<std::size_t>(min_y + y) * image.width + (min_x + x)] ==
                    r) {
                    patch.mask[static_cast<std::size_t>(y) * w + x] = 1;
                }
            }
        }
        for (int idx : map.indices_of(r)) {
            patch.landmarks.push_back(
                {landmarks.points[idx].x - min_x, landmarks.points[idx].y - min_y});
        }
        patches.push_back(std::move(patch));
    }
    return patches;
}

BlendResult blend(const ImageGray& a, std::span<const Point> ptsA, const ImageGray& b,
                  std::span<const Point> ptsB, double omega) {
    if (ptsA.size() != ptsB.size()) {
        throw CorrespondenceError("blend: point sets differ in length (" +
                                  std::to_string(ptsA.size()) + " vs " +
                                  std::to_string(ptsB.size()) + ")");
    }
    if (!a.same_dims(b)) throw DimensionError("blend: image dimensions differ");
    omega = std::clamp(omega, 0.0, 1.0);

    if (omega == 0.0) return {a, {ptsA.begin(), ptsA.end()}};
    if (omega == 1.0) return {b, {ptsB.begin(), ptsB.end()}};

    std::vector<Point> mid(ptsA.size());
    for (std::size_t i = 0; i < ptsA.size(); ++i) {
        mid[i] = {(1.0 - omega) * ptsA[i].x + omega * ptsB[i].x,
                  (1.0 - omega) * ptsA[i].y + omega * ptsB[i].y};
    }

    const ImageGray wa = warp_to_points(a, ptsA, mid, a.width, a.height);
    const ImageGray wb = warp_to_points(b, ptsB, mid, b.width, b.height);
    ImageGray out(a.width, a.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = to_gray((1.0 - omega) * wa.data[i] + omega * wb.data[i]);
    }
    return {std::move(out), std::move(mid)};
}

}  // namespace sketchcbr
