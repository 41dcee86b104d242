#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sketchcbr/features.hpp"
#include "sketchcbr/rng.hpp"
#include "support/synthetic.hpp"

using namespace sketchcbr;

namespace {

constexpr double kPi = 3.14159265358979323846;

RegionPatch patch_from(const ImageGray& img) {
    return testsupport::full_patch(
        img,
        {{2.0, 2.0}, {double(img.width - 3), 2.0}, {double(img.width / 2), double(img.height - 3)}});
}

template <typename Block>
double sum_of(const Block& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("surf_descriptor: constant patch gives the all-zero vector") {
    const auto surf = surf_descriptor(patch_from(ImageGray(16, 16, 77)));
    for (const double v : surf) CHECK(v == 0.0);
}

TEST_CASE("surf_descriptor: vertical step edge drives |dx| over |dy|") {
    ImageGray img(16, 16, 0);
    for (int y = 0; y < 16; ++y) {
        for (int x = 8; x < 16; ++x) img.at(x, y) = 255;
    }
    const RegionPatch patch = patch_from(img);
    const auto surf = surf_descriptor(patch);
    CHECK(surf.size() == 64);

    // Brute-force oracle: recompute 2x2 Haar responses per cell directly.
    std::array<double, 64> expected{};
    for (int y = 0; y + 1 < 16; ++y) {
        for (int x = 0; x + 1 < 16; ++x) {
            const double dx = (img.at(x + 1, y) + img.at(x + 1, y + 1)) -
                              (img.at(x, y) + img.at(x, y + 1));
            const double dy = (img.at(x, y + 1) + img.at(x + 1, y + 1)) -
                              (img.at(x, y) + img.at(x + 1, y));
            double* cell = expected.data() + ((y * 4 / 16) * 4 + x * 4 / 16) * 4;
            cell[0] += dx;
            cell[1] += dy;
            cell[2] += std::abs(dx);
            cell[3] += std::abs(dy);
        }
    }
    double norm = 0.0;
    for (const double v : expected) norm += v * v;
    norm = std::sqrt(norm);
    for (int i = 0; i < 64; ++i) {
        CHECK(surf[i] == doctest::Approx(expected[i] / norm).epsilon(1e-9));
    }
    // Cells in the columns crossing the edge (cx = 1, 2): |dx| dominates |dy|.
    for (int cy = 0; cy < 4; ++cy) {
        for (int cx = 1; cx <= 2; ++cx) {
            const int base = (cy * 4 + cx) * 4;
            if (surf[base + 2] > 0.0) CHECK(surf[base + 2] > surf[base + 3]);
        }
    }
}

TEST_CASE("surf_descriptor: rejects patches under 4x4") {
    CHECK_THROWS_AS(surf_descriptor(patch_from(ImageGray(3, 8, 0))), PatchTooSmallError);
}

TEST_CASE("gray_histogram: concentration, normalization, randomness") {
    const auto dark = gray_histogram(patch_from(ImageGray(10, 10, 0)));
    CHECK(dark[0] == doctest::Approx(1.0));
    for (int i = 1; i < 32; ++i) CHECK(dark[i] == 0.0);

    const auto rand_hist = gray_histogram(patch_from(testsupport::random_image(100, 100, 77)));
    CHECK(sum_of(rand_hist) == doctest::Approx(1.0).epsilon(1e-9));
    // Binomial bound: each bin within 3 sigma of 1/32 over 10^4 draws.
    const double p = 1.0 / 32.0;
    const double sigma = std::sqrt(p * (1 - p) / 10000.0);
    for (const double v : rand_hist) CHECK(std::abs(v - p) <= 3.0 * sigma);

    RegionPatch empty = patch_from(ImageGray(10, 10, 5));
    std::fill(empty.mask.begin(), empty.mask.end(), 0);
    CHECK_THROWS_AS(gray_histogram(empty), EmptyRegionError);
}

TEST_CASE("gradient_direction_histogram: ramp concentrates in the zero-direction bin") {
    // Horizontal black-to-white ramp: gradient points along +x (angle 0).
    ImageGray img(8, 8, 0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) img.at(x, y) = static_cast<std::uint8_t>(x * 30);
    }
    const auto hist = gradient_direction_histogram(patch_from(img));
    CHECK(sum_of(hist) == doctest::Approx(1.0).epsilon(1e-9));
    // Brute-force Sobel on the interior gives angle atan2(0, +) = 0;
    // bin floor((0 + pi) / (2 pi / 32)) = 16.
    CHECK(hist[16] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gradient_direction_histogram: constant patch is uniform") {
    const auto hist = gradient_direction_histogram(patch_from(ImageGray(12, 12, 50)));
    for (const double v : hist) CHECK(v == doctest::Approx(1.0 / 32.0));
}

TEST_CASE("gradient_direction_histogram: 90-degree rotation permutes by 8 bins") {
    const ImageGray img = testsupport::random_image(20, 20, 55);
    ImageGray rot(20, 20);
    // Rotate 90 degrees clockwise: (x, y) -> (w - 1 - y, x).
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) rot.at(19 - y, x) = img.at(x, y);
    }
    const auto h0 = gradient_direction_histogram(patch_from(img));
    const auto h1 = gradient_direction_histogram(patch_from(rot));
    for (int b = 0; b < 32; ++b) {
        CHECK(h1[(b + 8) % 32] == doctest::Approx(h0[b]).epsilon(1e-6));
    }
}

TEST_CASE("shape_context: dimensionality and per-point normalization") {
    std::vector<Point> outline;
    for (int k = 0; k < 36; ++k) {
        const double a = 2.0 * kPi * k / 36.0;
        outline.push_back({50.0 + 20.0 * std::cos(a), 50.0 + 20.0 * std::sin(a)});
    }
    const auto ctx = shape_context(outline);
    CHECK(ctx.size() == 8 * outline.size());
    for (std::size_t i = 0; i < outline.size(); ++i) {
        double s = 0.0;
        for (int b = 0; b < 8; ++b) s += ctx[i * 8 + b];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("shape_context: centroid of a circle outline sees uniform bins") {
    // 100 uniformly resampled vertices of a circle, viewed from its center.
    std::vector<Point> circle;
    for (int k = 0; k < 24; ++k) {
        const double a = 2.0 * kPi * k / 24.0;
        circle.push_back({50.0 + 20.0 * std::cos(a), 50.0 + 20.0 * std::sin(a)});
    }
    const std::vector<Point> vertices = resample_outline(circle, 100);
    REQUIRE(vertices.size() == 100);
    const auto hist = angular_histogram(vertices, {50.0, 50.0});

    // Brute-force oracle: count the sampled vertices per bin directly.
    std::array<int, 8> counts{};
    for (const Point& v : vertices) {
        const double angle = std::atan2(v.y - 50.0, v.x - 50.0);
        int bin = static_cast<int>((angle + kPi) * 8 / (2.0 * kPi));
        if (bin >= 8) bin = 0;
        ++counts[bin];
    }
    for (int b = 0; b < 8; ++b) {
        CHECK(hist[b] == doctest::Approx(counts[b] / 100.0).epsilon(1e-12));
        CHECK(std::abs(hist[b] - 0.125) <= 0.02);
    }
}

TEST_CASE("shape_context: translation invariance") {
    Rng rng(9);
    std::vector<Point> pts, moved;
    for (int i = 0; i < 8; ++i) {
        pts.push_back({rng.uniform(0.0, 40.0), rng.uniform(0.0, 40.0)});
        moved.push_back({pts.back().x + 17.5, pts.back().y - 6.25});
    }
    const auto a = shape_context(pts);
    const auto b = shape_context(moved);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-6);
}

TEST_CASE("shape_context: degenerate outline") {
    const std::vector<Point> dup{{5.0, 5.0}, {5.0, 5.0}, {5.0, 5.0}};
    CHECK_THROWS_AS(shape_context(dup), DegenerateGeometryError);
}

TEST_CASE("compose_input: composite lengths match the region landmark counts") {
    CHECK(composite_dim(6) == 528);
    CHECK(composite_dim(11) == 648);

    const testsupport::DatasetOptions opts{.width = 120, .height = 150, .count = 1};
    const auto pair = testsupport::make_pair(2, opts);
    const auto patches =
        segment_regions(pair.photo, pair.photo_landmarks, testsupport::synthetic_region_map());
    for (const auto& patch : patches) {
        const FeatureVector fv = region_features(patch);
        CHECK(fv.dim() == 128 + 8 * static_cast<int>(patch.landmarks.size()));
        const CompositeInput in = compose_input(fv, fv, fv);
        CHECK(static_cast<int>(in.values.size()) ==
              composite_dim(static_cast<int>(patch.landmarks.size())));
        CHECK(in.values.size() >= 528);
        CHECK(in.values.size() <= 648);
        // Identical first two inputs produce identical first two blocks.
        for (int i = 0; i < fv.dim(); ++i) CHECK(in.values[i] == in.values[fv.dim() + i]);
    }
}

TEST_CASE("compose_input: region mismatch") {
    const ImageGray img = testsupport::random_image(20, 20, 3);
    RegionPatch p1 = patch_from(img);
    RegionPatch p2 = patch_from(img);
    p2.region_id = 2;
    const FeatureVector a = region_features(p1);
    const FeatureVector b = region_features(p2);
    CHECK_THROWS_AS(compose_input(a, b, a), RegionMismatchError);
}

TEST_CASE("descriptors: translation invariance of the full region vector") {
    // Same content and landmarks shifted together inside a larger canvas.
    const ImageGray content = testsupport::random_image(24, 24, 65);
    RegionPatch pa, pb;
    pa.region_id = pb.region_id = 1;
    pa.x0 = 5, pa.y0 = 7;
    pb.x0 = 25, pb.y0 = 23;
    pa.image = content;
    pb.image = content;
    pa.mask.assign(24 * 24, 1);
    pb.mask.assign(24 * 24, 1);
    pa.landmarks = {{3.0, 4.0}, {20.0, 5.0}, {12.0, 20.0}};
    pb.landmarks = pa.landmarks;  // patch-local, so identical after the shift
    const FeatureVector fa = region_features(pa);
    const FeatureVector fb = region_features(pb);
    REQUIRE(fa.dim() == fb.dim());
    for (int i = 0; i < fa.dim(); ++i) CHECK(std::abs(fa.values[i] - fb.values[i]) <= 1e-6f);
}
