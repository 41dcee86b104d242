#include <doctest.h>

#include <cmath>
#include <vector>

#include "sketchcbr/metrics.hpp"
#include "sketchcbr/rng.hpp"
#include "support/synthetic.hpp"

using namespace sketchcbr;

TEST_CASE("nmi: self-similarity is 2 for non-constant images") {
    const ImageGray img = testsupport::random_image(50, 40, 12);
    CHECK(nmi(img, img) == doctest::Approx(2.0).epsilon(1e-9));

    const auto pair = testsupport::make_pair(3, {.width = 100, .height = 120, .count = 1});
    CHECK(nmi(pair.photo, pair.photo) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("nmi: symmetric in its arguments") {
    const ImageGray a = testsupport::random_image(30, 30, 1);
    const ImageGray b = testsupport::random_image(30, 30, 2);
    CHECK(nmi(a, b) == nmi(b, a));
}

TEST_CASE("nmi: independent uniform noise scores near 1") {
    const ImageGray a = testsupport::random_image(100, 100, 41);
    const ImageGray b = testsupport::random_image(100, 100, 42);

    // Independent oracle: joint histogram entropies computed directly.
    std::vector<std::uint32_t> joint(64 * 64, 0);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        ++joint[(a.data[i] / 4) * 64 + b.data[i] / 4];
    }
    const double n = static_cast<double>(a.data.size());
    double ha = 0.0, hb = 0.0, hab = 0.0;
    std::vector<double> ma(64, 0.0), mb(64, 0.0);
    for (int i = 0; i < 64; ++i) {
        for (int j = 0; j < 64; ++j) {
            const double p = joint[i * 64 + j] / n;
            ma[i] += p;
            mb[j] += p;
            if (p > 0) hab -= p * std::log(p);
        }
    }
    for (int i = 0; i < 64; ++i) {
        if (ma[i] > 0) ha -= ma[i] * std::log(ma[i]);
        if (mb[i] > 0) hb -= mb[i] * std::log(mb[i]);
    }
    const double expected = (ha + hb) / hab;
    const double got = nmi(a, b);
    CHECK(got == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(got - 1.0) < 0.05);
}

TEST_CASE("nmi: constant images take the degenerate value 1") {
    const ImageGray c1(20, 20, 100);
    const ImageGray c2(20, 20, 200);
    CHECK(nmi(c1, c2) == doctest::Approx(1.0));
    CHECK(nmi(c1, c1) == doctest::Approx(1.0));
    // One constant argument also gives 1: H(A,B) = H(B).
    const ImageGray r = testsupport::random_image(20, 20, 9);
    CHECK(nmi(c1, r) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("nmi: invariant to a shared bin-preserving permutation of gray levels") {
    ImageGray a = testsupport::random_image(40, 40, 21);
    ImageGray b = testsupport::random_image(40, 40, 22);
    const double before = nmi(a, b);
    // Reverse the 64 intensity bins on both images (bin-preserving bijection).
    ImageGray a2 = a, b2 = b;
    for (auto img : {&a2, &b2}) {
        for (std::uint8_t& v : img->data) {
            v = static_cast<std::uint8_t>((63 - v / 4) * 4 + (v % 4));
        }
    }
    CHECK(nmi(a2, b2) == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("nmi: dimension mismatch") {
    const ImageGray a(10, 10, 0);
    const ImageGray b(11, 10, 0);
    CHECK_THROWS_AS(nmi(a, b), DimensionError);
}

TEST_CASE("nmi_masked: compares only the mask intersection") {
    ImageGray a = testsupport::random_image(20, 20, 31);
    ImageGray b = a;
    // Corrupt b outside the mask; masked NMI must stay maximal.
    std::vector<std::uint8_t> mask(a.data.size(), 0);
    for (std::size_t i = 0; i < mask.size() / 2; ++i) mask[i] = 1;
    for (std::size_t i = mask.size() / 2; i < mask.size(); ++i) {
        b.data[i] = static_cast<std::uint8_t>(255 - b.data[i]);
    }
    CHECK(nmi_masked(a, mask, b, mask) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("point_set_distance: basic identities") {
    const std::vector<Point> qa{{0.0, 0.0}};
    const std::vector<Point> qb{{3.0, 4.0}};
    CHECK(point_set_distance(qa, qb) == doctest::Approx(25.0));
    CHECK(point_set_distance(qa, qa) == 0.0);

    std::vector<Point> a67(67), b67(67);
    Rng rng(7);
    for (int i = 0; i < 67; ++i) {
        a67[i] = {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)};
        b67[i] = {a67[i].x + 1.0, a67[i].y};
    }
    CHECK(point_set_distance(a67, b67) == doctest::Approx(67.0).epsilon(1e-12));
}

TEST_CASE("point_set_distance: translation covariance and mismatch error") {
    Rng rng(13);
    std::vector<Point> a(10), b(10), at(10), bt(10);
    for (int i = 0; i < 10; ++i) {
        a[i] = {rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0)};
        b[i] = {rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0)};
        at[i] = {a[i].x + 11.5, a[i].y - 3.25};
        bt[i] = {b[i].x + 11.5, b[i].y - 3.25};
    }
    CHECK(point_set_distance(a, b) == doctest::Approx(point_set_distance(at, bt)).epsilon(1e-9));
    const std::vector<Point> shorter(9);
    CHECK_THROWS_AS(point_set_distance(a, shorter), CorrespondenceError);
}
