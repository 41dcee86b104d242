#include <doctest.h>

#include <cmath>

#include "sketchcbr/errors.hpp"
#include "sketchcbr/kernels.hpp"
#include "sketchcbr/rng.hpp"

using namespace sketchcbr;

namespace {

kernels::MlsControls random_controls(std::size_t n, Rng& rng, double span) {
    kernels::MlsControls c;
    for (std::size_t i = 0; i < n; ++i) {
        c.px.push_back(rng.uniform(0.0, span));
        c.py.push_back(rng.uniform(0.0, span));
        c.qx.push_back(c.px.back() + rng.uniform(-8.0, 8.0));
        c.qy.push_back(c.py.back() + rng.uniform(-8.0, 8.0));
    }
    return c;
}

}  // namespace

TEST_CASE("kernel variants: scalar is always available") {
    const auto names = kernels::available_variants();
    CHECK(names.front() == "scalar");
}

TEST_CASE("mls_field: avx2 matches scalar bit for bit") {
    if (!kernels::avx2_table()) return;  // host without AVX2
    Rng rng(11);
    for (const int width : {37, 64}) {
        const int height = 29;
        const auto controls = random_controls(12, rng, 40.0);
        std::vector<Vec2f> scalar_out(static_cast<std::size_t>(width) * height);
        std::vector<Vec2f> simd_out(scalar_out.size());
        kernels::scalar_table().mls_field(controls, width, height, scalar_out.data());
        kernels::avx2_table()->mls_field(controls, width, height, simd_out.data());
        for (std::size_t i = 0; i < scalar_out.size(); ++i) {
            CHECK(scalar_out[i].dx == simd_out[i].dx);
            CHECK(scalar_out[i].dy == simd_out[i].dy);
        }
    }
}

TEST_CASE("mls_field: control point exactly on a pixel snaps in both variants") {
    kernels::MlsControls c;
    c.px = {5.0, 20.0, 10.0};
    c.py = {5.0, 7.0, 22.0};
    c.qx = {9.0, 21.0, 10.0};
    c.qy = {5.0, 9.0, 25.0};
    std::vector<Vec2f> out(30 * 30);
    kernels::scalar_table().mls_field(c, 30, 30, out.data());
    CHECK(out[5 * 30 + 5].dx == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(out[5 * 30 + 5].dy == doctest::Approx(0.0).epsilon(1e-12));
    if (kernels::avx2_table()) {
        std::vector<Vec2f> simd_out(out.size());
        kernels::avx2_table()->mls_field(c, 30, 30, simd_out.data());
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out[i].dx == simd_out[i].dx);
            CHECK(out[i].dy == simd_out[i].dy);
        }
    }
}

TEST_CASE("ssd_scan: variants agree within float rounding") {
    Rng rng(23);
    for (const std::size_t dim : {3u, 8u, 13u, 64u, 65u}) {
        const std::size_t n = 57;
        std::vector<float> rows(n * dim), query(dim);
        for (float& v : rows) v = static_cast<float>(rng.uniform(-2.0, 2.0));
        for (float& v : query) v = static_cast<float>(rng.uniform(-2.0, 2.0));
        std::vector<float> ref(n), alt(n);
        kernels::scalar_table().ssd_scan(rows.data(), n, dim, query.data(), ref.data());
        // Independent double-precision oracle.
        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = static_cast<double>(rows[r * dim + j]) - query[j];
                acc += d * d;
            }
            CHECK(ref[r] == doctest::Approx(acc).epsilon(1e-5));
        }
        if (kernels::avx2_table()) {
            kernels::avx2_table()->ssd_scan(rows.data(), n, dim, query.data(), alt.data());
            for (std::size_t r = 0; r < n; ++r) {
                CHECK(alt[r] == doctest::Approx(ref[r]).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("axpy2: avx2 matches scalar bit for bit") {
    if (!kernels::avx2_table()) return;
    Rng rng(31);
    for (const std::size_t n : {1u, 7u, 32u, 101u}) {
        std::vector<Vec2f> in(n), acc_a(n), acc_b(n);
        for (std::size_t i = 0; i < n; ++i) {
            in[i] = {static_cast<float>(rng.uniform(-5.0, 5.0)),
                     static_cast<float>(rng.uniform(-5.0, 5.0))};
            acc_a[i] = acc_b[i] = {static_cast<float>(rng.uniform(-1.0, 1.0)),
                                   static_cast<float>(rng.uniform(-1.0, 1.0))};
        }
        kernels::scalar_table().axpy2(0.37f, in.data(), acc_a.data(), n);
        kernels::avx2_table()->axpy2(0.37f, in.data(), acc_b.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(acc_a[i].dx == acc_b[i].dx);
            CHECK(acc_a[i].dy == acc_b[i].dy);
        }
    }
}

TEST_CASE("set_active rejects unknown variants") {
    CHECK_THROWS_AS(kernels::set_active("neon"), ConfigError);
}
