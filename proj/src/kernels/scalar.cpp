// Scalar reference kernels. These define the semantics every SIMD variant
// must reproduce.

#include "sketchcbr/kernels.hpp"

#include "kernels/mls_pixel.hpp"

namespace sketchcbr::kernels {

namespace {

void mls_field_scalar(const MlsControls& c, int width, int height, Vec2f* out) {
    for (int y = 0; y < height; ++y) {
        Vec2f* row = out + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            row[x] = detail::mls_eval_pixel(c, static_cast<double>(x), static_cast<double>(y));
        }
    }
}

void ssd_scan_scalar(const float* rows, std::size_t n, std::size_t dim, const float* query,
                     float* out) {
    for (std::size_t r = 0; r < n; ++r) {
        const float* row = rows + r * dim;
        float acc = 0.0f;
        for (std::size_t j = 0; j < dim; ++j) {
            const float d = row[j] - query[j];
            acc += d * d;
        }
        out[r] = acc;
    }
}

void axpy2_scalar(float w, const Vec2f* in, Vec2f* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        acc[i].dx += w * in[i].dx;
        acc[i].dy += w * in[i].dy;
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{"scalar", &mls_field_scalar, &ssd_scan_scalar, &axpy2_scalar};
    return table;
}

}  // namespace sketchcbr::kernels
