// AVX2 kernel variants. Compiled with -mavx2 only (no FMA), so per-lane
// arithmetic matches the scalar reference bit for bit where the evaluation
// order is element-independent (mls_field, axpy2). ssd_scan uses partial-sum
// accumulators and agrees with the reference to float rounding.

#include "sketchcbr/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__) || defined(_M_X64)
#define SKETCHCBR_X86 1
#else
#define SKETCHCBR_X86 0
#endif

#if SKETCHCBR_X86

#include <immintrin.h>

#include "kernels/mls_pixel.hpp"

namespace sketchcbr::kernels {

namespace {

void mls_field_avx2(const MlsControls& c, int width, int height, Vec2f* out) {
    const std::size_t n = c.size();
    const __m256d snap_eps = _mm256_set1_pd(detail::kMlsSnapEps);
    const __m256d lane_offsets = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);

    for (int y = 0; y < height; ++y) {
        Vec2f* row = out + static_cast<std::size_t>(y) * width;
        const __m256d vy = _mm256_set1_pd(static_cast<double>(y));
        int x = 0;
        for (; x + 4 <= width; x += 4) {
            const __m256d vx = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(x)), lane_offsets);
            __m256d sw = _mm256_setzero_pd(), sx = _mm256_setzero_pd(),
                    sy = _mm256_setzero_pd(), tx = _mm256_setzero_pd(),
                    ty = _mm256_setzero_pd(), spp = _mm256_setzero_pd(),
                    spq = _mm256_setzero_pd(), scross = _mm256_setzero_pd();
            __m256d snapped = _mm256_setzero_pd();

            for (std::size_t i = 0; i < n; ++i) {
                const __m256d px = _mm256_set1_pd(c.px[i]);
                const __m256d py = _mm256_set1_pd(c.py[i]);
                const __m256d qx = _mm256_set1_pd(c.qx[i]);
                const __m256d qy = _mm256_set1_pd(c.qy[i]);
                const __m256d dx = _mm256_sub_pd(vx, px);
                const __m256d dy = _mm256_sub_pd(vy, py);
                const __m256d d2 =
                    _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
                snapped = _mm256_or_pd(snapped, _mm256_cmp_pd(d2, snap_eps, _CMP_LT_OQ));
                const __m256d w = _mm256_div_pd(_mm256_set1_pd(1.0), d2);
                sw = _mm256_add_pd(sw, w);
                sx = _mm256_add_pd(sx, _mm256_mul_pd(w, px));
                sy = _mm256_add_pd(sy, _mm256_mul_pd(w, py));
                tx = _mm256_add_pd(tx, _mm256_mul_pd(w, qx));
                ty = _mm256_add_pd(ty, _mm256_mul_pd(w, qy));
                spp = _mm256_add_pd(
                    spp, _mm256_mul_pd(w, _mm256_add_pd(_mm256_mul_pd(px, px),
                                                        _mm256_mul_pd(py, py))));
                spq = _mm256_add_pd(
                    spq, _mm256_mul_pd(w, _mm256_add_pd(_mm256_mul_pd(px, qx),
                                                        _mm256_mul_pd(py, qy))));
                scross = _mm256_add_pd(
                    scross, _mm256_mul_pd(w, _mm256_sub_pd(_mm256_mul_pd(qx, py),
                                                           _mm256_mul_pd(qy, px))));
            }

            alignas(32) double a_sw[4], a_sx[4], a_sy[4], a_tx[4], a_ty[4];
            alignas(32) double a_spp[4], a_spq[4], a_scross[4];
            _mm256_store_pd(a_sw, sw);
            _mm256_store_pd(a_sx, sx);
            _mm256_store_pd(a_sy, sy);
            _mm256_store_pd(a_tx, tx);
            _mm256_store_pd(a_ty, ty);
            _mm256_store_pd(a_spp, spp);
            _mm256_store_pd(a_spq, spq);
            _mm256_store_pd(a_scross, scross);
            const int snap_mask = _mm256_movemask_pd(snapped);

            for (int lane = 0; lane < 4; ++lane) {
                const double pvx = static_cast<double>(x + lane);
                const double pvy = static_cast<double>(y);
                if (snap_mask & (1 << lane)) {
                    // Rare: a control point sits (numerically) on this pixel.
                    row[x + lane] = detail::mls_eval_pixel(c, pvx, pvy);
                } else {
                    detail::MlsAccum m{a_sw[lane], a_sx[lane],  a_sy[lane],
                                       a_tx[lane], a_ty[lane],  a_spp[lane],
                                       a_spq[lane], a_scross[lane]};
                    row[x + lane] = detail::mls_finish(m, pvx, pvy);
                }
            }
        }
        for (; x < width; ++x) {
            row[x] = detail::mls_eval_pixel(c, static_cast<double>(x), static_cast<double>(y));
        }
    }
}

void ssd_scan_avx2(const float* rows, std::size_t n, std::size_t dim, const float* query,
                   float* out) {
    for (std::size_t r = 0; r < n; ++r) {
        const float* row = rows + r * dim;
        __m256 acc = _mm256_setzero_ps();
        std::size_t j = 0;
        for (; j + 8 <= dim; j += 8) {
            const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(row + j), _mm256_loadu_ps(query + j));
            acc = _mm256_add_ps(acc, _mm256_mul_ps(d, d));
        }
        __m128 lo = _mm256_castps256_ps128(acc);
        __m128 hi = _mm256_extractf128_ps(acc, 1);
        lo = _mm_add_ps(lo, hi);
        lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
        lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 0x55));
        float sum = _mm_cvtss_f32(lo);
        for (; j < dim; ++j) {
            const float d = row[j] - query[j];
            sum += d * d;
        }
        out[r] = sum;
    }
}

void axpy2_avx2(float w, const Vec2f* in, Vec2f* acc, std::size_t n) {
    const float* src = reinterpret_cast<const float*>(in);
    float* dst = reinterpret_cast<float*>(acc);
    const std::size_t total = 2 * n;
    const __m256 wv = _mm256_set1_ps(w);
    std::size_t i = 0;
    for (; i + 8 <= total; i += 8) {
        const __m256 v = _mm256_add_ps(_mm256_loadu_ps(dst + i),
                                       _mm256_mul_ps(wv, _mm256_loadu_ps(src + i)));
        _mm256_storeu_ps(dst + i, v);
    }
    for (; i < total; ++i) dst[i] += w * src[i];
}

}  // namespace

const KernelTable* avx2_table() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const KernelTable table{"avx2", &mls_field_avx2, &ssd_scan_avx2, &axpy2_avx2};
    return &table;
}

}  // namespace sketchcbr::kernels

#else  // !SKETCHCBR_X86

namespace sketchcbr::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace sketchcbr::kernels

#endif
