#pragma once
// Dispatch layer for the arithmetic inner loops. Every kernel has a scalar
// reference implementation and may have SIMD variants; the fastest variant
// supported by the host CPU is selected once at startup. Variants must agree
// with the scalar reference (equivalence-tested in tests/test_kernels.cpp);
// per-output-element arithmetic order is identical across variants, so
// results match bit for bit.
//
// SKETCHCBR_SIMD=scalar|avx2 overrides the selection.

#include <cstddef>
#include <string>
#include <vector>

#include "sketchcbr/types.hpp"

namespace sketchcbr::kernels {

// Control points of one moving-least-squares similarity warp, split into
// coordinate arrays. Filled by geometry::mls_field.
struct MlsControls {
    std::vector<double> px, py;  // source positions
    std::vector<double> qx, qy;  // target positions

    std::size_t size() const { return px.size(); }
};

// Evaluates the dense similarity-MLS displacement (f(v) - v) on the integer
// grid [0,width) x [0,height) with weights w_i = 1 / |p_i - v|^2.
using MlsFieldFn = void (*)(const MlsControls&, int width, int height, Vec2f* out);

// out[r] = squared L2 distance between query and row r of a row-major
// (n x dim) float matrix.
using SsdScanFn = void (*)(const float* rows, std::size_t n, std::size_t dim,
                           const float* query, float* out);

// acc[i] += w * in[i] over n displacement vectors.
using Axpy2Fn = void (*)(float w, const Vec2f* in, Vec2f* acc, std::size_t n);

struct KernelTable {
    const char* name;
    MlsFieldFn mls_field;
    SsdScanFn ssd_scan;
    Axpy2Fn axpy2;
};

const KernelTable& scalar_table();

// Null when the binary or the host CPU lacks AVX2.
const KernelTable* avx2_table();

// Active table; resolved on first use (env override, then best available).
const KernelTable& active();

// Forces a variant by name; throws sketchcbr::ConfigError if unavailable.
void set_active(const std::string& name);

std::vector<std::string> available_variants();

}  // namespace sketchcbr::kernels
