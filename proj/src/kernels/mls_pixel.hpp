#pragma once
// Per-pixel similarity-MLS evaluation shared by the scalar kernel and the
// SIMD remainder/fix-up paths. Single pass over the control points using the
// expanded centered moments:
//   mu = sum(w |p|^2) - |sum(w p)|^2 / sum(w)
//   a  = sum(w p.q)   - (sum(w p) . sum(w q)) / sum(w)
//   b  = sum(w cross(q, p)) - cross(sum(w q), sum(w p)) / sum(w)
//   f(v) = q* + [a dx + b dy, a dy - b dx] / mu,  d = v - p*
// A pixel within kMlsSnapEps of a control point snaps to that point's exact
// displacement (the weight would otherwise overflow).

#include <cstddef>

#include "sketchcbr/kernels.hpp"
#include "sketchcbr/types.hpp"

namespace sketchcbr::kernels::detail {

inline constexpr double kMlsSnapEps = 1e-12;   // squared distance
inline constexpr double kMlsDegenerateMu = 1e-12;

struct MlsAccum {
    double sw = 0.0, sx = 0.0, sy = 0.0, tx = 0.0, ty = 0.0;
    double spp = 0.0, spq = 0.0, scross = 0.0;
};

inline Vec2f mls_finish(const MlsAccum& m, double vx, double vy) {
    const double inv_sw = 1.0 / m.sw;
    const double pstar_x = m.sx * inv_sw, pstar_y = m.sy * inv_sw;
    const double qstar_x = m.tx * inv_sw, qstar_y = m.ty * inv_sw;
    const double mu = m.spp - (m.sx * m.sx + m.sy * m.sy) * inv_sw;
    const double dx = vx - pstar_x, dy = vy - pstar_y;
    double fx, fy;
    if (mu < kMlsDegenerateMu) {
        // All control points coincide: the warp reduces to a translation.
        fx = vx + (qstar_x - pstar_x);
        fy = vy + (qstar_y - pstar_y);
    } else {
        const double a = m.spq - (m.sx * m.tx + m.sy * m.ty) * inv_sw;
        const double b = m.scross - (m.tx * m.sy - m.ty * m.sx) * inv_sw;
        const double inv_mu = 1.0 / mu;
        fx = qstar_x + (a * dx + b * dy) * inv_mu;
        fy = qstar_y + (a * dy - b * dx) * inv_mu;
    }
    return {static_cast<float>(fx - vx), static_cast<float>(fy - vy)};
}

inline Vec2f mls_eval_pixel(const MlsControls& c, double vx, double vy) {
    const std::size_t n = c.size();
    MlsAccum m;
    for (std::size_t i = 0; i < n; ++i) {
        const double px = c.px[i], py = c.py[i];
        const double qx = c.qx[i], qy = c.qy[i];
        const double dx = vx - px, dy = vy - py;
        const double d2 = dx * dx + dy * dy;
        if (d2 < kMlsSnapEps) {
            return {static_cast<float>(qx - vx), static_cast<float>(qy - vy)};
        }
        const double w = 1.0 / d2;
        m.sw += w;
        m.sx += w * px;
        m.sy += w * py;
        m.tx += w * qx;
        m.ty += w * qy;
        m.spp += w * (px * px + py * py);
        m.spq += w * (px * qx + py * qy);
        m.scross += w * (qx * py - qy * px);
    }
    return mls_finish(m, vx, vy);
}

}  // namespace sketchcbr::kernels::detail
