#include "sketchcbr/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sketchcbr/kernels.hpp"
#include "sketchcbr/metrics.hpp"
#include "sketchcbr/parallel.hpp"
#include "region_ops.hpp"

namespace sketchcbr {

std::vector<RegionCandidate> prepare_candidates(const CaseLibrary& lib, int region_id,
                                                const RegionPatch& frame) {
    std::vector<RegionCandidate> candidates;
    candidates.reserve(lib.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const CaseRegionViews views = case_region_views(lib.cases[i], lib.region_map, region_id);
        RegionCandidate c;
        c.case_index = i;
        c.own_features = region_features(views.photo);
        c.photo = transplant_patch(views.photo, frame);
        c.sketch = transplant_patch(views.neutral, frame);
        candidates.push_back(std::move(c));
    }
    return candidates;
}

RegionSynthesis synthesize_region(const RegionPatch& photo_patch,
                                  const std::vector<RegionCandidate>& candidates,
                                  const CaseLibrary& lib, const RegionModels& models,
                                  const SynthesisOptions& opts) {
    if (candidates.empty()) {
        throw InsufficientDataError("synthesize_region: no candidate cases");
    }

    RegionSynthesis out;
    out.trace.region_id = photo_patch.region_id;

    // h = 1: retrieve the case whose photo region looks closest.
    const FeatureVector fx = region_features(photo_patch);
    std::size_t init = 0;
    double init_nmi = -1.0;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const double v = nmi_patches(photo_patch, candidates[ci].photo, opts.nmi_bins);
        if (v > init_nmi) {
            init_nmi = v;
            init = ci;
        }
    }
    RegionPatch interim = candidates[init].sketch;
    out.initial = interim;

    // The model's estimate of the current quality: blending the retrieved
    // case into its own sketch leaves it unchanged, so the predicted fitness
    // of that no-op blend tracks theta(interim).
    const auto clamp_theta = [](double v) { return std::clamp(v, 1e-6, 2.0); };
    const FeatureVector s1 = region_features(interim);
    double theta_prev =
        clamp_theta(models.fe.predict(compose_input(fx, candidates[init].own_features, s1).values));
    out.trace.iterations.push_back({1, lib.cases[candidates[init].case_index].id, theta_prev, 0.0});
    out.trace.termination = "max_iterations";

    for (int h = 2; h <= opts.max_iters; ++h) {
        const FeatureVector sx = h == 2 ? s1 : region_features(interim);
        double best_theta = -std::numeric_limits<double>::infinity();
        std::size_t best_ci = 0;
        CompositeInput best_input;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            CompositeInput input = compose_input(fx, candidates[ci].own_features, sx);
            const double theta = clamp_theta(models.fe.predict(input.values));
            if (theta > best_theta) {
                best_theta = theta;
                best_ci = ci;
                best_input = std::move(input);
            }
        }
        // No candidate promising a real gain: keep the current sketch.
        if ((best_theta - theta_prev) / theta_prev < opts.threshold) {
            out.trace.termination = "gain_below_threshold";
            break;
        }
        const double omega = models.pe.predict(best_input.values);
        interim.image = blend(interim.image, interim.landmarks, candidates[best_ci].sketch.image,
                              candidates[best_ci].sketch.landmarks, omega)
                            .image;
        out.trace.iterations.push_back(
            {h, lib.cases[candidates[best_ci].case_index].id, best_theta, omega});
        theta_prev = best_theta;
    }

    out.patch = std::move(interim);
    return out;
}

// --- Face composition -----------------------------------------------------------

namespace {

// Two-pass L1 distance transforms over the label map.
std::vector<int> distance_inside(const std::vector<std::int16_t>& labels, int w, int h,
                                 int region) {
    constexpr int kInf = 1 << 28;
    std::vector<int> d(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) d[i] = labels[i] == region ? kInf : 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (d[i] == 0) continue;
            int best = d[i];
            if (x > 0) best = std::min(best, d[i - 1] + 1);
            if (y > 0) best = std::min(best, d[i - w] + 1);
            if (x == 0 || y == 0) best = std::min(best, 1);  // image border counts as outside
            d[i] = best;
        }
    }
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (d[i] == 0) continue;
            int best = d[i];
            if (x + 1 < w) best = std::min(best, d[i + 1] + 1);
            if (y + 1 < h) best = std::min(best, d[i + w] + 1);
            if (x + 1 == w || y + 1 == h) best = std::min(best, 1);
            d[i] = best;
        }
    }
    return d;
}

std::vector<int> distance_to_region(const std::vector<std::int16_t>& labels, int w, int h,
                                    int region) {
    constexpr int kInf = 1 << 28;
    std::vector<int> d(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) d[i] = labels[i] == region ? 0 : kInf;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (x > 0) d[i] = std::min(d[i], d[i - 1] + 1);
            if (y > 0) d[i] = std::min(d[i], d[i - w] + 1);
        }
    }
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (x + 1 < w) d[i] = std::min(d[i], d[i + 1] + 1);
            if (y + 1 < h) d[i] = std::min(d[i], d[i + w] + 1);
        }
    }
    return d;
}

constexpr int kFeatherRing = 2;  // pixels of cross-boundary bleed

}  // namespace

ImageGray compose_face(const std::vector<RegionPatch>& patches,
                       const LandmarkSet& photo_landmarks, const RegionMap& map, int width,
                       int height) {
    if (patches.size() != kNumRegions) {
        throw CompositionError("compose_face: expected " + std::to_string(kNumRegions) +
                               " region patches, got " + std::to_string(patches.size()));
    }
    std::array<bool, kNumRegions> present{};
    for (const RegionPatch& p : patches) {
        if (p.region_id >= 1 && p.region_id <= kNumRegions) present[p.region_id - 1] = true;
    }
    for (int r = 1; r <= kNumRegions; ++r) {
        if (!present[r - 1]) {
            throw CompositionError("compose_face: region " + std::to_string(r) + " is missing");
        }
    }

    const std::vector<std::int16_t> labels =
        region_label_map(photo_landmarks, map, width, height);

    std::vector<double> num(static_cast<std::size_t>(width) * height, 0.0);
    std::vector<double> den(num.size(), 0.0);

    for (const RegionPatch& patch : patches) {
        const int r = patch.region_id;
        const std::vector<Point> global_pts = region_points(photo_landmarks, map, r);

        // Fast path: the patch is already laid out on the photo's geometry.
        bool translated = patch.landmarks.size() == global_pts.size();
        for (std::size_t k = 0; translated && k < global_pts.size(); ++k) {
            translated = std::abs(patch.landmarks[k].x + patch.x0 - global_pts[k].x) < 1e-9 &&
                         std::abs(patch.landmarks[k].y + patch.y0 - global_pts[k].y) < 1e-9;
        }
        ImageGray warped;
        if (translated) {
            warped = ImageGray(width, height, 255);
            for (int y = 0; y < patch.height(); ++y) {
                const int gy = patch.y0 + y;
                if (gy < 0 || gy >= height) continue;
                for (int x = 0; x < patch.width(); ++x) {
                    const int gx = patch.x0 + x;
                    if (gx < 0 || gx >= width) continue;
                    warped.at(gx, gy) = patch.image.at(x, y);
                }
            }
        } else {
            warped = warp_to_points(patch.image, patch.landmarks, global_pts, width, height);
        }

        const std::vector<int> inside = distance_inside(labels, width, height, r);
        const std::vector<int> to_region = distance_to_region(labels, width, height, r);
        for (std::size_t i = 0; i < num.size(); ++i) {
            double w = 0.0;
            if (labels[i] == r) {
                w = 2.0 + std::min(inside[i] - 1, 6);
            } else if (to_region[i] <= kFeatherRing && labels[i] != 0) {
                w = 1.0 / (1.0 + to_region[i]);
            }
            if (w > 0.0) {
                num[i] += w * warped.data[i];
                den[i] += w;
            }
        }
    }

    ImageGray out(width, height, 255);
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (den[i] > 0.0) {
            const long v = std::lround(num[i] / den[i]);
            out.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
        }
    }
    return out;
}

// --- Example-based sharpening -----------------------------------------------------

namespace {

struct Match {
    std::int32_t example = -1;  // case index
    std::int32_t x = 0;
    std::int32_t y = 0;
};

inline std::uint8_t at_clamped(const ImageGray& img, int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return img.at(x, y);
}

// Causal offsets (scanline order) preceding the current pixel in a 3x3 ring.
constexpr int kCausal[4][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}};

// Neighbourhood feature vector at one level: full window of the smoothed
// image, causal half-window of the sharp image, plus full 3x3 windows of both
// parent-level images when present.
void gather_features(const ImageGray& smooth, const ImageGray& sharp, const ImageGray* up_smooth,
                     const ImageGray* up_sharp, int x, int y, int window, float* out) {
    const int half = window / 2;
    int k = 0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            out[k++] = at_clamped(smooth, x + dx, y + dy);
        }
    }
    for (const auto& offset : kCausal) {
        out[k++] = at_clamped(sharp, x + offset[0], y + offset[1]);
    }
    if (up_smooth) {
        const int px = x / 2, py = y / 2;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                out[k++] = at_clamped(*up_smooth, px + dx, py + dy);
            }
        }
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                out[k++] = at_clamped(*up_sharp, px + dx, py + dy);
            }
        }
    }
}

float feature_distance(const float* a, const float* b, int dim) {
    float acc = 0.0f;
    for (int i = 0; i < dim; ++i) {
        const float d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

ImageGray sharpen(const ImageGray& blurred, const CaseLibrary& lib, const SharpenOptions& opts) {
    if (lib.cases.empty()) throw InsufficientDataError("sharpen: empty case library");

    const int levels = std::max(1, opts.levels);
    const std::size_t n_cases = lib.size();

    // Example pyramids: level 0 is full resolution.
    std::vector<std::vector<ImageGray>> ex_sharp(n_cases), ex_smooth(n_cases);
    for (std::size_t c = 0; c < n_cases; ++c) {
        ex_sharp[c].push_back(lib.cases[c].neutral_sketch);
        ex_smooth[c].push_back(
            gaussian_blur(lib.cases[c].neutral_sketch, opts.gauss_radius, opts.gauss_sigma));
        for (int l = 1; l < levels; ++l) {
            ex_sharp[c].push_back(downsample2(ex_sharp[c].back()));
            ex_smooth[c].push_back(downsample2(ex_smooth[c].back()));
        }
    }
    std::vector<ImageGray> in_pyramid{blurred};
    for (int l = 1; l < levels; ++l) in_pyramid.push_back(downsample2(in_pyramid.back()));

    std::vector<ImageGray> synth(levels);
    std::vector<std::vector<Match>> matches(levels);

    for (int l = levels - 1; l >= 0; --l) {
        const ImageGray& input = in_pyramid[l];
        const int window = l == 0 ? opts.fine_window : opts.coarse_window;
        const bool has_parent = l + 1 < levels;
        const int dim = window * window + 4 + (has_parent ? 18 : 0);
        const double coherence_factor = 1.0 + opts.coherence * std::pow(2.0, -l);

        synth[l] = ImageGray(input.width, input.height, 255);
        matches[l].assign(input.data.size(), Match{});

        // Packed example features for the full search at the coarsest level.
        std::vector<float> bank;
        std::vector<Match> bank_pos;
        if (!has_parent) {
            for (std::size_t c = 0; c < n_cases; ++c) {
                const ImageGray& es = ex_smooth[c][l];
                const ImageGray& eh = ex_sharp[c][l];
                for (int y = 0; y < es.height; ++y) {
                    for (int x = 0; x < es.width; ++x) {
                        bank.resize(bank.size() + dim);
                        gather_features(es, eh, nullptr, nullptr, x, y, window,
                                        bank.data() + bank.size() - dim);
                        bank_pos.push_back(
                            {static_cast<std::int32_t>(c), x, y});
                    }
                }
            }
        }

        std::vector<float> query(dim), cand(dim);
        std::vector<float> bank_d2(bank_pos.size());
        for (int y = 0; y < input.height; ++y) {
            for (int x = 0; x < input.width; ++x) {
                gather_features(input, synth[l], has_parent ? &in_pyramid[l + 1] : nullptr,
                                has_parent ? &synth[l + 1] : nullptr, x, y, window, query.data());

                Match best_app;
                float best_app_d = std::numeric_limits<float>::max();
                if (!has_parent) {
                    kernels::active().ssd_scan(bank.data(), bank_pos.size(), dim, query.data(),
                                               bank_d2.data());
                    for (std::size_t i = 0; i < bank_pos.size(); ++i) {
                        if (bank_d2[i] < best_app_d) {
                            best_app_d = bank_d2[i];
                            best_app = bank_pos[i];
                        }
                    }
                } else {
                    // Parent-guided refinement replaces the exact search.
                    const Match parent =
                        matches[l + 1][static_cast<std::size_t>(y / 2) * in_pyramid[l + 1].width +
                                       x / 2];
                    const ImageGray& es = ex_smooth[parent.example][l];
                    const ImageGray& eh = ex_sharp[parent.example][l];
                    for (int dy = -2; dy <= 2; ++dy) {
                        for (int dx = -2; dx <= 2; ++dx) {
                            const int qx = std::clamp(parent.x * 2 + dx, 0, es.width - 1);
                            const int qy = std::clamp(parent.y * 2 + dy, 0, es.height - 1);
                            gather_features(es, eh, &ex_smooth[parent.example][l + 1],
                                            &ex_sharp[parent.example][l + 1], qx, qy, window,
                                            cand.data());
                            const float d = feature_distance(query.data(), cand.data(), dim);
                            if (d < best_app_d) {
                                best_app_d = d;
                                best_app = {parent.example, qx, qy};
                            }
                        }
                    }
                }

                Match best_coh;
                float best_coh_d = std::numeric_limits<float>::max();
                for (const auto& offset : kCausal) {
                    const int nx = x + offset[0];
                    const int ny = y + offset[1];
                    if (nx < 0 || ny < 0 || nx >= input.width || ny >= input.height) continue;
                    const Match& m = matches[l][static_cast<std::size_t>(ny) * input.width + nx];
                    if (m.example < 0) continue;
                    const ImageGray& es = ex_smooth[m.example][l];
                    const int qx = std::clamp(m.x - offset[0], 0, es.width - 1);
                    const int qy = std::clamp(m.y - offset[1], 0, es.height - 1);
                    gather_features(es, ex_sharp[m.example][l],
                                    has_parent ? &ex_smooth[m.example][l + 1] : nullptr,
                                    has_parent ? &ex_sharp[m.example][l + 1] : nullptr, qx, qy,
                                    window, cand.data());
                    const float d = feature_distance(query.data(), cand.data(), dim);
                    if (d < best_coh_d) {
                        best_coh_d = d;
                        best_coh = {m.example, qx, qy};
                    }
                }

                Match chosen = best_app;
                if (best_coh.example >= 0 &&
                    best_coh_d <= best_app_d * coherence_factor) {
                    chosen = best_coh;
                }
                matches[l][static_cast<std::size_t>(y) * input.width + x] = chosen;
                synth[l].at(x, y) = ex_sharp[chosen.example][l].at(chosen.x, chosen.y);
            }
        }
    }
    return synth[0];
}

// --- Exaggeration ------------------------------------------------------------------

namespace {

std::vector<Point> normalize_layout(std::span<const Point> pts) {
    Point centroid{0.0, 0.0};
    for (const Point& p : pts) {
        centroid.x += p.x;
        centroid.y += p.y;
    }
    centroid.x /= static_cast<double>(pts.size());
    centroid.y /= static_cast<double>(pts.size());
    double rms = 0.0;
    for (const Point& p : pts) rms += norm2(p - centroid);
    rms = std::sqrt(rms / static_cast<double>(pts.size()));
    if (rms < 1e-12) {
        throw DegenerateGeometryError("landmark layout collapses to a point");
    }
    std::vector<Point> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out[i] = {(pts[i].x - centroid.x) / rms, (pts[i].y - centroid.y) / rms};
    }
    return out;
}

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0;
    double tau = 0.0;
    int rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double t = (css - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = static_cast<int>(j + 1);
            tau = t;
        }
    }
    (void)rho;
    for (double& x : v) x = std::max(0.0, x - tau);
    return v;
}

}  // namespace

ExaggerationWeights exaggeration_weights(const LandmarkSet& q_new, const CaseLibrary& lib) {
    const std::size_t m = lib.size();
    if (m < 2) {
        throw InsufficientDataError("exaggeration_weights: need at least 2 library cases");
    }
    const std::size_t d = 2 * q_new.points.size();

    // Columns are the normalized neutral-sketch layouts of the cases.
    std::vector<double> a(d * m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::vector<Point> z = normalize_layout(lib.cases[i].neutral_landmarks.span());
        for (std::size_t k = 0; k < z.size(); ++k) {
            a[(2 * k) * m + i] = z[k].x;
            a[(2 * k + 1) * m + i] = z[k].y;
        }
    }
    const std::vector<Point> target = normalize_layout(q_new.span());
    std::vector<double> b(d);
    for (std::size_t k = 0; k < target.size(); ++k) {
        b[2 * k] = target[k].x;
        b[2 * k + 1] = target[k].y;
    }

    // Precompute the normal-equation terms for the projected gradient loop.
    std::vector<double> gram(m * m, 0.0), atb(m, 0.0);
    for (std::size_t row = 0; row < d; ++row) {
        const double* ar = a.data() + row * m;
        for (std::size_t i = 0; i < m; ++i) {
            atb[i] += ar[i] * b[row];
            for (std::size_t j = i; j < m; ++j) gram[i * m + j] += ar[i] * ar[j];
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < i; ++j) gram[i * m + j] = gram[j * m + i];
    }

    // Lipschitz constant via power iteration on the Gram matrix.
    std::vector<double> pv(m, 1.0 / static_cast<double>(m)), pw(m);
    double lipschitz = 1.0;
    for (int it = 0; it < 50; ++it) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += gram[i * m + j] * pv[j];
            pw[i] = s;
            nrm += s * s;
        }
        nrm = std::sqrt(nrm);
        if (nrm < 1e-30) break;
        for (std::size_t i = 0; i < m; ++i) pv[i] = pw[i] / nrm;
        lipschitz = nrm;
    }
    const double step = 1.0 / std::max(lipschitz, 1e-12);

    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    const auto objective = [&](const std::vector<double>& x) {
        double quad = 0.0, lin = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            lin += atb[i] * x[i];
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += gram[i * m + j] * x[j];
            quad += x[i] * s;
        }
        return 0.5 * quad - lin;  // constant |b|^2 / 2 omitted
    };

    constexpr int kMaxIterations = 10000;
    double prev_obj = objective(w);
    bool converged = false;
    for (int it = 0; it < kMaxIterations; ++it) {
        std::vector<double> grad(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += gram[i * m + j] * w[j];
            grad[i] = s - atb[i];
        }
        std::vector<double> next(m);
        double moved = 0.0;
        for (std::size_t i = 0; i < m; ++i) next[i] = w[i] - step * grad[i];
        next = project_simplex(std::move(next));
        for (std::size_t i = 0; i < m; ++i) moved += (next[i] - w[i]) * (next[i] - w[i]);
        w = std::move(next);
        const double obj = objective(w);
        const double rel = std::abs(prev_obj - obj) / std::max(std::abs(prev_obj), 1e-12);
        prev_obj = obj;
        if (rel < 1e-8 || moved < 1e-24) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw SolverError("exaggeration weight solver did not converge; residual objective " +
                          std::to_string(prev_obj));
    }
    return {std::move(w)};
}

DisplacementField predict_exaggeration(const LandmarkSet& q_new, const CaseLibrary& lib) {
    const ExaggerationWeights weights = exaggeration_weights(q_new, lib);
    DisplacementField out(lib.width, lib.height);
    for (std::size_t i = 0; i < lib.size(); ++i) {
        if (weights.values[i] < 1e-12) continue;
        kernels::active().axpy2(static_cast<float>(weights.values[i]),
                                lib.cases[i].exaggeration_field.vectors.data(),
                                out.vectors.data(), out.vectors.size());
    }
    return out;
}

ImageGray smooth_and_apply_exaggeration(const ImageGray& sketch, const LandmarkSet& q_sketch,
                                        const DisplacementField& vx) {
    if (sketch.width != vx.width || sketch.height != vx.height) {
        throw DimensionError("smooth_and_apply_exaggeration: field and sketch dimensions differ");
    }
    std::vector<Point> src(q_sketch.points);
    std::vector<Point> dst(src.size());
    for (std::size_t k = 0; k < src.size(); ++k) {
        const Vec2f v = sample_field(vx, src[k].x, src[k].y);
        dst[k] = {src[k].x + v.dx, src[k].y + v.dy};
    }
    const DisplacementField smooth = mls_field(src, dst, vx.width, vx.height);
    return apply_field(sketch, smooth);
}

SynthesisResult synthesize_portrait(const ImageGray& photo, const LandmarkSet& landmarks,
                                    const CaseLibrary& lib, const AllModels& models,
                                    const SynthesisOptions& opts) {
    if (photo.width != lib.width || photo.height != lib.height) {
        throw DimensionError("synthesize_portrait: photo is " + std::to_string(photo.width) +
                             "x" + std::to_string(photo.height) + ", library expects " +
                             std::to_string(lib.width) + "x" + std::to_string(lib.height));
    }
    validate_landmarks(landmarks, photo.width, photo.height, "input landmarks");
    if (lib.cases.empty()) throw InsufficientDataError("synthesize_portrait: empty library");

    const std::vector<RegionPatch> photo_patches = segment_regions(photo, landmarks, lib.region_map);

    SynthesisResult result;
    result.traces.resize(kNumRegions);
    result.region_patches.resize(kNumRegions);
    result.initial_patches.resize(kNumRegions);

    parallel_for(kNumRegions, opts.threads, [&](std::size_t idx) {
        const int region_id = static_cast<int>(idx) + 1;
        const std::vector<RegionCandidate> candidates =
            prepare_candidates(lib, region_id, photo_patches[idx]);
        RegionSynthesis rs = synthesize_region(photo_patches[idx], candidates, lib,
                                               models.for_region(region_id), opts);
        result.traces[idx] = std::move(rs.trace);
        result.region_patches[idx] = std::move(rs.patch);
        result.initial_patches[idx] = std::move(rs.initial);
    });

    const ImageGray composed =
        compose_face(result.region_patches, landmarks, lib.region_map, photo.width, photo.height);
    result.neutral = sharpen(composed, lib);

    const ExaggerationWeights weights = exaggeration_weights(landmarks, lib);
    result.weights = weights.values;
    DisplacementField vx(lib.width, lib.height);
    for (std::size_t i = 0; i < lib.size(); ++i) {
        if (weights.values[i] < 1e-12) continue;
        kernels::active().axpy2(static_cast<float>(weights.values[i]),
                                lib.cases[i].exaggeration_field.vectors.data(),
                                vx.vectors.data(), vx.vectors.size());
    }
    result.sketch = smooth_and_apply_exaggeration(result.neutral, landmarks, vx);
    return result;
}

}  // namespace sketchcbr
