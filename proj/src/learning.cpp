#include "sketchcbr/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "sketchcbr/metrics.hpp"
#include "sketchcbr/rng.hpp"
#include "region_ops.hpp"

namespace sketchcbr {

using nlohmann::json;

const char* target_name(Target t) { return t == Target::Theta ? "theta" : "omega"; }

// --- STSM sample container --------------------------------------------------

namespace {

constexpr char kStsmMagic[4] = {'S', 'T', 'S', 'M'};
constexpr std::uint8_t kStsmVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("truncated sample file");
    return v;
}

}  // namespace

void save_samples(const SampleSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open sample file for writing: " + path.string());
    out.write(kStsmMagic, 4);
    write_pod(out, kStsmVersion);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(set.region_id));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(set.num_landmarks));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(set.size()));
    write_pod<std::uint64_t>(out, set.seed);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(set.case_ids.size()));
    for (const std::string& id : set.case_ids) {
        write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
        out.write(reinterpret_cast<const char*>(set.inputs.data() + i * set.dim),
                  static_cast<std::streamsize>(set.dim * sizeof(float)));
        write_pod<float>(out, set.theta[i]);
        write_pod<float>(out, set.omega[i]);
        write_pod<std::uint32_t>(out, set.provenance[i].groundtruth_index);
        write_pod<std::uint32_t>(out, set.provenance[i].candidate_index);
        write_pod<std::uint16_t>(out, set.provenance[i].iteration);
    }
    if (!out) throw IoError("failed writing sample file: " + path.string());
}

SampleSet load_samples(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sample file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kStsmMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad STSM magic");
    }
    const auto version = read_pod<std::uint8_t>(in);
    if (version != kStsmVersion) {
        throw VersionError(path.string() + ": unsupported STSM version " +
                           std::to_string(version));
    }
    SampleSet set;
    set.region_id = static_cast<int>(read_pod<std::uint32_t>(in));
    set.dim = static_cast<int>(read_pod<std::uint32_t>(in));
    set.num_landmarks = static_cast<int>(read_pod<std::uint32_t>(in));
    const auto count = read_pod<std::uint32_t>(in);
    set.seed = read_pod<std::uint64_t>(in);
    const auto id_count = read_pod<std::uint32_t>(in);
    set.case_ids.reserve(id_count);
    for (std::uint32_t i = 0; i < id_count; ++i) {
        const auto len = read_pod<std::uint16_t>(in);
        std::string id(len, '\0');
        in.read(id.data(), len);
        set.case_ids.push_back(std::move(id));
    }
    set.inputs.resize(static_cast<std::size_t>(count) * set.dim);
    set.theta.resize(count);
    set.omega.resize(count);
    set.provenance.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(set.inputs.data() + static_cast<std::size_t>(i) * set.dim),
                static_cast<std::streamsize>(set.dim * sizeof(float)));
        set.theta[i] = read_pod<float>(in);
        set.omega[i] = read_pod<float>(in);
        set.provenance[i].groundtruth_index = read_pod<std::uint32_t>(in);
        set.provenance[i].candidate_index = read_pod<std::uint32_t>(in);
        set.provenance[i].iteration = read_pod<std::uint16_t>(in);
    }
    if (!in) throw FormatError(path.string() + ": truncated sample payload");
    return set;
}

// --- Blend weight oracle ------------------------------------------------------

namespace {

template <typename F>
void golden_max(F&& f, double lo, double hi, double tol, BlendWeightResult& best) {
    const auto consider = [&](double w, double v) {
        if (v > best.theta) {
            best.theta = v;
            best.omega = w;
        }
    };
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    consider(c, fc);
    consider(d, fd);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
}

}  // namespace

BlendWeightResult optimize_blend_weight(const RegionPatch& interim, const RegionPatch& candidate,
                                        const RegionPatch& groundtruth, int nmi_bins,
                                        double omega_tol) {
    if (interim.region_id != candidate.region_id || interim.region_id != groundtruth.region_id) {
        throw RegionMismatchError("optimize_blend_weight: patches from different regions");
    }
    if (!interim.image.same_dims(candidate.image) ||
        !interim.image.same_dims(groundtruth.image)) {
        throw DimensionError("optimize_blend_weight: patch canvases differ");
    }
    const auto evaluate = [&](double w) {
        const BlendResult blended =
            blend(interim.image, interim.landmarks, candidate.image, candidate.landmarks, w);
        return nmi_masked(blended.image, interim.mask, groundtruth.image, groundtruth.mask,
                          nmi_bins);
    };
    BlendWeightResult best{0.0, evaluate(0.0)};
    const double at_one = evaluate(1.0);
    if (at_one > best.theta) best = {1.0, at_one};
    golden_max(evaluate, 0.0, 0.5, omega_tol, best);
    golden_max(evaluate, 0.5, 1.0, omega_tol, best);

    // Pixel quantization makes theta(omega) a noisy staircase (single-pixel
    // histogram-bin crossings step it by ~1/N), so golden section alone can
    // settle on the wrong plateau. Localize the two best well-separated
    // coarse cells, then resolve each neighbourhood at the omega tolerance.
    constexpr int kScan = 64;
    double second = best.omega;
    double second_theta = -1.0;
    for (int k = 1; k < kScan; ++k) {
        const double w = static_cast<double>(k) / kScan;
        const double v = evaluate(w);
        if (v > best.theta) {
            if (std::abs(best.omega - w) > 0.12 && best.theta > second_theta) {
                second = best.omega;
                second_theta = best.theta;
            }
            best = {w, v};
        } else if (v > second_theta && std::abs(best.omega - w) > 0.12) {
            second = w;
            second_theta = v;
        }
    }
    const auto polish = [&](double center) {
        for (int k = -64; k <= 64; ++k) {
            const double w = center + k * omega_tol;
            if (w <= 0.0 || w >= 1.0) continue;
            const double v = evaluate(w);
            if (v > best.theta) best = {w, v};
        }
    };
    const double first_center = best.omega;
    polish(first_center);
    if (second_theta >= 0.0 && std::abs(second - first_center) > 0.12) polish(second);
    return best;
}

// --- Oracle loop / training data ----------------------------------------------

namespace {

std::vector<int> fold_assignment(std::size_t n, int folds, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<int> fold_of(n, 0);
    for (int f = 0; f < folds; ++f) {
        const std::size_t begin = f * n / folds;
        const std::size_t end = (f + 1) * n / folds;
        for (std::size_t i = begin; i < end; ++i) fold_of[order[i]] = f;
    }
    return fold_of;
}

constexpr double kNmiMax = 2.0;

}  // namespace

SampleSet generate_training_data(const CaseLibrary& lib, int region_id,
                                 const OracleOptions& opts) {
    const std::size_t n = lib.size();
    if (n < static_cast<std::size_t>(opts.folds)) {
        throw InsufficientDataError("library has " + std::to_string(n) + " cases; at least " +
                                    std::to_string(opts.folds) + " are required for " +
                                    std::to_string(opts.folds) + "-fold data generation");
    }

    // Own-frame region views and candidate features, one per case.
    std::vector<CaseRegionViews> views;
    views.reserve(n);
    std::vector<FeatureVector> candidate_features;
    candidate_features.reserve(n);
    for (const Case& c : lib.cases) {
        views.push_back(case_region_views(c, lib.region_map, region_id));
        candidate_features.push_back(region_features(views.back().photo));
    }

    Rng fold_rng(derive_seed(opts.seed, 1000 + static_cast<std::uint64_t>(region_id)));
    const std::vector<int> fold_of = fold_assignment(n, opts.folds, fold_rng);

    SampleSet set;
    set.region_id = region_id;
    set.num_landmarks = static_cast<int>(views.front().photo.landmarks.size());
    set.dim = composite_dim(set.num_landmarks);
    set.seed = opts.seed;
    for (const Case& c : lib.cases) set.case_ids.push_back(c.id);

    const auto emit = [&](const CompositeInput& input, double theta, double omega,
                          std::size_t x, std::size_t i, int h) {
        set.inputs.insert(set.inputs.end(), input.values.begin(), input.values.end());
        set.theta.push_back(static_cast<float>(theta));
        set.omega.push_back(static_cast<float>(omega));
        set.provenance.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(i),
                                  static_cast<std::uint16_t>(h)});
    };

    for (std::size_t x = 0; x < n; ++x) {
        const RegionPatch& photo_x = views[x].photo;
        const RegionPatch& groundtruth = views[x].neutral;
        const FeatureVector fx = candidate_features[x];

        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] != fold_of[x]) candidates.push_back(i);
        }

        // Candidate patches carried into the groundtruth case's frame.
        std::vector<RegionPatch> cand_photo, cand_sketch;
        cand_photo.reserve(candidates.size());
        cand_sketch.reserve(candidates.size());
        for (const std::size_t i : candidates) {
            cand_photo.push_back(transplant_patch(views[i].photo, photo_x));
            cand_sketch.push_back(transplant_patch(views[i].neutral, photo_x));
        }

        // h = 1: retrieval by photo-region similarity.
        std::size_t init = 0;
        double init_nmi = -1.0;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            const double v = nmi_patches(photo_x, cand_photo[ci], opts.nmi_bins);
            if (v > init_nmi) {
                init_nmi = v;
                init = ci;
            }
        }
        RegionPatch interim = cand_sketch[init];
        double theta_bar = nmi_patches(interim, groundtruth, opts.nmi_bins);

        int steps = 0;
        for (int h = 2;; ++h) {
            const FeatureVector sx = region_features(interim);
            double best_theta = -1.0;
            double best_omega = 0.0;
            std::size_t best_ci = 0;
            for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
                const BlendWeightResult r =
                    optimize_blend_weight(interim, cand_sketch[ci], groundtruth, opts.nmi_bins);
                emit(compose_input(fx, candidate_features[candidates[ci]], sx), r.theta,
                     r.omega, x, candidates[ci], h);
                if (r.theta > best_theta) {
                    best_theta = r.theta;
                    best_omega = r.omega;
                    best_ci = ci;
                }
            }
            interim.image =
                blend(interim.image, interim.landmarks, cand_sketch[best_ci].image,
                      cand_sketch[best_ci].landmarks, best_omega)
                    .image;
            ++steps;

            if (opts.fixed_steps > 0) {
                if (steps >= opts.fixed_steps) break;
            } else {
                const double gain = (best_theta - theta_bar) / theta_bar;
                theta_bar = best_theta;
                if (gain < opts.threshold) break;
                if (best_theta >= kNmiMax - 1e-9) break;  // metric maximum reached
                if (steps >= opts.max_steps) break;
            }
            theta_bar = best_theta;
        }
    }
    return set;
}

// --- Mutual information / mRMR -------------------------------------------------

namespace {

// Equal-frequency discretization of selected sample rows, one byte per value.
class Discretized {
public:
    Discretized(const SampleSet& samples, Target target, std::span<const std::uint32_t> rows,
                int bins)
        : n_(rows.size()), dim_(samples.dim), bins_(bins) {
        cols_.resize(static_cast<std::size_t>(dim_ + 1) * n_);
        std::vector<float> values(n_);
        for (int j = 0; j <= dim_; ++j) {
            for (std::size_t i = 0; i < n_; ++i) {
                values[i] = j < dim_ ? samples.inputs[rows[i] * samples.dim + j]
                                     : samples.targets(target)[rows[i]];
            }
            discretize_column(values, cols_.data() + static_cast<std::size_t>(j) * n_);
        }
    }

    std::size_t size() const { return n_; }
    int bins() const { return bins_; }
    const std::uint8_t* column(int j) const {
        return cols_.data() + static_cast<std::size_t>(j) * n_;
    }
    const std::uint8_t* target_column() const { return column(dim_); }

    double mutual_information(const std::uint8_t* a, const std::uint8_t* b) const {
        const int B = bins_;
        std::array<std::uint32_t, 64> joint{};  // bins <= 8
        for (std::size_t i = 0; i < n_; ++i) ++joint[a[i] * B + b[i]];
        std::array<std::uint32_t, 8> ma{}, mb{};
        for (int u = 0; u < B; ++u) {
            for (int v = 0; v < B; ++v) {
                ma[u] += joint[u * B + v];
                mb[v] += joint[u * B + v];
            }
        }
        const double total = static_cast<double>(n_);
        double mi = 0.0;
        for (int u = 0; u < B; ++u) {
            for (int v = 0; v < B; ++v) {
                const std::uint32_t c = joint[u * B + v];
                if (c == 0) continue;
                mi += (c / total) *
                      std::log(c * total / (static_cast<double>(ma[u]) * mb[v]));
            }
        }
        return mi < 0.0 ? 0.0 : mi;
    }

private:
    void discretize_column(const std::vector<float>& values, std::uint8_t* out) {
        std::vector<float> sorted(values);
        std::sort(sorted.begin(), sorted.end());
        std::array<float, 7> edges{};
        for (int q = 1; q < bins_; ++q) {
            edges[q - 1] = sorted[q * n_ / bins_];
        }
        for (std::size_t i = 0; i < n_; ++i) {
            const int bin = static_cast<int>(
                std::upper_bound(edges.begin(), edges.begin() + (bins_ - 1), values[i]) -
                edges.begin());
            out[i] = static_cast<std::uint8_t>(bin);
        }
    }

    std::size_t n_;
    int dim_;
    int bins_;
    std::vector<std::uint8_t> cols_;
};

// Incremental greedy mRMR ranking over a Discretized view. Extending to a
// larger k never changes the already-ranked prefix.
class MrmrRanking {
public:
    explicit MrmrRanking(const Discretized& data, int dim) : data_(data), dim_(dim) {
        relevance_.resize(dim_);
        red_sum_.assign(dim_, 0.0);
        const std::uint8_t* t = data_.target_column();
        for (int j = 0; j < dim_; ++j) {
            relevance_[j] = data_.mutual_information(data_.column(j), t);
        }
        in_order_.assign(dim_, false);
    }

    const std::vector<int>& extend_to(int k) {
        while (static_cast<int>(order_.size()) < std::min(k, dim_)) {
            int best = -1;
            double best_score = -std::numeric_limits<double>::infinity();
            const double inv_s =
                order_.empty() ? 0.0 : 1.0 / static_cast<double>(order_.size());
            for (int j = 0; j < dim_; ++j) {
                if (in_order_[j]) continue;
                const double score = relevance_[j] - red_sum_[j] * inv_s;
                if (score > best_score) {
                    best_score = score;
                    best = j;
                }
            }
            order_.push_back(best);
            in_order_[best] = true;
            const std::uint8_t* sel = data_.column(best);
            for (int j = 0; j < dim_; ++j) {
                if (!in_order_[j]) {
                    red_sum_[j] += data_.mutual_information(data_.column(j), sel);
                }
            }
        }
        return order_;
    }

private:
    const Discretized& data_;
    int dim_;
    std::vector<double> relevance_;
    std::vector<double> red_sum_;
    std::vector<bool> in_order_;
    std::vector<int> order_;
};

bool constant_span(std::span<const float> v) {
    for (const float x : v) {
        if (x != v.front()) return false;
    }
    return true;
}

}  // namespace

std::vector<int> mrmr_select(const SampleSet& samples, Target target, int k, int mrmr_bins) {
    if (k < 1 || k > samples.dim) {
        throw ConfigError("mrmr_select: k = " + std::to_string(k) + " outside [1, " +
                          std::to_string(samples.dim) + "]");
    }
    if (samples.size() < 20) {
        throw InsufficientDataError("mrmr_select: need at least 20 samples");
    }
    if (constant_span(samples.targets(target))) {
        throw DegenerateTargetError("mrmr_select: target is constant");
    }
    std::vector<std::uint32_t> rows(samples.size());
    std::iota(rows.begin(), rows.end(), 0u);
    const Discretized data(samples, target, rows, mrmr_bins);
    MrmrRanking ranking(data, samples.dim);
    std::vector<int> order = ranking.extend_to(k);
    order.resize(k);
    return order;
}

// --- Cross-validation ----------------------------------------------------------

namespace {

// Shared state for repeated CV evaluations over one sample set and target:
// fold split, per-fold discretization, and per-fold incremental mRMR ranking.
class CvContext {
public:
    CvContext(const SampleSet& samples, Target target, const CvOptions& opts)
        : samples_(samples), target_(target), opts_(opts) {
        const std::size_t n = samples.size();
        if (n < static_cast<std::size_t>(opts.folds)) {
            throw InsufficientDataError("cross-validation: " + std::to_string(n) +
                                        " samples for " + std::to_string(opts.folds) +
                                        " folds");
        }
        Rng rng(derive_seed(opts.seed, 0x5eed + static_cast<std::uint64_t>(samples.region_id) * 2 +
                                           static_cast<std::uint64_t>(target)));
        const std::vector<int> fold_of = fold_assignment(n, opts.folds, rng);
        folds_.resize(opts.folds);
        for (std::size_t i = 0; i < n; ++i) {
            folds_[fold_of[i]].val.push_back(static_cast<std::uint32_t>(i));
        }
        for (int f = 0; f < opts.folds; ++f) {
            for (std::size_t i = 0; i < n; ++i) {
                if (fold_of[i] != f) folds_[f].train.push_back(static_cast<std::uint32_t>(i));
            }
            folds_[f].data = std::make_unique<Discretized>(samples, target, folds_[f].train,
                                                           opts.mrmr_bins);
            folds_[f].ranking = std::make_unique<MrmrRanking>(*folds_[f].data, samples.dim);
        }
    }

    double error_for(ModelKind kind, int k) {
        const auto key = std::make_pair(kind, k);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;

        double abs_sum = 0.0;
        std::size_t count = 0;
        const std::span<const float> targets = samples_.targets(target_);
        for (int f = 0; f < opts_.folds; ++f) {
            Fold& fold = folds_[f];
            std::vector<int> selected = fold.ranking->extend_to(k);
            selected.resize(std::min<std::size_t>(k, selected.size()));

            const std::size_t n_train = fold.train.size();
            std::vector<float> rows(n_train * selected.size());
            std::vector<float> y(n_train);
            for (std::size_t i = 0; i < n_train; ++i) {
                const std::span<const float> full = samples_.input(fold.train[i]);
                for (std::size_t j = 0; j < selected.size(); ++j) {
                    rows[i * selected.size() + j] = full[selected[j]];
                }
                y[i] = targets[fold.train[i]];
            }
            const Regressor model = Regressor::train(
                kind, rows, n_train, y, selected, samples_.dim,
                derive_seed(opts_.seed, 0xf01d + static_cast<std::uint64_t>(f)), opts_.train);
            for (const std::uint32_t vi : fold.val) {
                abs_sum += std::abs(model.predict(samples_.input(vi)) - targets[vi]);
                ++count;
            }
        }
        const double err = abs_sum / static_cast<double>(count);
        cache_[key] = err;
        return err;
    }

    int dim() const { return samples_.dim; }

private:
    struct Fold {
        std::vector<std::uint32_t> train, val;
        std::unique_ptr<Discretized> data;
        std::unique_ptr<MrmrRanking> ranking;
    };

    const SampleSet& samples_;
    Target target_;
    CvOptions opts_;
    std::vector<Fold> folds_;
    std::map<std::pair<ModelKind, int>, double> cache_;
};

int best_first_search(CvContext& ctx, ModelKind kind) {
    const int dim = ctx.dim();
    std::map<int, double> evaluated;
    std::set<int> expanded;
    const auto eval = [&](int k) {
        if (const auto it = evaluated.find(k); it != evaluated.end()) return it->second;
        const double e = ctx.error_for(kind, k);
        evaluated[k] = e;
        return e;
    };

    int best_k = 1;
    double best_err = eval(1);
    constexpr int kPatience = 5;
    for (const int step : {10, 1}) {
        int stale = 0;
        while (stale < kPatience) {
            // Expand the best not-yet-expanded node (ties toward smaller k).
            int node = -1;
            double node_err = std::numeric_limits<double>::infinity();
            for (const auto& [k, e] : evaluated) {
                if (!expanded.contains(k) && e < node_err) {
                    node = k;
                    node_err = e;
                }
            }
            if (node < 0) break;
            expanded.insert(node);
            const double prev_best = best_err;
            for (const int nk : {node - step, node + step}) {
                const int clamped = std::clamp(nk, 1, dim);
                if (evaluated.contains(clamped)) continue;
                const double e = eval(clamped);
                if (e < best_err || (e == best_err && clamped < best_k)) {
                    best_err = e;
                    best_k = clamped;
                }
            }
            stale = best_err < prev_best ? 0 : stale + 1;
        }
        expanded.clear();  // the fine phase re-expands around the coarse optimum
    }
    return best_k;
}

}  // namespace

double cross_validate(const SampleSet& samples, ModelKind kind, Target target, int k_features,
                      const CvOptions& opts) {
    if (k_features < 1 || k_features > samples.dim) {
        throw ConfigError("cross_validate: invalid feature count " + std::to_string(k_features));
    }
    CvContext ctx(samples, target, opts);
    return ctx.error_for(kind, k_features);
}

int best_first_feature_count(const SampleSet& samples, ModelKind kind, Target target,
                             const CvOptions& opts) {
    CvContext ctx(samples, target, opts);
    return best_first_search(ctx, kind);
}

RegionModels train_region_models(const SampleSet& samples, const LearnOptions& opts) {
    if (opts.zoo.empty()) throw ConfigError("train_region_models: empty model zoo");
    if (samples.size() == 0) {
        throw InsufficientDataError("train_region_models: no training samples");
    }

    RegionModels out;
    out.region_id = samples.region_id;

    for (const Target target : {Target::Theta, Target::Omega}) {
        CvContext ctx(samples, target, opts.cv);
        ModelKind best_kind = opts.zoo.front();
        int best_k = 1;
        double best_err = std::numeric_limits<double>::infinity();
        for (const ModelKind kind : opts.zoo) {
            const int k = best_first_search(ctx, kind);
            const double err = ctx.error_for(kind, k);
            out.selection.push_back({kind, target, k, err});
            if (err < best_err ||
                (err == best_err && model_index(kind) < model_index(best_kind))) {
                best_err = err;
                best_kind = kind;
                best_k = k;
            }
        }

        // Retrain the winner on every sample with the full-set mRMR ranking.
        std::vector<std::uint32_t> rows(samples.size());
        std::iota(rows.begin(), rows.end(), 0u);
        const Discretized data(samples, target, rows, opts.cv.mrmr_bins);
        MrmrRanking ranking(data, samples.dim);
        std::vector<int> selected = ranking.extend_to(best_k);
        selected.resize(best_k);

        std::vector<float> matrix(samples.size() * selected.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const std::span<const float> full = samples.input(i);
            for (std::size_t j = 0; j < selected.size(); ++j) {
                matrix[i * selected.size() + j] = full[selected[j]];
            }
        }
        const std::span<const float> y = samples.targets(target);
        Regressor model = Regressor::train(
            best_kind, matrix, samples.size(), y, selected, samples.dim,
            derive_seed(opts.cv.seed, 0xbe57 + static_cast<std::uint64_t>(target)),
            opts.cv.train);
        model.set_cv_error(best_err);
        if (target == Target::Omega) model.set_clamp01(true);
        (target == Target::Theta ? out.fe : out.pe) = std::move(model);
    }
    return out;
}

// --- Model bundle persistence ----------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'S', 'T', 'S', 'R'};
constexpr std::uint8_t kModelVersion = 1;

void save_regressor_file(const Regressor& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open model file for writing: " + path.string());
    out.write(kModelMagic, 4);
    out.write(reinterpret_cast<const char*>(&kModelVersion), 1);
    model.write(out);
    if (!out) throw IoError("failed writing model file: " + path.string());
}

Regressor load_regressor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad model file magic");
    }
    std::uint8_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 1);
    if (version != kModelVersion) {
        throw VersionError(path.string() + ": unsupported model file version " +
                           std::to_string(version));
    }
    return Regressor::read(in);
}

}  // namespace

const RegionModels& AllModels::for_region(int region_id) const {
    for (const RegionModels& r : regions) {
        if (r.region_id == region_id) return r;
    }
    throw ConfigError("no trained models for region " + std::to_string(region_id));
}

void save_models(const AllModels& models, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json index;
    index["schema_version"] = 1;
    index["seed"] = models.seed;
    json regions = json::array();
    for (const RegionModels& rm : models.regions) {
        const std::string fe_file = "region_" + std::to_string(rm.region_id) + "_fe.stsr";
        const std::string pe_file = "region_" + std::to_string(rm.region_id) + "_pe.stsr";
        save_regressor_file(rm.fe, dir / fe_file);
        save_regressor_file(rm.pe, dir / pe_file);
        json entry;
        entry["region"] = rm.region_id;
        entry["fe"] = {{"file", fe_file},
                       {"model", model_name(rm.fe.kind())},
                       {"features", rm.fe.selected_features().size()},
                       {"cv_error", rm.fe.cv_error()}};
        entry["pe"] = {{"file", pe_file},
                       {"model", model_name(rm.pe.kind())},
                       {"features", rm.pe.selected_features().size()},
                       {"cv_error", rm.pe.cv_error()}};
        json selection = json::array();
        for (const ModelSelectionEntry& s : rm.selection) {
            selection.push_back({{"model", model_name(s.kind)},
                                 {"target", target_name(s.target)},
                                 {"k", s.k_features},
                                 {"cv_error", s.cv_error}});
        }
        entry["selection"] = selection;
        regions.push_back(entry);
    }
    index["regions"] = regions;
    std::ofstream out(dir / "models.json");
    if (!out) throw IoError("cannot write model index: " + (dir / "models.json").string());
    out << index.dump(2) << '\n';
}

AllModels load_models(const std::filesystem::path& dir) {
    const std::filesystem::path index_path = dir / "models.json";
    std::ifstream in(index_path);
    if (!in) throw IoError("no model index at " + index_path.string());
    json index;
    try {
        in >> index;
    } catch (const json::exception& e) {
        throw FormatError(index_path.string() + ": " + e.what());
    }
    if (index.value("schema_version", -1) != 1) {
        throw VersionError(index_path.string() + ": unsupported schema_version");
    }
    AllModels models;
    models.seed = index.value("seed", std::uint64_t{0});
    for (const auto& entry : index["regions"]) {
        RegionModels rm;
        rm.region_id = entry["region"].get<int>();
        rm.fe = load_regressor_file(dir / entry["fe"]["file"].get<std::string>());
        rm.pe = load_regressor_file(dir / entry["pe"]["file"].get<std::string>());
        models.regions.push_back(std::move(rm));
    }
    if (models.regions.empty()) {
        throw ValidationError(index_path.string() + ": no regions in model bundle");
    }
    return models;
}

}  // namespace sketchcbr
