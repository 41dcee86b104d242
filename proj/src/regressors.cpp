#include "sketchcbr/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "sketchcbr/kernels.hpp"
#include "sketchcbr/rng.hpp"

namespace sketchcbr {

const char* model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::BaggingTrees: return "M1";
        case ModelKind::RegressionTree: return "M4";
        case ModelKind::Isotonic: return "M7";
        case ModelKind::Knn: return "M9";
        case ModelKind::Linear: return "M10";
        case ModelKind::Stump: return "M12";
    }
    return "?";
}

int model_index(ModelKind kind) {
    switch (kind) {
        case ModelKind::BaggingTrees: return 1;
        case ModelKind::RegressionTree: return 4;
        case ModelKind::Isotonic: return 7;
        case ModelKind::Knn: return 9;
        case ModelKind::Linear: return 10;
        case ModelKind::Stump: return 12;
    }
    return 99;
}

ModelKind model_from_name(const std::string& s) {
    for (ModelKind k : all_model_kinds()) {
        if (s == model_name(k)) return k;
    }
    throw ConfigError("unknown regression model name: " + s);
}

std::vector<ModelKind> all_model_kinds() {
    return {ModelKind::BaggingTrees, ModelKind::RegressionTree, ModelKind::Isotonic,
            ModelKind::Knn, ModelKind::Linear, ModelKind::Stump};
}

double TreeModel::predict(std::span<const float> x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        node = x[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    }
    return nodes[node].value;
}

namespace {

struct SplitResult {
    bool found = false;
    int feature = -1;
    float threshold = 0.0f;
    double cost = std::numeric_limits<double>::infinity();
};

// Best variance-reduction split over the node's samples. Ties keep the first
// candidate in (feature, threshold) scan order, so training is deterministic.
SplitResult best_split(std::span<const float> rows, std::size_t dim,
                       std::span<const float> y, const std::vector<std::uint32_t>& idx,
                       int min_leaf) {
    SplitResult best;
    const std::size_t n = idx.size();
    std::vector<std::pair<float, std::uint32_t>> order(n);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t t = 0; t < n; ++t) {
            order[t] = {rows[static_cast<std::size_t>(idx[t]) * dim + j], idx[t]};
        }
        std::sort(order.begin(), order.end());
        double left_sum = 0.0, left_sq = 0.0;
        double right_sum = 0.0, right_sq = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = y[order[t].second];
            right_sum += v;
            right_sq += v * v;
        }
        for (std::size_t s = 1; s < n; ++s) {
            const double v = y[order[s - 1].second];
            left_sum += v;
            left_sq += v * v;
            right_sum -= v;
            right_sq -= v * v;
            if (s < static_cast<std::size_t>(min_leaf) ||
                n - s < static_cast<std::size_t>(min_leaf)) {
                continue;
            }
            if (!(order[s - 1].first < order[s].first)) continue;
            const double nl = static_cast<double>(s);
            const double nr = static_cast<double>(n - s);
            const double cost = (left_sq - left_sum * left_sum / nl) +
                                (right_sq - right_sum * right_sum / nr);
            if (cost < best.cost) {
                best.found = true;
                best.feature = static_cast<int>(j);
                best.threshold = 0.5f * (order[s - 1].first + order[s].first);
                best.cost = cost;
            }
        }
    }
    return best;
}

int build_tree_node(TreeModel& tree, std::span<const float> rows, std::size_t dim,
                    std::span<const float> y, std::vector<std::uint32_t> idx, int min_leaf) {
    double sum = 0.0, sq = 0.0;
    for (const std::uint32_t i : idx) {
        sum += y[i];
        sq += y[i] * y[i];
    }
    const double n = static_cast<double>(idx.size());
    const double mean = sum / n;
    const double sse = sq - sum * sum / n;

    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_index].value = static_cast<float>(mean);

    if (idx.size() < 2 * static_cast<std::size_t>(min_leaf) || sse <= 1e-12) {
        return node_index;
    }
    const SplitResult split = best_split(rows, dim, y, idx, min_leaf);
    if (!split.found) return node_index;

    std::vector<std::uint32_t> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (const std::uint32_t i : idx) {
        if (rows[static_cast<std::size_t>(i) * dim + split.feature] <= split.threshold) {
            left_idx.push_back(i);
        } else {
            right_idx.push_back(i);
        }
    }
    idx.clear();
    idx.shrink_to_fit();

    const int left = build_tree_node(tree, rows, dim, y, std::move(left_idx), min_leaf);
    const int right = build_tree_node(tree, rows, dim, y, std::move(right_idx), min_leaf);
    tree.nodes[node_index].feature = split.feature;
    tree.nodes[node_index].threshold = split.threshold;
    tree.nodes[node_index].left = left;
    tree.nodes[node_index].right = right;
    return node_index;
}

TreeModel build_tree(std::span<const float> rows, std::size_t n, std::size_t dim,
                     std::span<const float> y, const std::vector<std::uint32_t>& idx,
                     int min_leaf) {
    (void)n;
    TreeModel tree;
    build_tree_node(tree, rows, dim, y, idx, min_leaf);
    return tree;
}

StumpModel fit_stump(std::span<const float> rows, std::size_t n, std::size_t dim,
                     std::span<const float> y) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    StumpModel stump;
    const SplitResult split = best_split(rows, dim, y, idx, /*min_leaf=*/1);
    if (!split.found) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += y[i];
        stump.left_value = stump.right_value = static_cast<float>(sum / static_cast<double>(n));
        return stump;
    }
    double ls = 0.0, rs = 0.0;
    std::size_t ln = 0, rn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i * dim + split.feature] <= split.threshold) {
            ls += y[i];
            ++ln;
        } else {
            rs += y[i];
            ++rn;
        }
    }
    stump.feature = split.feature;
    stump.threshold = split.threshold;
    stump.left_value = static_cast<float>(ls / static_cast<double>(ln));
    stump.right_value = static_cast<float>(rs / static_cast<double>(rn));
    return stump;
}

IsotonicModel fit_isotonic(std::span<const float> rows, std::size_t n, std::size_t dim,
                           std::span<const float> y) {
    std::vector<std::pair<float, std::uint32_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = {rows[i * dim], static_cast<std::uint32_t>(i)};
    std::sort(order.begin(), order.end());

    // Group ties on x, then choose the direction by the correlation sign.
    std::vector<double> gx, gy, gw;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < n && order[j].first == order[i].first) {
            sum += y[order[j].second];
            ++j;
        }
        gx.push_back(order[i].first);
        gy.push_back(sum / static_cast<double>(j - i));
        gw.push_back(static_cast<double>(j - i));
        i = j;
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += rows[i * dim];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (rows[i * dim] - mean_x) * (y[i] - mean_y);
    }
    IsotonicModel model;
    model.increasing = cov >= 0.0;

    // Pool adjacent violators on the group means.
    struct Block {
        double value;
        double weight;
        std::size_t last;  // index of the last group in this block
    };
    std::vector<Block> blocks;
    const double sign = model.increasing ? 1.0 : -1.0;
    for (std::size_t g = 0; g < gx.size(); ++g) {
        blocks.push_back({sign * gy[g], gw[g], g});
        while (blocks.size() >= 2 &&
               blocks[blocks.size() - 2].value > blocks.back().value) {
            const Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
            a.weight += b.weight;
            a.last = b.last;
        }
    }
    for (const Block& b : blocks) {
        model.xs.push_back(static_cast<float>(gx[b.last]));
        model.ys.push_back(static_cast<float>(sign * b.value));
    }
    return model;
}

double predict_isotonic(const IsotonicModel& m, float q) {
    // Stepwise-constant: value of the first block whose right edge covers q.
    const auto it = std::lower_bound(m.xs.begin(), m.xs.end(), q);
    if (it == m.xs.end()) return m.ys.back();
    return m.ys[static_cast<std::size_t>(it - m.xs.begin())];
}

LinearModel fit_linear(std::span<const float> rows, std::size_t n, std::size_t dim,
                       std::span<const float> y) {
    // Normal equations with an intercept column; Cholesky with escalating
    // jitter for rank-deficient subspaces.
    const std::size_t d = dim + 1;
    std::vector<double> ata(d * d, 0.0), aty(d, 0.0);
    std::vector<double> x(d, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) x[j] = rows[i * dim + j];
        x[dim] = 1.0;
        for (std::size_t a = 0; a < d; ++a) {
            aty[a] += x[a] * y[i];
            for (std::size_t b = a; b < d; ++b) ata[a * d + b] += x[a] * x[b];
        }
    }
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < a; ++b) ata[a * d + b] = ata[b * d + a];
    }
    double mean_diag = 0.0;
    for (std::size_t a = 0; a < d; ++a) mean_diag += ata[a * d + a];
    mean_diag = std::max(mean_diag / static_cast<double>(d), 1e-12);

    std::vector<double> chol(d * d), beta(d);
    double jitter = 1e-10;
    for (int attempt = 0; attempt < 12; ++attempt, jitter *= 10.0) {
        chol = ata;
        for (std::size_t a = 0; a < d; ++a) chol[a * d + a] += jitter * mean_diag;
        bool ok = true;
        for (std::size_t a = 0; a < d && ok; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                double s = chol[a * d + b];
                for (std::size_t k = 0; k < b; ++k) s -= chol[a * d + k] * chol[b * d + k];
                if (a == b) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    chol[a * d + a] = std::sqrt(s);
                } else {
                    chol[a * d + b] = s / chol[b * d + b];
                }
            }
        }
        if (!ok) continue;
        for (std::size_t a = 0; a < d; ++a) {
            double s = aty[a];
            for (std::size_t k = 0; k < a; ++k) s -= chol[a * d + k] * beta[k];
            beta[a] = s / chol[a * d + a];
        }
        for (std::size_t a = d; a-- > 0;) {
            double s = beta[a];
            for (std::size_t k = a + 1; k < d; ++k) s -= chol[k * d + a] * beta[k];
            beta[a] = s / chol[a * d + a];
        }
        LinearModel model;
        model.coef.assign(beta.begin(), beta.begin() + dim);
        model.intercept = beta[dim];
        return model;
    }
    throw SolverError("linear regression: normal equations not positive definite");
}

}  // namespace

Regressor Regressor::train(ModelKind kind, std::span<const float> rows, std::size_t n,
                           std::span<const float> targets, std::vector<int> selected,
                           int input_dim, std::uint64_t seed, const TrainOptions& opts) {
    if (n == 0) throw InsufficientDataError("cannot train a model on zero samples");
    const std::size_t dim = selected.size();
    if (dim == 0) throw InsufficientDataError("cannot train a model on zero features");
    if (rows.size() != n * dim || targets.size() != n) {
        throw DimensionError("training matrix shape mismatch");
    }

    Regressor r;
    r.kind_ = kind;
    r.selected_ = std::move(selected);
    r.input_dim_ = input_dim;
    r.seed_ = seed;

    switch (kind) {
        case ModelKind::BaggingTrees: {
            BaggingModel model;
            model.trees.reserve(opts.bagging_trees);
            for (int t = 0; t < opts.bagging_trees; ++t) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
                std::vector<std::uint32_t> idx(n);
                for (std::size_t i = 0; i < n; ++i) {
                    idx[i] = static_cast<std::uint32_t>(rng.uniform_index(n));
                }
                model.trees.push_back(build_tree(rows, n, dim, targets, idx, opts.min_leaf));
            }
            r.model_ = std::move(model);
            break;
        }
        case ModelKind::RegressionTree: {
            std::vector<std::uint32_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0u);
            r.model_ = build_tree(rows, n, dim, targets, idx, opts.min_leaf);
            break;
        }
        case ModelKind::Isotonic:
            r.model_ = fit_isotonic(rows, n, dim, targets);
            break;
        case ModelKind::Knn: {
            KnnModel model;
            model.k = opts.knn_k;
            model.dim = static_cast<int>(dim);
            model.data.assign(rows.begin(), rows.end());
            model.targets.assign(targets.begin(), targets.end());
            r.model_ = std::move(model);
            break;
        }
        case ModelKind::Linear:
            r.model_ = fit_linear(rows, n, dim, targets);
            break;
        case ModelKind::Stump:
            r.model_ = fit_stump(rows, n, dim, targets);
            break;
    }
    return r;
}

double Regressor::predict_selected(std::span<const float> x) const {
    switch (kind_) {
        case ModelKind::BaggingTrees: {
            const auto& m = std::get<BaggingModel>(model_);
            double sum = 0.0;
            for (const TreeModel& t : m.trees) sum += t.predict(x);
            return sum / static_cast<double>(m.trees.size());
        }
        case ModelKind::RegressionTree:
            return std::get<TreeModel>(model_).predict(x);
        case ModelKind::Isotonic:
            return predict_isotonic(std::get<IsotonicModel>(model_), x[0]);
        case ModelKind::Knn: {
            const auto& m = std::get<KnnModel>(model_);
            const std::size_t n = m.targets.size();
            std::vector<float> d2(n);
            kernels::active().ssd_scan(m.data.data(), n, m.dim, x.data(), d2.data());
            const int k = std::min<int>(m.k, static_cast<int>(n));
            // Small-k selection with index tie-break keeps neighbours stable.
            std::vector<std::pair<float, std::uint32_t>> best;
            best.reserve(k + 1);
            for (std::size_t i = 0; i < n; ++i) {
                const std::pair<float, std::uint32_t> cand{d2[i], static_cast<std::uint32_t>(i)};
                if (static_cast<int>(best.size()) < k || cand < best.back()) {
                    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
                    if (static_cast<int>(best.size()) > k) best.pop_back();
                }
            }
            double zero_sum = 0.0;
            int zero_count = 0;
            for (const auto& [dist, idx] : best) {
                if (dist <= 1e-12f) {
                    zero_sum += m.targets[idx];
                    ++zero_count;
                }
            }
            if (zero_count > 0) return zero_sum / zero_count;
            double wsum = 0.0, vsum = 0.0;
            for (const auto& [dist, idx] : best) {
                const double w = 1.0 / std::sqrt(static_cast<double>(dist));
                wsum += w;
                vsum += w * m.targets[idx];
            }
            return vsum / wsum;
        }
        case ModelKind::Linear: {
            const auto& m = std::get<LinearModel>(model_);
            double acc = m.intercept;
            for (std::size_t j = 0; j < m.coef.size(); ++j) acc += m.coef[j] * x[j];
            return acc;
        }
        case ModelKind::Stump: {
            const auto& m = std::get<StumpModel>(model_);
            if (m.feature < 0) return m.left_value;
            return x[m.feature] <= m.threshold ? m.left_value : m.right_value;
        }
    }
    return 0.0;
}

double Regressor::predict(std::span<const float> input) const {
    if (static_cast<int>(input.size()) != input_dim_) {
        throw DimensionError("predict: input has dimension " + std::to_string(input.size()) +
                             ", model expects " + std::to_string(input_dim_));
    }
    std::vector<float> x(selected_.size());
    for (std::size_t j = 0; j < selected_.size(); ++j) x[j] = input[selected_[j]];
    double out = predict_selected(x);
    if (clamp01_) out = std::clamp(out, 0.0, 1.0);
    return out;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("truncated model payload");
    return v;
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
    write_pod<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_vec(std::istream& in) {
    const auto n = read_pod<std::uint64_t>(in);
    std::vector<T> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw FormatError("truncated model payload");
    return v;
}

void write_tree(std::ostream& out, const TreeModel& t) { write_vec(out, t.nodes); }
TreeModel read_tree(std::istream& in) { return {read_vec<TreeNode>(in)}; }

}  // namespace

void Regressor::write(std::ostream& out) const {
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(kind_));
    write_pod<std::uint8_t>(out, clamp01_ ? 1 : 0);
    write_pod<std::int32_t>(out, input_dim_);
    write_pod<double>(out, cv_error_);
    write_pod<std::uint64_t>(out, seed_);
    write_vec(out, selected_);
    switch (kind_) {
        case ModelKind::BaggingTrees: {
            const auto& m = std::get<BaggingModel>(model_);
            write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.trees.size()));
            for (const TreeModel& t : m.trees) write_tree(out, t);
            break;
        }
        case ModelKind::RegressionTree:
            write_tree(out, std::get<TreeModel>(model_));
            break;
        case ModelKind::Isotonic: {
            const auto& m = std::get<IsotonicModel>(model_);
            write_pod<std::uint8_t>(out, m.increasing ? 1 : 0);
            write_vec(out, m.xs);
            write_vec(out, m.ys);
            break;
        }
        case ModelKind::Knn: {
            const auto& m = std::get<KnnModel>(model_);
            write_pod<std::int32_t>(out, m.k);
            write_pod<std::int32_t>(out, m.dim);
            write_vec(out, m.data);
            write_vec(out, m.targets);
            break;
        }
        case ModelKind::Linear: {
            const auto& m = std::get<LinearModel>(model_);
            write_pod<double>(out, m.intercept);
            write_vec(out, m.coef);
            break;
        }
        case ModelKind::Stump: {
            const auto& m = std::get<StumpModel>(model_);
            write_pod<std::int32_t>(out, m.feature);
            write_pod<float>(out, m.threshold);
            write_pod<float>(out, m.left_value);
            write_pod<float>(out, m.right_value);
            break;
        }
    }
}

Regressor Regressor::read(std::istream& in) {
    Regressor r;
    const auto kind_raw = read_pod<std::uint8_t>(in);
    if (kind_raw > static_cast<std::uint8_t>(ModelKind::Stump)) {
        throw FormatError("invalid model kind tag " + std::to_string(kind_raw));
    }
    r.kind_ = static_cast<ModelKind>(kind_raw);
    r.clamp01_ = read_pod<std::uint8_t>(in) != 0;
    r.input_dim_ = read_pod<std::int32_t>(in);
    r.cv_error_ = read_pod<double>(in);
    r.seed_ = read_pod<std::uint64_t>(in);
    r.selected_ = read_vec<int>(in);
    switch (r.kind_) {
        case ModelKind::BaggingTrees: {
            BaggingModel m;
            const auto count = read_pod<std::uint32_t>(in);
            m.trees.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) m.trees.push_back(read_tree(in));
            r.model_ = std::move(m);
            break;
        }
        case ModelKind::RegressionTree:
            r.model_ = read_tree(in);
            break;
        case ModelKind::Isotonic: {
            IsotonicModel m;
            m.increasing = read_pod<std::uint8_t>(in) != 0;
            m.xs = read_vec<float>(in);
            m.ys = read_vec<float>(in);
            r.model_ = std::move(m);
            break;
        }
        case ModelKind::Knn: {
            KnnModel m;
            m.k = read_pod<std::int32_t>(in);
            m.dim = read_pod<std::int32_t>(in);
            m.data = read_vec<float>(in);
            m.targets = read_vec<float>(in);
            r.model_ = std::move(m);
            break;
        }
        case ModelKind::Linear: {
            LinearModel m;
            m.intercept = read_pod<double>(in);
            m.coef = read_vec<double>(in);
            r.model_ = std::move(m);
            break;
        }
        case ModelKind::Stump: {
            StumpModel m;
            m.feature = read_pod<std::int32_t>(in);
            m.threshold = read_pod<float>(in);
            m.left_value = read_pod<float>(in);
            m.right_value = read_pod<float>(in);
            r.model_ = std::move(m);
            break;
        }
    }
    return r;
}

}  // namespace sketchcbr
