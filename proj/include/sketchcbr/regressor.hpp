#pragma once
// Regression model zoo used for the fitness-evaluation and
// parameter-estimation models. Each model trains on an already-selected
// feature subspace; the Regressor wrapper owns the subspace indices and
// gathers them from the full composite input at prediction time.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sketchcbr/errors.hpp"

namespace sketchcbr {

enum class ModelKind : std::uint8_t {
    BaggingTrees = 0,   // M1: bagged regression trees
    RegressionTree = 1, // M4: single variance-reduction tree
    Isotonic = 2,       // M7: isotonic fit on the most relevant feature
    Knn = 3,            // M9: k-nearest-neighbour, inverse-distance weights
    Linear = 4,         // M10: ordinary least squares
    Stump = 5,          // M12: one-split decision stump
};

const char* model_name(ModelKind kind);           // "M1", "M4", ...
int model_index(ModelKind kind);                  // 1, 4, 7, 9, 10, 12
ModelKind model_from_name(const std::string& s);  // throws ConfigError
std::vector<ModelKind> all_model_kinds();

// Trained-model payloads -----------------------------------------------------

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    float threshold = 0.0f;
    float value = 0.0f;  // leaf mean
    std::int32_t left = -1;
    std::int32_t right = -1;
};

struct TreeModel {
    std::vector<TreeNode> nodes;
    double predict(std::span<const float> x) const;
};

struct BaggingModel {
    std::vector<TreeModel> trees;
};

struct IsotonicModel {
    bool increasing = true;
    std::vector<float> xs;  // block boundaries (ascending)
    std::vector<float> ys;  // fitted values per block
};

struct KnnModel {
    int k = 5;
    int dim = 0;
    std::vector<float> data;     // n x dim, row-major
    std::vector<float> targets;  // n
};

struct LinearModel {
    std::vector<double> coef;
    double intercept = 0.0;
};

struct StumpModel {
    std::int32_t feature = -1;  // -1: constant model
    float threshold = 0.0f;
    float left_value = 0.0f;
    float right_value = 0.0f;
};

// -----------------------------------------------------------------------------

struct TrainOptions {
    int min_leaf = 5;
    int bagging_trees = 10;
    int knn_k = 5;
};

class Regressor {
public:
    Regressor() = default;

    /// Trains `kind` on rows (n x k, row-major, already reduced to the
    /// selected subspace). `selected` maps subspace column -> full input
    /// index; `input_dim` is the full composite dimensionality.
    static Regressor train(ModelKind kind, std::span<const float> rows, std::size_t n,
                           std::span<const float> targets, std::vector<int> selected,
                           int input_dim, std::uint64_t seed,
                           const TrainOptions& opts = TrainOptions{});

    /// Prediction from a full composite input vector. Throws DimensionError
    /// if the input length differs from the training dimensionality. Output
    /// is clamped to [0, 1] when clamp01 is set (parameter estimation).
    double predict(std::span<const float> input) const;

    ModelKind kind() const { return kind_; }
    const std::vector<int>& selected_features() const { return selected_; }
    int input_dim() const { return input_dim_; }
    double cv_error() const { return cv_error_; }
    void set_cv_error(double e) { cv_error_ = e; }
    std::uint64_t seed() const { return seed_; }
    bool clamp01() const { return clamp01_; }
    void set_clamp01(bool v) { clamp01_ = v; }

    void write(std::ostream& out) const;
    static Regressor read(std::istream& in);

private:
    double predict_selected(std::span<const float> x) const;

    ModelKind kind_ = ModelKind::Stump;
    std::vector<int> selected_;
    int input_dim_ = 0;
    double cv_error_ = 0.0;
    std::uint64_t seed_ = 0;
    bool clamp01_ = false;
    std::variant<BaggingModel, TreeModel, IsotonicModel, KnnModel, LinearModel, StumpModel>
        model_;
};

}  // namespace sketchcbr
