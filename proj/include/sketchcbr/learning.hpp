#pragma once
// Training-data generation (the oracle-driven iterative synthesis over case
// folds), mRMR feature selection, cross-validated model selection, and the
// per-region FE/PE model bundles.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sketchcbr/case_library.hpp"
#include "sketchcbr/features.hpp"
#include "sketchcbr/geometry.hpp"
#include "sketchcbr/regressor.hpp"

namespace sketchcbr {

enum class Target : std::uint8_t { Theta = 0, Omega = 1 };

struct SampleProvenance {
    std::uint32_t groundtruth_index = 0;
    std::uint32_t candidate_index = 0;
    std::uint16_t iteration = 0;  // h of the blending iteration that produced it
};

struct SampleSet {
    int region_id = 0;
    int dim = 0;
    int num_landmarks = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> case_ids;
    std::vector<float> inputs;  // size() * dim, row-major
    std::vector<float> theta;
    std::vector<float> omega;
    std::vector<SampleProvenance> provenance;

    std::size_t size() const { return theta.size(); }
    std::span<const float> input(std::size_t i) const {
        return {inputs.data() + i * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const float> targets(Target t) const {
        return t == Target::Theta ? std::span<const float>(theta)
                                  : std::span<const float>(omega);
    }
};

// STSM binary container (magic "STSM", version 1).
void save_samples(const SampleSet& set, const std::filesystem::path& path);
SampleSet load_samples(const std::filesystem::path& path);

struct BlendWeightResult {
    double omega = 0.0;
    double theta = 0.0;
};

/// Maximizes nmi(blend(interim, candidate, w), groundtruth) over w in [0, 1]
/// with a golden-section search multistarted from the brackets [0, 0.5],
/// [0.5, 1] and [0, 1]; both endpoints are always evaluated, so the result is
/// never below max(theta(0), theta(1)).
BlendWeightResult optimize_blend_weight(const RegionPatch& interim, const RegionPatch& candidate,
                                        const RegionPatch& groundtruth, int nmi_bins = 64,
                                        double omega_tol = 1e-3);

struct OracleOptions {
    std::uint64_t seed = 1;
    double threshold = 0.01;  // relative fitness gain that keeps the loop running
    int max_steps = 10;       // safety cap on blending iterations
    int fixed_steps = 0;      // > 0: run exactly this many blending iterations
    int folds = 10;
    int nmi_bins = 64;
};

/// Runs the groundtruth-guided retrieval/adaptation loop for every case of
/// every fold against the other folds and collects one sample per evaluated
/// (groundtruth, candidate, iteration) triple. The h=1 retrieval step emits
/// no samples. Throws InsufficientDataError when the library is smaller than
/// the fold count.
SampleSet generate_training_data(const CaseLibrary& lib, int region_id,
                                 const OracleOptions& opts);

/// Greedy minimal-redundancy-maximal-relevance ranking of the first k
/// features; mutual information on equal-frequency discretizations. Throws
/// DegenerateTargetError when the target is constant.
std::vector<int> mrmr_select(const SampleSet& samples, Target target, int k, int mrmr_bins = 8);

struct CvOptions {
    int folds = 10;
    std::uint64_t seed = 1;
    int mrmr_bins = 8;
    TrainOptions train;
};

/// Pooled mean absolute error of `kind` trained on the first k mRMR features
/// (ranking recomputed on each training fold) over a seeded fold split.
double cross_validate(const SampleSet& samples, ModelKind kind, Target target, int k_features,
                      const CvOptions& opts);

/// Best-first search for the feature count minimizing the CV error:
/// expansion neighbours k +- 10, then k +- 1 near the optimum, patience 5
/// non-improving expansions per phase.
int best_first_feature_count(const SampleSet& samples, ModelKind kind, Target target,
                             const CvOptions& opts);

struct ModelSelectionEntry {
    ModelKind kind;
    Target target;
    int k_features = 0;
    double cv_error = 0.0;
};

struct RegionModels {
    int region_id = 0;
    Regressor fe;
    Regressor pe;
    std::vector<ModelSelectionEntry> selection;  // one entry per (model, target)
};

struct LearnOptions {
    std::vector<ModelKind> zoo = all_model_kinds();
    CvOptions cv;
};

/// Full model selection for one region: per target, runs the feature-count
/// search for every zoo model, picks the lowest CV error (ties break toward
/// the lower model index) and retrains it on all samples.
RegionModels train_region_models(const SampleSet& samples, const LearnOptions& opts);

struct AllModels {
    std::uint64_t seed = 0;
    std::vector<RegionModels> regions;  // ordered by region id

    const RegionModels& for_region(int region_id) const;
};

void save_models(const AllModels& models, const std::filesystem::path& dir);
AllModels load_models(const std::filesystem::path& dir);

const char* target_name(Target t);

}  // namespace sketchcbr
