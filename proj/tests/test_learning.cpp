#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sketchcbr/learning.hpp"
#include "sketchcbr/metrics.hpp"
#include "sketchcbr/rng.hpp"
#include "region_ops.hpp"
#include "support/synthetic.hpp"

using namespace sketchcbr;

namespace {

std::vector<Point> triangle() {
    return {{4.0, 4.0}, {27.0, 5.0}, {15.0, 26.0}};
}

RegionPatch noise_patch(std::uint64_t seed) {
    return testsupport::full_patch(gaussian_blur(testsupport::random_image(32, 32, seed), 2, 1.2),
                                   triangle());
}

// 1001-point grid oracle for the blend-weight search.
double grid_best_theta(const RegionPatch& interim, const RegionPatch& candidate,
                       const RegionPatch& groundtruth) {
    double best = -1.0;
    for (int k = 0; k <= 1000; ++k) {
        const double w = k / 1000.0;
        const BlendResult blended = blend(interim.image, interim.landmarks, candidate.image,
                                          candidate.landmarks, w);
        best = std::max(best, nmi_masked(blended.image, interim.mask, groundtruth.image,
                                         groundtruth.mask));
    }
    return best;
}

SampleSet synthetic_samples(std::size_t n, int dim, std::uint64_t seed,
                            const std::function<void(std::size_t, std::vector<float>&, float&,
                                                     float&)>& fill) {
    SampleSet set;
    set.region_id = 1;
    set.dim = dim;
    set.num_landmarks = 6;
    set.seed = seed;
    std::vector<float> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        float theta = 0.0f, omega = 0.0f;
        fill(i, row, theta, omega);
        set.inputs.insert(set.inputs.end(), row.begin(), row.end());
        set.theta.push_back(theta);
        set.omega.push_back(omega);
        set.provenance.push_back({0, 0, 2});
    }
    return set;
}

}  // namespace

TEST_CASE("optimize_blend_weight: pulls toward the matching endpoint") {
    const RegionPatch interim = noise_patch(1);
    const RegionPatch groundtruth = noise_patch(2);

    // Candidate equals groundtruth: best blend is all-candidate.
    BlendWeightResult r = optimize_blend_weight(interim, groundtruth, groundtruth);
    CHECK(r.omega == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.theta == doctest::Approx(2.0).epsilon(1e-9));

    // Interim equals groundtruth: best blend keeps the interim.
    r = optimize_blend_weight(groundtruth, interim, groundtruth);
    CHECK(r.omega == doctest::Approx(0.0).epsilon(1e-2));
    CHECK(r.theta == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("optimize_blend_weight: matches the 1001-point grid oracle") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const RegionPatch interim = noise_patch(rng.next_u64());
        const RegionPatch candidate = noise_patch(rng.next_u64());
        RegionPatch groundtruth = noise_patch(rng.next_u64());
        if (trial % 2 == 0) {
            // Half the triples carry an interior optimum: the groundtruth
            // resembles a mixture, perturbed by independent noise.
            const double mix = rng.uniform(0.2, 0.8);
            const BlendResult blended = blend(interim.image, interim.landmarks, candidate.image,
                                              candidate.landmarks, mix);
            ImageGray gt = blended.image;
            for (std::uint8_t& v : gt.data) {
                const double noisy = v + rng.normal(0.0, 12.0);
                v = static_cast<std::uint8_t>(std::clamp(noisy, 0.0, 255.0));
            }
            groundtruth.image = gaussian_blur(gt, 1, 0.8);
        }
        const BlendWeightResult r = optimize_blend_weight(interim, candidate, groundtruth);
        const double oracle = grid_best_theta(interim, candidate, groundtruth);
        CHECK(std::abs(r.theta - oracle) <= 1e-4);
        CHECK(r.theta >= std::max(nmi_patches(interim, groundtruth),
                                  nmi_patches(candidate, groundtruth)) -
                             1e-6);
    }
}

TEST_CASE("generate_training_data: per-case sample count identity") {
    const testsupport::DatasetOptions opts{
        .width = 110, .height = 136, .count = 10, .exaggerate = false, .seed = 31};
    const CaseLibrary lib = testsupport::make_library(opts);
    OracleOptions oracle;
    oracle.seed = 5;
    oracle.fixed_steps = 2;
    const SampleSet samples = generate_training_data(lib, 5, oracle);

    // |R| = 10: folds of 1, so 9 candidates per groundtruth; 2 forced
    // blending iterations emit 10 * 9 * 2 samples.
    CHECK(samples.size() == 10 * 9 * 2);
    CHECK(samples.dim == composite_dim(9));

    // Per (x, h): exactly 9 candidate samples, none from x's own fold.
    std::map<std::pair<std::uint32_t, std::uint16_t>, std::set<std::uint32_t>> groups;
    for (const SampleProvenance& p : samples.provenance) {
        CHECK(p.groundtruth_index != p.candidate_index);
        groups[{p.groundtruth_index, p.iteration}].insert(p.candidate_index);
    }
    for (const auto& [key, candidates] : groups) {
        CHECK(candidates.size() == 9);
        CHECK((key.second == 2 || key.second == 3));
    }
    for (const float t : samples.theta) {
        CHECK(t > 0.0f);
        CHECK(t <= 2.0f + 1e-6f);
    }
    for (const float w : samples.omega) {
        CHECK(w >= 0.0f);
        CHECK(w <= 1.0f);
    }
}

TEST_CASE("generate_training_data: a perfect candidate terminates at h = 2") {
    // One candidate's neutral sketch equals every groundtruth region: with
    // identical photos the transplant is the identity, so theta hits the
    // metric maximum at the first blending iteration.
    testsupport::DatasetOptions opts{
        .width = 100, .height = 124, .count = 1, .exaggerate = false, .seed = 77};
    const auto pair = testsupport::make_pair(derive_seed(opts.seed, 0), opts);
    CaseLibrary lib;
    lib.style_id = "clone";
    lib.width = opts.width;
    lib.height = opts.height;
    lib.region_map = testsupport::synthetic_region_map();
    for (int i = 0; i < 10; ++i) {
        lib.cases.push_back(build_case("case_" + std::to_string(i), pair.photo, pair.sketch,
                                       pair.photo_landmarks, pair.sketch_landmarks));
    }
    OracleOptions oracle;
    oracle.seed = 2;
    const SampleSet samples = generate_training_data(lib, 3, oracle);
    std::uint16_t max_h = 0;
    float max_theta = 0.0f;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        max_h = std::max(max_h, samples.provenance[i].iteration);
        max_theta = std::max(max_theta, samples.theta[i]);
    }
    CHECK(max_h == 2);
    CHECK(max_theta == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("generate_training_data: library smaller than the fold count") {
    const testsupport::DatasetOptions opts{
        .width = 100, .height = 124, .count = 4, .exaggerate = false, .seed = 32};
    const CaseLibrary lib = testsupport::make_library(opts);
    CHECK_THROWS_AS(generate_training_data(lib, 1, OracleOptions{}), InsufficientDataError);
}

TEST_CASE("sample persistence: STSM round trip") {
    auto set = synthetic_samples(25, 6, 99, [](std::size_t i, std::vector<float>& row,
                                               float& theta, float& omega) {
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = static_cast<float>(i + j * 0.5);
        theta = 1.0f + static_cast<float>(i) / 50.0f;
        omega = static_cast<float>(i) / 25.0f;
    });
    set.case_ids = {"a", "b"};
    const auto dir = std::filesystem::temp_directory_path() / "sketchcbr_tests";
    std::filesystem::create_directories(dir);
    save_samples(set, dir / "t.stsm");
    const SampleSet loaded = load_samples(dir / "t.stsm");
    CHECK(loaded.region_id == set.region_id);
    CHECK(loaded.dim == set.dim);
    CHECK(loaded.inputs == set.inputs);
    CHECK(loaded.theta == set.theta);
    CHECK(loaded.omega == set.omega);
    CHECK(loaded.case_ids == set.case_ids);
    CHECK(loaded.seed == set.seed);
}

TEST_CASE("mrmr_select: relevance and redundancy behave") {
    Rng rng(1234);
    // Feature 3 IS the target; feature 5 duplicates feature 3; feature 7 is
    // an independent second signal. All others are noise.
    const int dim = 10;
    const auto set = synthetic_samples(
        200, dim, 1, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (int j = 0; j < dim; ++j) row[j] = static_cast<float>(rng.uniform());
            row[5] = row[3];
            theta = row[3];
            omega = 0.5f;
        });
    const std::vector<int> first = mrmr_select(set, Target::Theta, 1);
    CHECK(first[0] == 3);

    // Brute-force oracle for the two-feature selection: grade candidates by
    // I(f; t) - I(f; f3) via direct 8-bin joint histograms.
    const auto two = mrmr_select(set, Target::Theta, 2);
    CHECK(two[0] == 3);
    CHECK(two[1] != 5);  // the duplicate is maximally redundant

    // Target mixing in feature 7 makes {3, 7} the ideal pair.
    Rng rng2(99);
    const auto set2 = synthetic_samples(
        200, dim, 2, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (int j = 0; j < dim; ++j) row[j] = static_cast<float>(rng2.uniform());
            row[5] = row[3];
            theta = 0.6f * row[3] + 0.4f * row[7];
            omega = 0.5f;
        });
    const auto pair = mrmr_select(set2, Target::Theta, 2);
    CHECK(pair[0] == 3);
    CHECK(pair[1] == 7);
}

TEST_CASE("mrmr_select: full ranking is a permutation and prefixes nest") {
    Rng rng(41);
    const int dim = 12;
    const auto set = synthetic_samples(
        60, dim, 3, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (int j = 0; j < dim; ++j) row[j] = static_cast<float>(rng.uniform());
            theta = row[0] + 0.25f * row[4];
            omega = 0.5f;
        });
    const auto full = mrmr_select(set, Target::Theta, dim);
    std::set<int> unique(full.begin(), full.end());
    CHECK(unique.size() == static_cast<std::size_t>(dim));
    for (int k = 1; k < dim; ++k) {
        const auto prefix = mrmr_select(set, Target::Theta, k);
        for (int i = 0; i < k; ++i) CHECK(prefix[i] == full[i]);
    }
}

TEST_CASE("mrmr_select: constant target is degenerate") {
    Rng rng(55);
    const auto set = synthetic_samples(
        30, 4, 4, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (auto& v : row) v = static_cast<float>(rng.uniform());
            theta = 1.25f;
            omega = 0.5f;
        });
    CHECK_THROWS_AS(mrmr_select(set, Target::Theta, 2), DegenerateTargetError);
}

TEST_CASE("cross_validate: realizable targets reach (near) zero error") {
    Rng rng(5);
    const auto constant_target = synthetic_samples(
        60, 3, 5, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (auto& v : row) v = static_cast<float>(rng.uniform());
            theta = 0.75f;
            omega = 0.25f;
        });
    CvOptions cv;
    CHECK(cross_validate(constant_target, ModelKind::Stump, Target::Theta, 1, cv) ==
          doctest::Approx(0.0));

    Rng rng2(6);
    const auto linear_target = synthetic_samples(
        80, 3, 6, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (auto& v : row) v = static_cast<float>(rng2.uniform());
            theta = 2.0f * row[0] - 1.5f * row[1] + 0.5f;
            omega = 0.5f;
        });
    CHECK(cross_validate(linear_target, ModelKind::Linear, Target::Theta, 3, cv) <= 1e-6);
    CHECK(cross_validate(linear_target, ModelKind::Knn, Target::Theta, 3, cv) >= 0.0);
}

TEST_CASE("best_first_feature_count: finds compact subsets on sparse signals") {
    Rng rng(7);
    const int dim = 40;
    // Only four features carry signal; the noisy target makes every extra
    // noise feature measurably hurt a linear fit on this sample budget.
    const auto set = synthetic_samples(
        400, dim, 7, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (int j = 0; j < dim; ++j) row[j] = static_cast<float>(rng.uniform());
            theta = row[0] + 0.9f * row[1] + 0.8f * row[2] + 0.7f * row[3] +
                    static_cast<float>(rng.normal(0.0, 0.45));
            omega = 0.5f;
        });
    CvOptions cv;
    const int k = best_first_feature_count(set, ModelKind::Linear, Target::Theta, cv);
    CHECK(k >= 4);
    CHECK(k <= 12);
    const double err_at_k = cross_validate(set, ModelKind::Linear, Target::Theta, k, cv);
    const double err_at_4 = cross_validate(set, ModelKind::Linear, Target::Theta, 4, cv);
    CHECK(err_at_k <= err_at_4 * 1.10 + 1e-9);
}

TEST_CASE("best_first_feature_count: single-feature space returns 1") {
    Rng rng(8);
    const auto set = synthetic_samples(
        40, 1, 8, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            row[0] = static_cast<float>(rng.uniform());
            theta = row[0];
            omega = 0.5f;
        });
    CHECK(best_first_feature_count(set, ModelKind::Linear, Target::Theta, CvOptions{}) == 1);
}

TEST_CASE("best_first_feature_count: monotone signals reach the full dimension") {
    Rng rng(9);
    const int dim = 12;
    const auto set = synthetic_samples(
        240, dim, 9, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            theta = 0.0f;
            for (int j = 0; j < dim; ++j) {
                row[j] = static_cast<float>(rng.uniform());
                theta += row[j];
            }
            omega = 0.5f;
        });
    CHECK(best_first_feature_count(set, ModelKind::Linear, Target::Theta, CvOptions{}) == dim);
}

TEST_CASE("train_region_models: degenerate zoo and tree-friendly targets") {
    Rng rng(10);
    const int dim = 8;
    // Piecewise-constant target in feature 0: trees beat the linear model.
    const auto set = synthetic_samples(
        500, dim, 10, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (int j = 0; j < dim; ++j) row[j] = static_cast<float>(rng.uniform());
            theta = row[0] < 0.33f ? 0.2f : (row[0] < 0.66f ? 1.4f : 0.6f);
            omega = std::clamp(theta / 2.0f + 0.1f * static_cast<float>(rng.uniform()), 0.0f,
                               1.0f);
        });

    LearnOptions only_linear;
    only_linear.zoo = {ModelKind::Linear};
    const RegionModels lin = train_region_models(set, only_linear);
    CHECK(lin.fe.kind() == ModelKind::Linear);

    LearnOptions opts;
    opts.zoo = {ModelKind::BaggingTrees, ModelKind::RegressionTree, ModelKind::Linear};
    const RegionModels models = train_region_models(set, opts);
    CHECK((models.fe.kind() == ModelKind::BaggingTrees ||
           models.fe.kind() == ModelKind::RegressionTree));

    // One CV error per (model, target) pair, all finite.
    CHECK(models.selection.size() == 2 * opts.zoo.size());
    for (const ModelSelectionEntry& e : models.selection) {
        CHECK(std::isfinite(e.cv_error));
    }

    // Tree models should clearly beat the linear one on this target.
    double tree_err = 1e9, lin_err = 0.0;
    for (const ModelSelectionEntry& e : models.selection) {
        if (e.target != Target::Theta) continue;
        if (e.kind == ModelKind::Linear) lin_err = e.cv_error;
        else tree_err = std::min(tree_err, e.cv_error);
    }
    CHECK(tree_err < lin_err);
}

TEST_CASE("predict: memorization, stump structure, clamping, dimensions") {
    Rng rng(11);
    const std::size_t n = 50;
    const int dim = 4;
    std::vector<float> rows(n * dim);
    std::vector<float> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) rows[i * dim + j] = static_cast<float>(rng.uniform());
        y[i] = static_cast<float>(rng.uniform());
    }
    TrainOptions topts;
    topts.knn_k = 1;
    const Regressor knn = Regressor::train(ModelKind::Knn, rows, n, y, {0, 1, 2, 3}, dim, 1,
                                           topts);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> input(rows.begin() + i * dim, rows.begin() + (i + 1) * dim);
        CHECK(knn.predict(input) == doctest::Approx(y[i]).epsilon(1e-6));
    }

    const Regressor stump =
        Regressor::train(ModelKind::Stump, rows, n, y, {0, 1, 2, 3}, dim, 1);
    std::set<double> outputs;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> input(rows.begin() + i * dim, rows.begin() + (i + 1) * dim);
        outputs.insert(stump.predict(input));
    }
    CHECK(outputs.size() <= 2);

    // A clamped model never leaves [0, 1].
    std::vector<float> y_big(n, 1.3f);
    Regressor pe = Regressor::train(ModelKind::Linear, rows, n, y_big, {0, 1, 2, 3}, dim, 1);
    pe.set_clamp01(true);
    std::vector<float> input(rows.begin(), rows.begin() + dim);
    CHECK(pe.predict(input) == doctest::Approx(1.0));

    std::vector<float> wrong_dim(dim + 1, 0.0f);
    CHECK_THROWS_AS(knn.predict(wrong_dim), DimensionError);
}

TEST_CASE("regressor persistence: write/read round trip preserves predictions") {
    Rng rng(12);
    const std::size_t n = 120;
    const int dim = 6;
    std::vector<float> rows(n * dim);
    std::vector<float> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) rows[i * dim + j] = static_cast<float>(rng.uniform());
        y[i] = rows[i * dim] * 0.7f + 0.2f * static_cast<float>(rng.uniform());
    }
    for (const ModelKind kind : all_model_kinds()) {
        const Regressor model =
            Regressor::train(kind, rows, n, y, {0, 1, 2, 3, 4, 5}, dim, 42);
        std::stringstream buffer;
        model.write(buffer);
        const Regressor loaded = Regressor::read(buffer);
        CHECK(loaded.kind() == kind);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<float> input(dim);
            for (auto& v : input) v = static_cast<float>(rng.uniform());
            CHECK(loaded.predict(input) == model.predict(input));
        }
    }
}

TEST_CASE("model bundle persistence: save/load round trip") {
    Rng rng(13);
    const auto set = synthetic_samples(
        80, 5, 14, [&](std::size_t, std::vector<float>& row, float& theta, float& omega) {
            for (auto& v : row) v = static_cast<float>(rng.uniform());
            theta = row[0];
            omega = std::clamp(row[1], 0.0f, 1.0f);
        });
    LearnOptions opts;
    opts.zoo = {ModelKind::Knn, ModelKind::Linear};
    AllModels models;
    models.seed = 7;
    models.regions.push_back(train_region_models(set, opts));

    const auto dir = std::filesystem::temp_directory_path() / "sketchcbr_tests" / "models";
    std::filesystem::remove_all(dir);
    save_models(models, dir);
    const AllModels loaded = load_models(dir);
    REQUIRE(loaded.regions.size() == 1);
    CHECK(loaded.seed == models.seed);
    CHECK(loaded.regions[0].fe.kind() == models.regions[0].fe.kind());
    std::vector<float> input(5);
    for (auto& v : input) v = static_cast<float>(rng.uniform());
    CHECK(loaded.regions[0].fe.predict(input) == models.regions[0].fe.predict(input));
    CHECK(loaded.regions[0].pe.predict(input) == models.regions[0].pe.predict(input));
}
