#pragma once
// Runtime sketch synthesis: the per-region retrieval/adaptation loop driven
// by the trained FE/PE models, face composition, example-based sharpening,
// and the exaggeration post-process.

#include <string>
#include <vector>

#include "sketchcbr/case_library.hpp"
#include "sketchcbr/learning.hpp"

namespace sketchcbr {

struct IterationRecord {
    int h = 0;
    std::string case_id;
    double theta_bar = 0.0;  // predicted fitness at runtime, oracle fitness in training
    double omega = 0.0;
};

struct RegionTrace {
    int region_id = 0;
    std::vector<IterationRecord> iterations;
    std::string termination;
};

struct SynthesisOptions {
    double threshold = 0.01;
    int max_iters = 10;
    int nmi_bins = 64;
    int threads = 1;
};

struct RegionCandidate {
    std::size_t case_index = 0;
    RegionPatch photo;   // carried into the input region's frame
    RegionPatch sketch;  // neutral-sketch content, same frame
    FeatureVector own_features;  // of the case's own photo region
};

/// Warps every library case's region content into the frame of the input
/// region patch and extracts the candidates' own-frame features.
std::vector<RegionCandidate> prepare_candidates(const CaseLibrary& lib, int region_id,
                                                const RegionPatch& frame);

struct RegionSynthesis {
    RegionPatch patch;    // final interim sketch patch
    RegionPatch initial;  // the h = 1 retrieval result (single-case baseline)
    RegionTrace trace;
};

RegionSynthesis synthesize_region(const RegionPatch& photo_patch,
                                  const std::vector<RegionCandidate>& candidates,
                                  const CaseLibrary& lib, const RegionModels& models,
                                  const SynthesisOptions& opts);

/// Warps each region patch from its own landmark frame onto the photo's
/// landmark layout and paints it into a white canvas; overlaps are averaged
/// with weights that grow with the distance to the region boundary.
ImageGray compose_face(const std::vector<RegionPatch>& patches,
                       const LandmarkSet& photo_landmarks, const RegionMap& map, int width,
                       int height);

struct SharpenOptions {
    int levels = 3;
    double coherence = 2.0;  // bias toward coherent matches
    int fine_window = 5;
    int coarse_window = 3;
    int gauss_radius = 3;
    double gauss_sigma = 1.0;
};

/// Example-based sharpening: multiscale image-analogy transfer trained on
/// (smoothed neutral sketch -> neutral sketch) pairs from the library.
ImageGray sharpen(const ImageGray& blurred, const CaseLibrary& lib,
                  const SharpenOptions& opts = SharpenOptions{});

struct ExaggerationWeights {
    std::vector<double> values;  // one per case, on the unit simplex
};

/// Simplex-constrained least squares: the normalized landmark layouts of the
/// library cases are combined to best reconstruct the normalized input
/// layout (projected gradient, Duchi projection).
ExaggerationWeights exaggeration_weights(const LandmarkSet& q_new, const CaseLibrary& lib);

/// Pointwise combination of the library exaggeration fields under the
/// weights above.
DisplacementField predict_exaggeration(const LandmarkSet& q_new, const CaseLibrary& lib);

/// Rebuilds a smooth field from the 67 landmark samples of vx and remaps the
/// sketch with it.
ImageGray smooth_and_apply_exaggeration(const ImageGray& sketch, const LandmarkSet& q_sketch,
                                        const DisplacementField& vx);

struct SynthesisResult {
    ImageGray sketch;                     // final exaggerated sketch
    ImageGray neutral;                    // composed + sharpened, before exaggeration
    std::vector<RegionTrace> traces;      // one per region
    std::vector<RegionPatch> region_patches;   // final per-region patches
    std::vector<RegionPatch> initial_patches;  // h = 1 baselines
    std::vector<double> weights;          // exaggeration combination weights
};

SynthesisResult synthesize_portrait(const ImageGray& photo, const LandmarkSet& landmarks,
                                    const CaseLibrary& lib, const AllModels& models,
                                    const SynthesisOptions& opts);

}  // namespace sketchcbr
