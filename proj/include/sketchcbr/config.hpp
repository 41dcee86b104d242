#pragma once
// Pipeline configuration. Loaded from a nested key-value text file
// ("section.key = value", '#' comments); every tunable has the default the
// method prescribes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sketchcbr/learning.hpp"
#include "sketchcbr/synthesis.hpp"

namespace sketchcbr {

struct PipelineConfig {
    std::uint64_t seed = 1;
    double threshold = 0.01;  // relative fitness gain keeping the loops running
    int max_iters = 10;
    int nmi_bins = 64;
    int mrmr_bins = 8;
    int cv_folds = 10;
    int fixed_steps = 0;  // oracle loop: exact blending iterations when > 0
    int threads = 0;      // 0 = auto
    std::vector<ModelKind> zoo = all_model_kinds();
    std::string region_map;  // optional path override for dataset ingestion

    void validate() const;

    OracleOptions oracle_options() const;
    CvOptions cv_options() const;
    LearnOptions learn_options() const;
    SynthesisOptions synthesis_options() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

}  // namespace sketchcbr
