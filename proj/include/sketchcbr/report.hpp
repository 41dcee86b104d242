#pragma once
// Leave-one-out evaluation harness and its JSON report.

#include <filesystem>
#include <string>
#include <vector>

#include "sketchcbr/case_library.hpp"
#include "sketchcbr/config.hpp"
#include "sketchcbr/learning.hpp"
#include "sketchcbr/synthesis.hpp"

namespace sketchcbr {

struct RegionResult {
    int region_id = 0;
    double nmi_single = 0.0;  // h = 1 retrieval baseline vs groundtruth region
    double nmi_multi = 0.0;   // full loop result vs groundtruth region
    int iterations = 0;
    std::string termination;
};

struct CaseResult {
    std::string case_id;
    std::vector<RegionResult> regions;
    double mean_single = 0.0;
    double mean_multi = 0.0;
    double face_nmi = 0.0;  // final sketch vs the artist sketch
};

struct EvaluationReport {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::string library_style;
    std::vector<CaseResult> cases;
    double mean_single = 0.0;
    double mean_multi = 0.0;
    double improved_fraction = 0.0;  // share of (case, region) pairs where multi >= single
};

/// Synthesizes every library case from the remaining cases using the given
/// models and measures per-region NMI against the held-out neutral sketch,
/// for both the single-case baseline and the full loop. When out_dir is
/// nonempty, writes the synthesized sketches there as <case_id>.png.
EvaluationReport evaluate_leave_one_out(const CaseLibrary& lib, const AllModels& models,
                                        const PipelineConfig& config,
                                        const std::filesystem::path& out_dir = {});

void write_report(const EvaluationReport& report, const std::filesystem::path& path);

/// Trace file for one synthesized portrait.
void write_trace(const SynthesisResult& result, const CaseLibrary& lib,
                 const std::filesystem::path& path);

}  // namespace sketchcbr
