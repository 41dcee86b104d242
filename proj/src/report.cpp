#include "sketchcbr/report.hpp"

#include <fstream>

#include <json.hpp>

#include "sketchcbr/metrics.hpp"
#include "sketchcbr/parallel.hpp"
#include "region_ops.hpp"

namespace sketchcbr {

using nlohmann::json;

namespace {

CaseLibrary library_without(const CaseLibrary& lib, std::size_t skip) {
    CaseLibrary sub;
    sub.style_id = lib.style_id;
    sub.width = lib.width;
    sub.height = lib.height;
    sub.region_map = lib.region_map;
    sub.cases.reserve(lib.size() - 1);
    for (std::size_t i = 0; i < lib.size(); ++i) {
        if (i != skip) sub.cases.push_back(lib.cases[i]);
    }
    return sub;
}

}  // namespace

EvaluationReport evaluate_leave_one_out(const CaseLibrary& lib, const AllModels& models,
                                        const PipelineConfig& config,
                                        const std::filesystem::path& out_dir) {
    if (lib.size() < 2) {
        throw InsufficientDataError("leave-one-out needs at least 2 library cases");
    }
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    EvaluationReport report;
    report.seed = config.seed;
    report.library_style = lib.style_id;
    report.cases.resize(lib.size());

    SynthesisOptions synth_opts = config.synthesis_options();
    synth_opts.threads = 1;  // parallelism lives at the held-out-case level

    parallel_for(lib.size(), config.threads, [&](std::size_t x) {
        const Case& held_out = lib.cases[x];
        const CaseLibrary sub = library_without(lib, x);
        const SynthesisResult synth =
            synthesize_portrait(held_out.photo, held_out.photo_landmarks, sub, models, synth_opts);

        CaseResult& row = report.cases[x];
        row.case_id = held_out.id;
        double sum_single = 0.0, sum_multi = 0.0;
        for (int r = 1; r <= kNumRegions; ++r) {
            const CaseRegionViews gt = case_region_views(held_out, lib.region_map, r);
            RegionResult rr;
            rr.region_id = r;
            rr.nmi_single =
                nmi_patches(synth.initial_patches[r - 1], gt.neutral, config.nmi_bins);
            rr.nmi_multi = nmi_patches(synth.region_patches[r - 1], gt.neutral, config.nmi_bins);
            const RegionTrace& trace = synth.traces[r - 1];
            rr.iterations = static_cast<int>(trace.iterations.size());
            rr.termination = trace.termination;
            sum_single += rr.nmi_single;
            sum_multi += rr.nmi_multi;
            row.regions.push_back(std::move(rr));
        }
        row.mean_single = sum_single / kNumRegions;
        row.mean_multi = sum_multi / kNumRegions;
        row.face_nmi = nmi(synth.sketch, held_out.sketch, config.nmi_bins);

        if (!out_dir.empty()) {
            save_png(synth.sketch, out_dir / (held_out.id + ".png"));
        }
    });

    double sum_single = 0.0, sum_multi = 0.0;
    std::size_t improved = 0, total = 0;
    for (const CaseResult& row : report.cases) {
        for (const RegionResult& rr : row.regions) {
            sum_single += rr.nmi_single;
            sum_multi += rr.nmi_multi;
            if (rr.nmi_multi >= rr.nmi_single) ++improved;
            ++total;
        }
    }
    report.mean_single = sum_single / static_cast<double>(total);
    report.mean_multi = sum_multi / static_cast<double>(total);
    report.improved_fraction = static_cast<double>(improved) / static_cast<double>(total);
    return report;
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
    json j;
    j["schema_version"] = report.schema_version;
    j["seed"] = report.seed;
    j["library_style"] = report.library_style;
    j["summary"] = {{"mean_nmi_single", report.mean_single},
                    {"mean_nmi_multi", report.mean_multi},
                    {"improved_fraction", report.improved_fraction},
                    {"cases", report.cases.size()}};
    json rows = json::array();
    for (const CaseResult& row : report.cases) {
        json regions = json::array();
        for (const RegionResult& rr : row.regions) {
            regions.push_back({{"region", rr.region_id},
                               {"nmi_single", rr.nmi_single},
                               {"nmi_multi", rr.nmi_multi},
                               {"iterations", rr.iterations},
                               {"termination", rr.termination}});
        }
        rows.push_back({{"id", row.case_id},
                        {"regions", regions},
                        {"mean_nmi_single", row.mean_single},
                        {"mean_nmi_multi", row.mean_multi},
                        {"face_nmi", row.face_nmi}});
    }
    j["cases"] = rows;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << j.dump(2) << '\n';
}

void write_trace(const SynthesisResult& result, const CaseLibrary& lib,
                 const std::filesystem::path& path) {
    json j;
    j["schema_version"] = 1;
    j["library_style"] = lib.style_id;
    json regions = json::array();
    for (const RegionTrace& trace : result.traces) {
        json iters = json::array();
        for (const IterationRecord& it : trace.iterations) {
            iters.push_back({{"h", it.h},
                             {"case", it.case_id},
                             {"theta_bar", it.theta_bar},
                             {"omega", it.omega}});
        }
        regions.push_back({{"region", trace.region_id},
                           {"iterations", iters},
                           {"termination", trace.termination}});
    }
    j["regions"] = regions;
    json weights = json::array();
    for (std::size_t i = 0; i < result.weights.size(); ++i) {
        weights.push_back({{"case", lib.cases[i].id}, {"weight", result.weights[i]}});
    }
    j["exaggeration_weights"] = weights;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace sketchcbr
