// Command-line driver: case construction, training-data generation, model
// training, synthesis, and the leave-one-out evaluation harness.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sketchcbr/case_library.hpp"
#include "sketchcbr/config.hpp"
#include "sketchcbr/kernels.hpp"
#include "sketchcbr/learning.hpp"
#include "sketchcbr/parallel.hpp"
#include "sketchcbr/report.hpp"
#include "sketchcbr/synthesis.hpp"

namespace {

using namespace sketchcbr;

void emit_error(const std::string& kind, const std::string& message) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

PipelineConfig load_config_or_default(const std::string& path) {
    PipelineConfig config;
    if (!path.empty()) config = load_config(path);
    config.validate();
    return config;
}

std::filesystem::path resolve_region_map(const std::string& flag, const PipelineConfig& config,
                                         const std::filesystem::path& manifest) {
    if (!flag.empty()) return flag;
    if (!config.region_map.empty()) return config.region_map;
    return manifest.parent_path() / "region_map.json";
}

int cmd_build_cases(const std::string& manifest, const std::string& out,
                    const std::string& region_map_flag, const std::string& style,
                    const PipelineConfig& config) {
    const CaseLibrary lib = ingest_dataset(
        manifest, resolve_region_map(region_map_flag, config, manifest), style);
    save_library(lib, out);
    std::cout << "built " << lib.size() << " cases into " << out << '\n';
    return 0;
}

int cmd_gen_train(const std::string& lib_dir, const std::string& out,
                  const PipelineConfig& config, int region) {
    const CaseLibrary lib = load_library(lib_dir);
    std::filesystem::create_directories(out);
    std::vector<int> regions;
    if (region > 0) {
        regions.push_back(region);
    } else {
        for (int r = 1; r <= kNumRegions; ++r) regions.push_back(r);
    }
    const OracleOptions opts = config.oracle_options();
    parallel_for(regions.size(), config.threads, [&](std::size_t i) {
        const SampleSet samples = generate_training_data(lib, regions[i], opts);
        save_samples(samples,
                     std::filesystem::path(out) /
                         ("region_" + std::to_string(regions[i]) + ".stsm"));
    });
    std::cout << "wrote training samples for " << regions.size() << " region(s) to " << out
              << '\n';
    return 0;
}

int cmd_train(const std::string& samples_dir, const std::string& out,
              const PipelineConfig& config) {
    std::vector<std::filesystem::path> files;
    for (int r = 1; r <= kNumRegions; ++r) {
        const auto path =
            std::filesystem::path(samples_dir) / ("region_" + std::to_string(r) + ".stsm");
        if (std::filesystem::exists(path)) files.push_back(path);
    }
    if (files.empty()) {
        throw IoError("no region_<r>.stsm sample files under " + samples_dir);
    }
    AllModels models;
    models.seed = config.seed;
    models.regions.resize(files.size());
    const LearnOptions opts = config.learn_options();
    parallel_for(files.size(), config.threads, [&](std::size_t i) {
        const SampleSet samples = load_samples(files[i]);
        models.regions[i] = train_region_models(samples, opts);
    });
    save_models(models, out);
    std::cout << "trained FE/PE models for " << files.size() << " region(s) into " << out << '\n';
    return 0;
}

int cmd_synthesize(const std::string& lib_dir, const std::string& models_dir,
                   const std::string& photo_path, const std::string& landmarks_path,
                   const std::string& out_path, const std::string& trace_path,
                   const PipelineConfig& config) {
    const CaseLibrary lib = load_library(lib_dir);
    const AllModels models = load_models(models_dir);
    const ImageGray photo = load_png(photo_path);
    const LandmarkSet landmarks = load_landmarks(landmarks_path);
    SynthesisOptions opts = config.synthesis_options();
    opts.threads = config.threads;
    const SynthesisResult result = synthesize_portrait(photo, landmarks, lib, models, opts);
    save_png(result.sketch, out_path);
    const std::string trace = trace_path.empty() ? out_path + ".trace.json" : trace_path;
    write_trace(result, lib, trace);
    std::cout << "wrote " << out_path << " and " << trace << '\n';
    return 0;
}

int cmd_evaluate(const std::string& lib_dir, const std::string& models_dir,
                 const std::string& report_path, const std::string& out_dir,
                 const PipelineConfig& config) {
    const CaseLibrary lib = load_library(lib_dir);
    const AllModels models = load_models(models_dir);
    const EvaluationReport report = evaluate_leave_one_out(lib, models, config, out_dir);
    write_report(report, report_path);
    std::cout << "evaluated " << report.cases.size() << " held-out cases; mean NMI single "
              << report.mean_single << ", multi " << report.mean_multi << '\n';
    return 0;
}

int cmd_loocv(const std::string& manifest, const std::string& report_path,
              const std::string& region_map_flag, const std::string& out_dir,
              const PipelineConfig& config) {
    const CaseLibrary lib = ingest_dataset(
        manifest, resolve_region_map(region_map_flag, config, manifest));

    AllModels models;
    models.seed = config.seed;
    models.regions.resize(kNumRegions);
    const OracleOptions oracle_opts = config.oracle_options();
    const LearnOptions learn_opts = config.learn_options();
    parallel_for(kNumRegions, config.threads, [&](std::size_t i) {
        const SampleSet samples =
            generate_training_data(lib, static_cast<int>(i) + 1, oracle_opts);
        models.regions[i] = train_region_models(samples, learn_opts);
    });

    const EvaluationReport report = evaluate_leave_one_out(lib, models, config, out_dir);
    write_report(report, report_path);
    std::cout << "leave-one-out over " << report.cases.size() << " cases; improved fraction "
              << report.improved_fraction << ", mean NMI single " << report.mean_single
              << ", multi " << report.mean_multi << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Facial sketch stylization by case-based reasoning"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Pipeline configuration file");

    auto* build = app.add_subcommand("build-cases", "Build a case library from a dataset manifest");
    std::string build_manifest, build_out, build_region_map, build_style = "default";
    build->add_option("manifest", build_manifest)->required();
    build->add_option("out", build_out)->required();
    build->add_option("--region-map", build_region_map, "Region map JSON path");
    build->add_option("--style", build_style, "Style identifier");

    auto* gen = app.add_subcommand("gen-train", "Generate oracle training samples per region");
    std::string gen_lib, gen_out;
    int gen_region = 0;
    gen->add_option("library", gen_lib)->required();
    gen->add_option("out", gen_out)->required();
    gen->add_option("--region", gen_region, "Single region id (default: all)");

    auto* train = app.add_subcommand("train", "Select and train FE/PE models per region");
    std::string train_samples, train_out;
    train->add_option("samples", train_samples)->required();
    train->add_option("out", train_out)->required();

    auto* synth = app.add_subcommand("synthesize", "Stylize one photo");
    std::string sy_lib, sy_models, sy_photo, sy_landmarks, sy_out, sy_trace;
    synth->add_option("library", sy_lib)->required();
    synth->add_option("models", sy_models)->required();
    synth->add_option("photo", sy_photo)->required();
    synth->add_option("landmarks", sy_landmarks)->required();
    synth->add_option("out", sy_out)->required();
    synth->add_option("--trace", sy_trace, "Trace JSON path (default: <out>.trace.json)");

    auto* eval = app.add_subcommand("evaluate", "Leave-one-out evaluation with trained models");
    std::string ev_lib, ev_models, ev_report, ev_out_dir;
    eval->add_option("library", ev_lib)->required();
    eval->add_option("models", ev_models)->required();
    eval->add_option("report", ev_report)->required();
    eval->add_option("--out-dir", ev_out_dir, "Directory for synthesized sketches");

    auto* loocv = app.add_subcommand("loocv", "Full leave-one-out protocol from a manifest");
    std::string lo_manifest, lo_report, lo_region_map, lo_out_dir;
    loocv->add_option("manifest", lo_manifest)->required();
    loocv->add_option("report", lo_report)->required();
    loocv->add_option("--region-map", lo_region_map, "Region map JSON path");
    loocv->add_option("--out-dir", lo_out_dir, "Directory for synthesized sketches");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const PipelineConfig config = load_config_or_default(config_path);
        if (build->parsed()) {
            return cmd_build_cases(build_manifest, build_out, build_region_map, build_style,
                                   config);
        }
        if (gen->parsed()) return cmd_gen_train(gen_lib, gen_out, config, gen_region);
        if (train->parsed()) return cmd_train(train_samples, train_out, config);
        if (synth->parsed()) {
            return cmd_synthesize(sy_lib, sy_models, sy_photo, sy_landmarks, sy_out, sy_trace,
                                  config);
        }
        if (eval->parsed()) return cmd_evaluate(ev_lib, ev_models, ev_report, ev_out_dir, config);
        if (loocv->parsed()) {
            return cmd_loocv(lo_manifest, lo_report, lo_region_map, lo_out_dir, config);
        }
    } catch (const Error& e) {
        std::string kind = "Error";
        if (dynamic_cast<const IoError*>(&e)) kind = "IoError";
        else if (dynamic_cast<const FormatError*>(&e)) kind = "FormatError";
        else if (dynamic_cast<const ValidationError*>(&e)) kind = "ValidationError";
        else if (dynamic_cast<const VersionError*>(&e)) kind = "VersionError";
        else if (dynamic_cast<const ConfigError*>(&e)) kind = "ConfigError";
        else if (dynamic_cast<const DimensionError*>(&e)) kind = "DimensionError";
        else if (dynamic_cast<const InsufficientDataError*>(&e)) kind = "InsufficientDataError";
        else if (dynamic_cast<const SolverError*>(&e)) kind = "SolverError";
        emit_error(kind, e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("InternalError", e.what());
        return 1;
    }
    return 0;
}
