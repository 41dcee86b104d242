#include "sketchcbr/config.hpp"

#include <fstream>
#include <sstream>

namespace sketchcbr {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<ModelKind> parse_zoo(const std::string& value) {
    std::vector<ModelKind> zoo;
    std::stringstream ss(value);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (!token.empty()) zoo.push_back(model_from_name(token));
    }
    if (zoo.empty()) throw ConfigError("learning.zoo lists no models");
    return zoo;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::stringstream ss(value);
    T out{};
    ss >> out;
    if (ss.fail() || !trim(value.substr(static_cast<std::size_t>(ss.tellg()) == std::string::npos
                                            ? value.size()
                                            : static_cast<std::size_t>(ss.tellg())))
                          .empty()) {
        throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
    }
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(threshold > 0.0)) throw ConfigError("synthesis.threshold must be > 0");
    if (max_iters < 1) throw ConfigError("synthesis.max_iters must be >= 1");
    if (nmi_bins < 2 || nmi_bins > 256) throw ConfigError("metrics.nmi_bins must be in [2, 256]");
    if (mrmr_bins < 2 || mrmr_bins > 8) throw ConfigError("learning.mrmr_bins must be in [2, 8]");
    if (cv_folds < 2) throw ConfigError("learning.cv_folds must be >= 2");
    if (fixed_steps < 0) throw ConfigError("training.fixed_steps must be >= 0");
    if (threads < 0) throw ConfigError("runtime.threads must be >= 0");
    if (zoo.empty()) throw ConfigError("learning.zoo lists no models");
}

OracleOptions PipelineConfig::oracle_options() const {
    OracleOptions opts;
    opts.seed = seed;
    opts.threshold = threshold;
    opts.max_steps = max_iters;
    opts.fixed_steps = fixed_steps;
    opts.folds = cv_folds;
    opts.nmi_bins = nmi_bins;
    return opts;
}

CvOptions PipelineConfig::cv_options() const {
    CvOptions opts;
    opts.folds = cv_folds;
    opts.seed = seed;
    opts.mrmr_bins = mrmr_bins;
    return opts;
}

LearnOptions PipelineConfig::learn_options() const {
    LearnOptions opts;
    opts.zoo = zoo;
    opts.cv = cv_options();
    return opts;
}

SynthesisOptions PipelineConfig::synthesis_options() const {
    SynthesisOptions opts;
    opts.threshold = threshold;
    opts.max_iters = max_iters;
    opts.nmi_bins = nmi_bins;
    opts.threads = threads;
    return opts;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    PipelineConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "seed") {
            config.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "synthesis.threshold") {
            config.threshold = parse_number<double>(key, value);
        } else if (key == "synthesis.max_iters") {
            config.max_iters = parse_number<int>(key, value);
        } else if (key == "metrics.nmi_bins") {
            config.nmi_bins = parse_number<int>(key, value);
        } else if (key == "learning.mrmr_bins") {
            config.mrmr_bins = parse_number<int>(key, value);
        } else if (key == "learning.cv_folds") {
            config.cv_folds = parse_number<int>(key, value);
        } else if (key == "learning.zoo") {
            config.zoo = parse_zoo(value);
        } else if (key == "training.fixed_steps") {
            config.fixed_steps = parse_number<int>(key, value);
        } else if (key == "runtime.threads") {
            config.threads = parse_number<int>(key, value);
        } else if (key == "paths.region_map") {
            config.region_map = value;
        } else {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": unknown config key '" + key + "'");
        }
    }
    config.validate();
    return config;
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path.string());
    out << "seed = " << config.seed << '\n';
    out << "synthesis.threshold = " << config.threshold << '\n';
    out << "synthesis.max_iters = " << config.max_iters << '\n';
    out << "metrics.nmi_bins = " << config.nmi_bins << '\n';
    out << "learning.mrmr_bins = " << config.mrmr_bins << '\n';
    out << "learning.cv_folds = " << config.cv_folds << '\n';
    out << "learning.zoo = ";
    for (std::size_t i = 0; i < config.zoo.size(); ++i) {
        out << (i ? "," : "") << model_name(config.zoo[i]);
    }
    out << '\n';
    out << "training.fixed_steps = " << config.fixed_steps << '\n';
    out << "runtime.threads = " << config.threads << '\n';
    if (!config.region_map.empty()) out << "paths.region_map = " << config.region_map << '\n';
}

}  // namespace sketchcbr
