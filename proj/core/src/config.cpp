#include "jointflow/config.hpp"

#include <fstream>
#include <iterator>

#include "jointflow/text_io.hpp"
#include "yaml_util.hpp"

namespace jointflow {

using detail::as;
using detail::optional_or;
using detail::reject_unknown_keys;
using detail::YamlSource;

Mismatch RunConfig::resolve_mismatch(const std::vector<ClassLabel>& labels) const {
    if (mismatch.empty()) return default_mismatch(labels.size());
    auto find = [&](const std::string& name) {
        for (const auto& l : labels) {
            if (l.name == name) return l.id;
        }
        throw Error(ErrorCode::InvalidMismatch, "mismatch names unknown class '" + name + "'");
    };
    Mismatch m(labels.size(), -1);
    for (const auto& [from, to] : mismatch) m[static_cast<std::size_t>(find(from))] = find(to);
    for (std::size_t c = 0; c < m.size(); ++c) {
        if (m[c] < 0) throw Error(ErrorCode::InvalidMismatch, "mismatch does not map class '" + labels[c].name + "'");
    }
    validate_mismatch(m, labels.size());
    return m;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.empty() || path.is_absolute() || base.empty()) return path;
    return base / path;
}

void read_learner(const YAML::Node& node, const std::string& section, LearnerConfig& learner, const YamlSource& src,
                  std::vector<double>* encoding) {
    if (encoding) {
        reject_unknown_keys(node, {"hidden", "activation", "learning_rate", "epochs", "mini_batch", "encoding"}, src,
                            section);
    } else {
        reject_unknown_keys(node, {"hidden", "activation", "learning_rate", "epochs", "mini_batch"}, src, section);
    }
    learner.hidden = optional_or<std::vector<int>>(node, "hidden", learner.hidden, src);
    if (const auto a = node["activation"]) {
        try {
            learner.activation = activation_from_string(as<std::string>(a, "activation", src));
        } catch (const Error& e) {
            throw Error(ErrorCode::Config, src.where(a) + ": key 'activation': " + e.what());
        }
    }
    learner.train.learning_rate = optional_or<double>(node, "learning_rate", learner.train.learning_rate, src);
    learner.train.epochs = optional_or<int>(node, "epochs", learner.train.epochs, src);
    if (const auto mb = node["mini_batch"]) {
        const auto size = as<long long>(mb, "mini_batch", src);
        if (size < 0) throw Error(ErrorCode::Config, src.where(mb) + ": key 'mini_batch' must be >= 0");
        learner.train.mini_batch = size == 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(size));
    }
    if (encoding) *encoding = optional_or<std::vector<double>>(node, "encoding", *encoding, src);
    for (int h : learner.hidden) {
        if (h < 1) throw Error(ErrorCode::Config, src.where(node["hidden"]) + ": key 'hidden' needs positive widths");
    }
    try {
        learner.train.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, src.where(node) + ": section '" + section + "': " + e.what());
    }
}

YAML::Node learner_node(const LearnerConfig& l) {
    YAML::Node n;
    n["hidden"] = l.hidden;
    n["activation"] = to_string(l.activation);
    n["learning_rate"] = format_double(l.train.learning_rate);
    n["epochs"] = l.train.epochs;
    n["mini_batch"] = l.train.mini_batch ? *l.train.mini_batch : std::size_t{0};
    return n;
}

YAML::Node doubles(const std::vector<double>& v) {
    YAML::Node n(YAML::NodeType::Sequence);
    for (double x : v) n.push_back(format_double(x));
    return n;
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml_text, const std::string& source_name,
                           const std::filesystem::path& base_dir) {
    const YamlSource src{source_name};
    const auto root = detail::load_yaml_string(yaml_text, src);
    RunConfig cfg;
    if (!root || root.IsNull()) return cfg;
    reject_unknown_keys(root,
                        {"paths", "generate", "split", "windowing", "sliding_window", "predictor", "classifier",
                         "fusion", "evaluate"},
                        src, "top level");

    if (const auto n = root["paths"]) {
        reject_unknown_keys(n, {"dataset_dir", "model_dir", "report_dir", "profiles"}, src, "paths");
        cfg.paths.dataset_dir = resolve(base_dir, optional_or<std::string>(n, "dataset_dir", cfg.paths.dataset_dir.string(), src));
        cfg.paths.model_dir = resolve(base_dir, optional_or<std::string>(n, "model_dir", cfg.paths.model_dir.string(), src));
        cfg.paths.report_dir = resolve(base_dir, optional_or<std::string>(n, "report_dir", cfg.paths.report_dir.string(), src));
        cfg.paths.profiles = resolve(base_dir, optional_or<std::string>(n, "profiles", cfg.paths.profiles.string(), src));
    }
    if (const auto n = root["generate"]) {
        reject_unknown_keys(n, {"duration_s", "seeds"}, src, "generate");
        cfg.generate.duration = optional_or<double>(n, "duration_s", cfg.generate.duration, src);
        cfg.generate.seeds = optional_or<std::vector<std::uint64_t>>(n, "seeds", cfg.generate.seeds, src);
        if (!(cfg.generate.duration > 0.0)) {
            throw Error(ErrorCode::Config, src.where(n["duration_s"]) + ": key 'duration_s' must be positive");
        }
        if (cfg.generate.seeds.empty()) throw Error(ErrorCode::Config, src.where(n) + ": key 'seeds' is empty");
    }
    if (const auto n = root["split"]) {
        reject_unknown_keys(n, {"boundary_s"}, src, "split");
        cfg.experiment.split_boundary = optional_or<double>(n, "boundary_s", cfg.experiment.split_boundary, src);
        if (!(cfg.experiment.split_boundary > 0.0)) {
            throw Error(ErrorCode::Config, src.where(n["boundary_s"]) + ": key 'boundary_s' must be positive");
        }
    }
    if (const auto n = root["windowing"]) {
        reject_unknown_keys(n, {"class_window_s", "pred_bin_s"}, src, "windowing");
        auto& w = cfg.experiment.windowing;
        w.class_window = optional_or<double>(n, "class_window_s", w.class_window, src);
        w.pred_bin = optional_or<double>(n, "pred_bin_s", w.pred_bin, src);
        try {
            w.ratio();
        } catch (const Error& e) {
            throw Error(ErrorCode::Config, src.where(n) + ": section 'windowing': " + e.what());
        }
    }
    if (const auto n = root["sliding_window"]) {
        reject_unknown_keys(n, {"window"}, src, "sliding_window");
        cfg.experiment.sliding.window = optional_or<int>(n, "window", cfg.experiment.sliding.window, src);
        if (cfg.experiment.sliding.window < 1) {
            throw Error(ErrorCode::Config, src.where(n["window"]) + ": key 'window' must be at least 1");
        }
    }
    if (const auto n = root["predictor"]) read_learner(n, "predictor", cfg.experiment.predictor, src, nullptr);
    if (const auto n = root["classifier"]) {
        read_learner(n, "classifier", cfg.experiment.classifier, src, &cfg.experiment.encoding);
    }
    if (const auto n = root["fusion"]) {
        reject_unknown_keys(n, {"alpha"}, src, "fusion");
        cfg.experiment.fusion.alpha = optional_or<double>(n, "alpha", cfg.experiment.fusion.alpha, src);
        if (!(cfg.experiment.fusion.alpha >= 0.0)) {
            throw Error(ErrorCode::Config, src.where(n["alpha"]) + ": key 'alpha' must be nonnegative");
        }
    }
    if (const auto n = root["evaluate"]) {
        reject_unknown_keys(n, {"alphas", "train_seed", "train_in_place", "mismatch"}, src, "evaluate");
        cfg.experiment.alphas = optional_or<std::vector<double>>(n, "alphas", cfg.experiment.alphas, src);
        try {
            validate_alphas(cfg.experiment.alphas);
        } catch (const Error& e) {
            throw Error(ErrorCode::Config, src.where(n["alphas"]) + ": key 'alphas': " + e.what());
        }
        cfg.train_seed = optional_or<std::uint64_t>(n, "train_seed", cfg.train_seed, src);
        cfg.train_in_place = optional_or<bool>(n, "train_in_place", cfg.train_in_place, src);
        cfg.mismatch = optional_or<std::map<std::string, std::string>>(n, "mismatch", cfg.mismatch, src);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text, path.string(), path.parent_path());
}

std::string to_yaml(const RunConfig& cfg) {
    YAML::Node root;
    root["paths"]["dataset_dir"] = cfg.paths.dataset_dir.string();
    root["paths"]["model_dir"] = cfg.paths.model_dir.string();
    root["paths"]["report_dir"] = cfg.paths.report_dir.string();
    root["paths"]["profiles"] = cfg.paths.profiles.string();
    root["generate"]["duration_s"] = format_double(cfg.generate.duration);
    root["generate"]["seeds"] = cfg.generate.seeds;
    root["split"]["boundary_s"] = format_double(cfg.experiment.split_boundary);
    root["windowing"]["class_window_s"] = format_double(cfg.experiment.windowing.class_window);
    root["windowing"]["pred_bin_s"] = format_double(cfg.experiment.windowing.pred_bin);
    root["sliding_window"]["window"] = cfg.experiment.sliding.window;
    root["predictor"] = learner_node(cfg.experiment.predictor);
    root["classifier"] = learner_node(cfg.experiment.classifier);
    if (!cfg.experiment.encoding.empty()) root["classifier"]["encoding"] = doubles(cfg.experiment.encoding);
    root["fusion"]["alpha"] = format_double(cfg.experiment.fusion.alpha);
    root["evaluate"]["alphas"] = doubles(cfg.experiment.alphas);
    root["evaluate"]["train_seed"] = cfg.train_seed;
    root["evaluate"]["train_in_place"] = cfg.train_in_place;
    if (!cfg.mismatch.empty()) root["evaluate"]["mismatch"] = cfg.mismatch;

    YAML::Emitter out;
    out << root;
    return std::string(out.c_str()) + "\n";
}

}  // namespace jointflow
