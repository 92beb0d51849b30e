#include "jointflow/predictor_bank.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "jointflow/random.hpp"
#include "jointflow/text_io.hpp"

namespace jointflow {

void SlidingWindowConfig::validate() const {
    if (window < 1) throw Error(ErrorCode::Config, "sliding window must be at least 1 bin");
}

NetSpec LearnerConfig::spec_for(int inputs) const {
    NetSpec spec;
    spec.activation = activation;
    spec.layer_sizes.push_back(inputs);
    spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
    spec.layer_sizes.push_back(1);
    spec.validate();
    return spec;
}

WindowedDataset window_dataset(const PredSeries& series, const SlidingWindowConfig& cfg) {
    cfg.validate();
    const auto w = static_cast<std::size_t>(cfg.window);
    if (series.size() < w + 1) {
        throw Error(ErrorCode::SeriesTooShort, "series of " + std::to_string(series.size()) +
                                                   " bins is too short for a window of " + std::to_string(w));
    }
    WindowedDataset out;
    const std::size_t pairs = series.size() - w;
    out.inputs.reserve(pairs);
    out.targets.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        out.inputs.emplace_back(series.values.begin() + static_cast<std::ptrdiff_t>(i),
                                series.values.begin() + static_cast<std::ptrdiff_t>(i + w));
        out.targets.push_back({series.values[i + w]});
    }
    return out;
}

void append(WindowedDataset& into, const WindowedDataset& more) {
    into.inputs.insert(into.inputs.end(), more.inputs.begin(), more.inputs.end());
    into.targets.insert(into.targets.end(), more.targets.begin(), more.targets.end());
}

double fit_scale(std::span<const PredSeries> raw_series) {
    double scale = 0.0;
    for (const auto& s : raw_series) {
        for (double v : s.values) scale = std::max(scale, std::abs(v * s.scale));
    }
    if (!(scale > 0.0)) throw Error(ErrorCode::ZeroScale, "training series are all zero");
    return scale;
}

WindowedDataset windowed_pairs(std::span<const PredSeries> raw_series, double scale, const SlidingWindowConfig& cfg) {
    WindowedDataset out;
    for (const auto& s : raw_series) {
        if (s.size() < static_cast<std::size_t>(cfg.window) + 1) continue;
        append(out, window_dataset(normalize(s, NormalizeMode::MaxAbs, scale), cfg));
    }
    if (out.size() == 0) {
        throw Error(ErrorCode::SeriesTooShort,
                    "no training series is longer than the window of " + std::to_string(cfg.window) + " bins");
    }
    return out;
}

double ClassPredictor::predict_raw(std::span<const double> recent_raw) const {
    std::vector<double> input(recent_raw.size());
    for (std::size_t i = 0; i < input.size(); ++i) input[i] = recent_raw[i] / scale;
    return forward_scalar(net, input) * scale;
}

ClassPredictor fit_predictor(const ClassLabel& label, const WindowedDataset& data, double scale,
                             const LearnerConfig& learner, std::uint64_t seed) {
    if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "no training pairs for '" + label.name + "'");
    const int inputs = static_cast<int>(data.inputs.front().size());
    auto cfg = learner.train;
    cfg.seed = mix_seed(seed, 1);
    auto result = train(init(learner.spec_for(inputs), mix_seed(seed, 0)), data.inputs, data.targets, cfg);
    return ClassPredictor{label, std::move(result.net), scale, result.loss_history.back()};
}

std::vector<double> rolling_predictions(const ClassPredictor& predictor, std::span<const double> raw, int window) {
    const auto w = static_cast<std::size_t>(window);
    std::vector<double> out;
    if (raw.size() <= w) return out;
    out.reserve(raw.size() - w);
    for (std::size_t b = w; b < raw.size(); ++b) out.push_back(predictor.predict_raw(raw.subspan(b - w, w)));
    return out;
}

PredictorBank::PredictorBank(std::vector<ClassPredictor> predictors, SlidingWindowConfig sliding,
                             WindowingConfig windowing)
    : predictors_(std::move(predictors)), sliding_(sliding), windowing_(windowing) {
    for (std::size_t i = 0; i < predictors_.size(); ++i) {
        if (predictors_[i].label.id != static_cast<int>(i)) {
            throw Error(ErrorCode::UnknownLabel, "predictors must be ordered by class id");
        }
    }
}

std::vector<double> PredictorBank::predict_all(std::span<const double> recent_raw) const {
    if (recent_raw.size() != static_cast<std::size_t>(sliding_.window)) {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(sliding_.window) + " recent bins, got " +
                                                      std::to_string(recent_raw.size()));
    }
    std::vector<double> out;
    out.reserve(predictors_.size());
    for (const auto& p : predictors_) out.push_back(p.predict_raw(recent_raw));
    return out;
}

void PredictorBank::save(const std::filesystem::path& dir) const {
    nlohmann::json manifest;
    manifest["format"] = "jointflow-bank";
    manifest["version"] = 1;
    manifest["window"] = sliding_.window;
    manifest["class_window"] = windowing_.class_window;
    manifest["pred_bin"] = windowing_.pred_bin;
    auto& classes = manifest["classes"] = nlohmann::json::array();
    for (const auto& p : predictors_) {
        const auto file = "predictor_" + p.label.name + ".json";
        save_network(p.net, dir / file);
        classes.push_back({{"id", p.label.id}, {"name", p.label.name}, {"file", file}, {"scale", p.scale},
                           {"final_loss", p.final_loss}});
    }
    auto out = open_output(dir / "bank_manifest.json");
    out << manifest.dump(1) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + (dir / "bank_manifest.json").string());
}

PredictorBank PredictorBank::load(const std::filesystem::path& dir) {
    const auto path = dir / "bank_manifest.json";
    auto in = open_input(path);
    try {
        const auto manifest = nlohmann::json::parse(in);
        if (manifest.at("format").get<std::string>() != "jointflow-bank") {
            throw Error(ErrorCode::Parse, path.string() + ": not a jointflow-bank manifest");
        }
        SlidingWindowConfig sliding{manifest.at("window").get<int>()};
        WindowingConfig windowing{manifest.at("class_window").get<double>(), manifest.at("pred_bin").get<double>()};
        std::vector<ClassPredictor> predictors;
        for (const auto& c : manifest.at("classes")) {
            ClassPredictor p;
            p.label = ClassLabel{c.at("id").get<int>(), c.at("name").get<std::string>()};
            p.scale = c.at("scale").get<double>();
            p.final_loss = c.value("final_loss", 0.0);
            p.net = load_network(dir / c.at("file").get<std::string>());
            if (p.net.spec.inputs() != sliding.window || p.net.spec.outputs() != 1) {
                throw Error(ErrorCode::Parse, "predictor '" + p.label.name + "' does not match window " +
                                                  std::to_string(sliding.window));
            }
            predictors.push_back(std::move(p));
        }
        return PredictorBank(std::move(predictors), sliding, windowing);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

PredictorBank train_bank(const std::vector<ClassSeries>& per_class, const std::vector<ClassLabel>& universe,
                         const SlidingWindowConfig& sliding, const WindowingConfig& windowing,
                         const LearnerConfig& learner, std::uint64_t seed) {
    sliding.validate();
    std::vector<ClassPredictor> predictors;
    for (const auto& label : universe) {
        const auto it = std::find_if(per_class.begin(), per_class.end(),
                                     [&](const ClassSeries& cs) { return cs.label == label; });
        if (it == per_class.end() || it->series.empty()) {
            throw Error(ErrorCode::MissingClassData, "no training data for class '" + label.name + "'");
        }
        try {
            const double scale = fit_scale(it->series);
            const auto data = windowed_pairs(it->series, scale, sliding);
            predictors.push_back(fit_predictor(label, data, scale, learner, mix_seed(seed, static_cast<std::uint64_t>(label.id))));
        } catch (const Error& e) {
            throw Error(e.code(), "class '" + label.name + "': " + e.what());
        }
    }
    return PredictorBank(std::move(predictors), sliding, windowing);
}

double rmse(std::span<const double> predictions, std::span<const double> truths) {
    if (predictions.size() != truths.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                                   std::to_string(truths.size()) + " truths");
    }
    if (predictions.empty()) throw Error(ErrorCode::Empty, "rmse of an empty sequence");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truths[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

PredictionRecord make_record(std::size_t bin, std::vector<double> predicted, double truth) {
    PredictionRecord r;
    r.bin = bin;
    r.truth = truth;
    r.abs_error.reserve(predicted.size());
    for (double p : predicted) r.abs_error.push_back(std::abs(p - truth));
    r.predicted = std::move(predicted);
    return r;
}

DistanceVector dp_vector(std::span<const PredictionRecord> records) {
    if (records.empty()) throw Error(ErrorCode::EmptyWindow, "no prediction records in the window");
    const std::size_t n = records.front().abs_error.size();
    std::vector<double> sum(n, 0.0);
    for (const auto& r : records) {
        if (r.abs_error.size() != n) throw Error(ErrorCode::LengthMismatch, "records cover different class sets");
        for (std::size_t c = 0; c < n; ++c) sum[c] += r.abs_error[c];
    }
    for (auto& s : sum) s /= static_cast<double>(records.size());
    return DistanceVector(std::move(sum));
}

}  // namespace jointflow
