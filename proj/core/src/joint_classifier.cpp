#include "jointflow/joint_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "jointflow/random.hpp"
#include "jointflow/text_io.hpp"

namespace jointflow {

LabelEncoding LabelEncoding::ordinal(std::vector<ClassLabel> labels) {
    LabelEncoding enc;
    enc.numeric.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) enc.numeric.push_back(static_cast<double>(i));
    enc.labels = std::move(labels);
    return enc;
}

double LabelEncoding::value_of(int class_id) const {
    if (class_id < 0 || static_cast<std::size_t>(class_id) >= numeric.size()) {
        throw Error(ErrorCode::UnknownLabel, "class id " + std::to_string(class_id) + " is not encoded");
    }
    return numeric[static_cast<std::size_t>(class_id)];
}

void LabelEncoding::validate() const {
    if (labels.empty()) throw Error(ErrorCode::InvalidEncoding, "no classes");
    if (labels.size() != numeric.size()) {
        throw Error(ErrorCode::InvalidEncoding, std::to_string(labels.size()) + " labels but " +
                                                    std::to_string(numeric.size()) + " numeric values");
    }
    std::set<double> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].id != static_cast<int>(i)) throw Error(ErrorCode::InvalidEncoding, "label ids must be 0..n-1");
        if (!std::isfinite(numeric[i]) || !seen.insert(numeric[i]).second) {
            throw Error(ErrorCode::InvalidEncoding, "numeric values must be finite and distinct");
        }
    }
}

void FusionConfig::validate() const {
    if (!(alpha >= 0.0)) throw Error(ErrorCode::Config, "alpha must be nonnegative");
}

DistanceVector dt_vector(double x_t, const LabelEncoding& enc) {
    std::vector<double> d;
    d.reserve(enc.numeric.size());
    for (double x : enc.numeric) d.push_back(std::abs(x - x_t));
    return DistanceVector(std::move(d));
}

DistanceVector fuse(const DistanceVector& d_p, const DistanceVector& d_t, const FusionConfig& cfg) {
    if (d_p.size() != d_t.size()) {
        throw Error(ErrorCode::LengthMismatch, "D_p has " + std::to_string(d_p.size()) + " classes, D_t has " +
                                                   std::to_string(d_t.size()));
    }
    std::vector<double> d(d_p.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = d_p[i] + cfg.alpha * d_t[i];
    return DistanceVector(std::move(d));
}

std::size_t argmin(const DistanceVector& d) {
    if (d.empty()) throw Error(ErrorCode::Empty, "argmin of an empty distance vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (d[i] < d[best]) best = i;
    }
    return best;
}

ClassLabel classify(const DistanceVector& d_a, const LabelEncoding& enc) {
    const auto i = argmin(d_a);
    if (i >= enc.labels.size()) throw Error(ErrorCode::LengthMismatch, "distance vector longer than the encoding");
    return enc.labels[i];
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureVector> features) {
    FeatureScaler s;
    if (features.empty()) throw Error(ErrorCode::EmptyDataset, "no feature vectors");
    const double n = static_cast<double>(features.size());
    for (const auto& f : features) {
        const auto a = f.to_array();
        for (std::size_t k = 0; k < a.size(); ++k) s.mean[k] += a[k] / n;
    }
    for (const auto& f : features) {
        const auto a = f.to_array();
        for (std::size_t k = 0; k < a.size(); ++k) s.stddev[k] += (a[k] - s.mean[k]) * (a[k] - s.mean[k]) / n;
    }
    for (auto& sd : s.stddev) sd = sd > 1e-24 ? std::sqrt(sd) : 1.0;
    return s;
}

std::vector<double> FeatureScaler::apply(const FeatureVector& f) const {
    const auto a = f.to_array();
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = (a[k] - mean[k]) / stddev[k];
    return out;
}

double Classifier::score(const FeatureVector& f) const { return forward_scalar(net, scaler.apply(f)); }

void Classifier::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["format"] = "jointflow-classifier";
    j["version"] = 1;
    auto& labels = j["labels"] = nlohmann::json::array();
    for (std::size_t i = 0; i < encoding.size(); ++i) {
        labels.push_back({{"id", encoding.labels[i].id}, {"name", encoding.labels[i].name},
                          {"numeric", encoding.numeric[i]}});
    }
    j["feature_mean"] = scaler.mean;
    j["feature_stddev"] = scaler.stddev;
    j["network"] = to_json(net);
    auto out = open_output(path);
    out << j.dump(1) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Classifier Classifier::load(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("format").get<std::string>() != "jointflow-classifier") {
            throw Error(ErrorCode::Parse, path.string() + ": not a jointflow-classifier model");
        }
        Classifier c;
        for (const auto& l : j.at("labels")) {
            c.encoding.labels.push_back(ClassLabel{l.at("id").get<int>(), l.at("name").get<std::string>()});
            c.encoding.numeric.push_back(l.at("numeric").get<double>());
        }
        c.encoding.validate();
        c.scaler.mean = j.at("feature_mean").get<std::array<double, FeatureVector::kSize>>();
        c.scaler.stddev = j.at("feature_stddev").get<std::array<double, FeatureVector::kSize>>();
        c.net = network_from_json(j.at("network"));
        if (c.net.spec.inputs() != static_cast<int>(FeatureVector::kSize) || c.net.spec.outputs() != 1) {
            throw Error(ErrorCode::Parse, path.string() + ": classifier network has the wrong shape");
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

Classifier train_classifier(const LabeledFeatures& data, const LabelEncoding& enc, const LearnerConfig& learner,
                            std::uint64_t seed) {
    enc.validate();
    if (data.features.empty()) throw Error(ErrorCode::EmptyDataset, "no labeled feature windows");
    if (data.features.size() != data.class_ids.size()) {
        throw Error(ErrorCode::DimensionMismatch, "features and labels differ in length");
    }
    Classifier c;
    c.encoding = enc;
    c.scaler = FeatureScaler::fit(data.features);
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
    inputs.reserve(data.features.size());
    targets.reserve(data.features.size());
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        inputs.push_back(c.scaler.apply(data.features[i]));
        targets.push_back({enc.value_of(data.class_ids[i])});
    }
    auto cfg = learner.train;
    cfg.seed = mix_seed(seed, 1);
    c.net = train(init(learner.spec_for(static_cast<int>(FeatureVector::kSize)), mix_seed(seed, 0)), inputs, targets,
                  cfg)
                .net;
    return c;
}

JointEngine::JointEngine(const PredictorBank& bank, const Classifier& classifier, FusionConfig fusion)
    : bank_(&bank), classifier_(&classifier), fusion_(fusion) {
    fusion_.validate();
    classifier.encoding.validate();
    if (bank.num_classes() != classifier.encoding.size()) {
        throw Error(ErrorCode::LengthMismatch, "bank has " + std::to_string(bank.num_classes()) +
                                                   " predictors, classifier encodes " +
                                                   std::to_string(classifier.encoding.size()) + " classes");
    }
}

StepResult JointEngine::step(JointState& state, const WindowData& window, std::optional<std::size_t> truth) const {
    const auto w = static_cast<std::size_t>(bank_->sliding().window);
    const auto bins_per_window = static_cast<std::size_t>(bank_->windowing().ratio());
    if (window.raw_bins.size() != bins_per_window) {
        throw Error(ErrorCode::DimensionMismatch, "window carries " + std::to_string(window.raw_bins.size()) +
                                                      " bins, expected " + std::to_string(bins_per_window));
    }

    StepResult result;
    auto& log = result.log;
    log.window_index = window.window_index;
    log.truth = truth;
    log.x_t = classifier_->score(window.features);
    log.d_t = dt_vector(log.x_t, classifier_->encoding);

    const std::size_t active = state.decision.value_or(argmin(log.d_t));

    state.window_records.clear();
    std::vector<double> recent(w);
    for (std::size_t k = 0; k < window.raw_bins.size(); ++k) {
        const double truth_raw = window.raw_bins[k];
        const std::size_t bin = window.first_bin + k;
        if (state.history.size() == w) {
            std::copy(state.history.begin(), state.history.end(), recent.begin());
            auto preds = bank_->predict_all(recent);
            result.active.push_back(ActivePrediction{bin, active, preds[active], truth_raw});
            state.running_max = std::max(state.running_max, truth_raw);
            const double norm = std::max(state.running_max, 1.0);
            for (auto& p : preds) p /= norm;
            state.window_records.push_back(make_record(bin, std::move(preds), truth_raw / norm));
        } else {
            state.running_max = std::max(state.running_max, truth_raw);
        }
        state.history.push_back(truth_raw);
        if (state.history.size() > w) state.history.pop_front();
    }

    if (state.window_records.size() == bins_per_window) {
        log.d_p = dp_vector(state.window_records);
        log.d_a = fuse(log.d_p, log.d_t, fusion_);
        log.decision = argmin(log.d_a);
    } else {
        log.decision = argmin(log.d_t);
    }

    state.decision = log.decision;
    state.last_dt = log.d_t;
    state.last_dp = log.d_p;
    state.last_da = log.d_a;
    return result;
}

std::vector<WindowData> make_windows(const FlowTrace& trace, const WindowingConfig& cfg) {
    const auto r = static_cast<std::size_t>(cfg.ratio());
    const auto features = extract_features(trace, cfg);
    const auto series = extract_series(trace, cfg);
    std::vector<WindowData> out;
    out.reserve(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        WindowData wd;
        wd.window_index = k;
        wd.first_bin = k * r;
        wd.features = features[k];
        wd.raw_bins.assign(series.values.begin() + static_cast<std::ptrdiff_t>(k * r),
                           series.values.begin() + static_cast<std::ptrdiff_t>((k + 1) * r));
        out.push_back(std::move(wd));
    }
    return out;
}

std::vector<StepResult> JointEngine::run(const FlowTrace& trace) const {
    JointState state;
    std::vector<StepResult> out;
    std::optional<std::size_t> truth;
    if (trace.label.id >= 0 && static_cast<std::size_t>(trace.label.id) < classifier_->encoding.size()) {
        truth = static_cast<std::size_t>(trace.label.id);
    }
    for (const auto& window : make_windows(trace, bank_->windowing())) out.push_back(step(state, window, truth));
    return out;
}

void write_decision_log(std::span<const WindowLog> logs, const LabelEncoding& enc, const std::filesystem::path& path) {
    const std::size_t num_classes = enc.size();
    auto out = open_output(path);
    out << "window_index,x_t";
    for (const char* prefix : {"dp_", "dt_", "da_"}) {
        for (std::size_t c = 0; c < num_classes; ++c) out << ',' << prefix << c;
    }
    out << ",decision,truth\n";
    auto put = [&](const DistanceVector& d) {
        for (std::size_t c = 0; c < num_classes; ++c) out << ',' << (d.empty() ? "" : format_double(d[c]));
    };
    for (const auto& log : logs) {
        out << log.window_index << ',' << format_double(log.x_t);
        put(log.d_p);
        put(log.d_t);
        put(log.d_a);
        out << ',' << enc.labels.at(log.decision).name << ','
            << (log.truth ? enc.labels.at(*log.truth).name : std::string()) << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace jointflow
