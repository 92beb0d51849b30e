#include "jointflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "jointflow/random.hpp"
#include "jointflow/text_io.hpp"

namespace jointflow {

ExperimentConfig::ExperimentConfig() {
    predictor.hidden = {16};
    predictor.activation = Activation::Tanh;
    predictor.train.learning_rate = 0.1;
    predictor.train.epochs = 400;
    predictor.train.mini_batch = 32;
    classifier.hidden = {16};
    classifier.activation = Activation::Tanh;
    classifier.train.learning_rate = 0.05;
    classifier.train.epochs = 300;
    classifier.train.mini_batch = 32;
}

void ExperimentConfig::validate() const {
    windowing.ratio();
    sliding.validate();
    predictor.train.validate();
    classifier.train.validate();
    fusion.validate();
    validate_alphas(alphas);
    if (!(split_boundary > 0.0)) throw Error(ErrorCode::Config, "split boundary must be positive");
}

char to_char(Scenario s) {
    switch (s) {
        case Scenario::A: return 'A';
        case Scenario::B: return 'B';
        case Scenario::C: return 'C';
    }
    return '?';
}

Mismatch default_mismatch(std::size_t num_classes) {
    Mismatch m(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        m[c] = static_cast<int>((c + num_classes - 1) % num_classes);
    }
    return m;
}

void validate_mismatch(const Mismatch& mismatch, std::size_t num_classes) {
    if (mismatch.size() != num_classes) {
        throw Error(ErrorCode::InvalidMismatch, "mismatch must map all " + std::to_string(num_classes) + " classes");
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (mismatch[c] < 0 || static_cast<std::size_t>(mismatch[c]) >= num_classes) {
            throw Error(ErrorCode::InvalidMismatch, "class " + std::to_string(c) + " maps outside the label set");
        }
        if (static_cast<std::size_t>(mismatch[c]) == c) {
            throw Error(ErrorCode::InvalidMismatch, "class " + std::to_string(c) + " maps to itself");
        }
    }
}

void validate_alphas(const std::vector<double>& alphas) {
    if (alphas.empty()) throw Error(ErrorCode::InvalidAlphas, "alpha list is empty");
    if (alphas.front() != 0.0) throw Error(ErrorCode::InvalidAlphas, "alpha list must start at 0");
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        if (!(alphas[i] > alphas[i - 1])) {
            throw Error(ErrorCode::InvalidAlphas, "alphas must be strictly ascending without duplicates");
        }
    }
}

Experiment::Experiment(LabeledDataset dataset, ExperimentConfig cfg, std::uint64_t seed)
    : dataset_(std::move(dataset)), cfg_(std::move(cfg)), seed_(seed) {
    require_valid(dataset_);
    cfg_.validate();
    if (dataset_.labels.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no classes");
    if (!cfg_.encoding.empty() && cfg_.encoding.size() != dataset_.labels.size()) {
        throw Error(ErrorCode::InvalidEncoding, "encoding lists " + std::to_string(cfg_.encoding.size()) +
                                                    " values for " + std::to_string(dataset_.labels.size()) +
                                                    " classes");
    }
    for (const auto& label : dataset_.labels) train_series_.push_back(ClassSeries{label, {}});
    for (const auto& trace : dataset_.traces) {
        auto [train, test] = split_by_time(trace, cfg_.split_boundary);
        train_series_[static_cast<std::size_t>(trace.label.id)].series.push_back(
            extract_series(train, cfg_.windowing));
        test_series_.push_back(extract_series(test, cfg_.windowing));
        train_.push_back(std::move(train));
        test_.push_back(std::move(test));
    }
}

LabelEncoding Experiment::encoding() const {
    auto enc = LabelEncoding::ordinal(dataset_.labels);
    if (!cfg_.encoding.empty()) enc.numeric = cfg_.encoding;
    enc.validate();
    return enc;
}

const PredictorBank& Experiment::bank() {
    if (!bank_) {
        bank_ = train_bank(train_series_, dataset_.labels, cfg_.sliding, cfg_.windowing, cfg_.predictor,
                           mix_seed(seed_, 0xA));
    }
    return *bank_;
}

const Classifier& Experiment::classifier() {
    if (!classifier_) {
        LabeledFeatures data;
        for (const auto& trace : train_) {
            for (const auto& f : extract_features(trace, cfg_.windowing)) {
                data.features.push_back(f);
                data.class_ids.push_back(trace.label.id);
            }
        }
        classifier_ = train_classifier(data, encoding(), cfg_.classifier, mix_seed(seed_, 0xD));
    }
    return *classifier_;
}

void Experiment::use_models(PredictorBank bank, Classifier classifier) {
    if (bank.num_classes() != dataset_.labels.size() || classifier.encoding.size() != dataset_.labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "models and dataset disagree on the number of classes");
    }
    for (std::size_t c = 0; c < dataset_.labels.size(); ++c) {
        if (bank.predictor(c).label != dataset_.labels[c] || classifier.encoding.labels[c] != dataset_.labels[c]) {
            throw Error(ErrorCode::UnknownLabel, "models and dataset disagree on class " + std::to_string(c));
        }
    }
    if (bank.sliding().window != cfg_.sliding.window) {
        throw Error(ErrorCode::Config, "saved bank uses window " + std::to_string(bank.sliding().window) +
                                           ", config says " + std::to_string(cfg_.sliding.window));
    }
    bank_ = std::move(bank);
    classifier_ = std::move(classifier);
}

namespace {

std::size_t pair_count(const ClassSeries& cs, int window) {
    std::size_t n = 0;
    for (const auto& s : cs.series) {
        if (s.size() > static_cast<std::size_t>(window)) n += s.size() - static_cast<std::size_t>(window);
    }
    return n;
}

}  // namespace

ScenarioResult Experiment::evaluate(Scenario scenario, const std::vector<const ClassPredictor*>& by_true_class,
                                    std::size_t training_pairs) const {
    const auto& bank = *bank_;
    const std::size_t n = dataset_.labels.size();
    const int w = cfg_.sliding.window;
    ScenarioResult result;
    result.scenario = scenario;
    result.training_pairs = training_pairs;

    std::vector<double> sum_sq(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    double total_sq = 0.0;
    std::size_t total = 0;
    for (std::size_t f = 0; f < test_.size(); ++f) {
        const auto c = static_cast<std::size_t>(test_[f].label.id);
        const auto& predictor = *by_true_class[c];
        const double scale = bank.predictor(c).scale;
        const auto& raw = test_series_[f].values;
        const auto preds = rolling_predictions(predictor, raw, w);
        for (std::size_t k = 0; k < preds.size(); ++k) {
            const std::size_t bin = k + static_cast<std::size_t>(w);
            ScenarioPoint p{f, bin, static_cast<int>(c), predictor.label.id, preds[k] / scale, raw[bin] / scale};
            const double d = p.predicted - p.truth;
            sum_sq[c] += d * d;
            ++count[c];
            total_sq += d * d;
            ++total;
            result.points.push_back(p);
        }
    }
    result.per_class_rmse.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        result.per_class_rmse[c] = count[c] ? std::sqrt(sum_sq[c] / static_cast<double>(count[c]))
                                            : std::numeric_limits<double>::quiet_NaN();
    }
    if (total == 0) throw Error(ErrorCode::SeriesTooShort, "no test flow is longer than the sliding window");
    result.overall_rmse = std::sqrt(total_sq / static_cast<double>(total));
    return result;
}

ScenarioResult Experiment::run_scenario_a() {
    const auto& b = bank();
    std::vector<const ClassPredictor*> by_class;
    std::size_t pairs = 0;
    for (std::size_t c = 0; c < b.num_classes(); ++c) {
        by_class.push_back(&b.predictor(c));
        pairs += pair_count(train_series_[c], cfg_.sliding.window);
    }
    return evaluate(Scenario::A, by_class, pairs / b.num_classes());
}

ScenarioResult Experiment::run_scenario_b(const Mismatch& mismatch) {
    const auto& b = bank();
    validate_mismatch(mismatch, b.num_classes());
    std::vector<const ClassPredictor*> by_class;
    std::size_t pairs = 0;
    for (std::size_t c = 0; c < b.num_classes(); ++c) {
        by_class.push_back(&b.predictor(static_cast<std::size_t>(mismatch[c])));
        pairs += pair_count(train_series_[c], cfg_.sliding.window);
    }
    return evaluate(Scenario::B, by_class, pairs / b.num_classes());
}

WindowedDataset Experiment::pooled_pairs(double pooled_scale) const {
    const std::size_t n = train_series_.size();
    std::size_t total = 0;
    for (const auto& cs : train_series_) total += pair_count(cs, cfg_.sliding.window);
    const std::size_t target = total / n;

    WindowedDataset pooled;
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t quota = target / n + (c < target % n ? 1 : 0);
        const auto pairs = windowed_pairs(train_series_[c].series, pooled_scale, cfg_.sliding);
        const std::size_t take = std::min(quota, pairs.size());
        pooled.inputs.insert(pooled.inputs.end(), pairs.inputs.begin(),
                             pairs.inputs.begin() + static_cast<std::ptrdiff_t>(take));
        pooled.targets.insert(pooled.targets.end(), pairs.targets.begin(),
                              pairs.targets.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return pooled;
}

ScenarioResult Experiment::run_scenario_c() {
    bank();
    std::vector<PredSeries> all;
    for (const auto& cs : train_series_) all.insert(all.end(), cs.series.begin(), cs.series.end());
    const double scale = fit_scale(all);
    const auto pooled = pooled_pairs(scale);
    const auto predictor =
        fit_predictor(ClassLabel{-1, "pooled"}, pooled, scale, cfg_.predictor, mix_seed(seed_, 0xC));
    const std::vector<const ClassPredictor*> by_class(dataset_.labels.size(), &predictor);
    return evaluate(Scenario::C, by_class, pooled.size());
}

AlphaSweepResult Experiment::alpha_sweep(const std::vector<double>& alphas) {
    validate_alphas(alphas);
    const auto& b = bank();
    const auto& clf = classifier();
    const std::size_t n = dataset_.labels.size();
    AlphaSweepResult result;
    result.alphas = alphas;
    result.seed = seed_;

    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const JointEngine engine(b, clf, FusionConfig{alphas[ai]});
        std::size_t windows = 0, correct = 0, flows = 0, flows_correct = 0, dt_correct = 0;
        for (const auto& trace : test_) {
            const auto truth = static_cast<std::size_t>(trace.label.id);
            const auto steps = engine.run(trace);
            if (steps.empty()) continue;
            std::vector<std::size_t> votes(n, 0);
            for (const auto& s : steps) {
                ++windows;
                if (s.log.decision == truth) ++correct;
                if (argmin(s.log.d_t) == truth) ++dt_correct;
                ++votes[s.log.decision];
            }
            ++flows;
            const auto majority = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
            if (majority == truth) ++flows_correct;
        }
        if (windows == 0) throw Error(ErrorCode::EmptyDataset, "no complete classification window in the test split");
        result.window_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(windows));
        result.flow_majority_accuracy.push_back(static_cast<double>(flows_correct) / static_cast<double>(flows));
        if (ai == 0) result.dt_only_accuracy = static_cast<double>(dt_correct) / static_cast<double>(windows);
    }
    return result;
}

std::vector<std::vector<StepResult>> Experiment::run_joint() {
    const JointEngine engine(bank(), classifier(), cfg_.fusion);
    std::vector<std::vector<StepResult>> out;
    out.reserve(test_.size());
    for (const auto& trace : test_) out.push_back(engine.run(trace));
    return out;
}

LabeledDataset generate_dataset(const std::vector<ClassProfile>& profiles, double duration, std::uint64_t seed) {
    LabeledDataset ds;
    for (const auto& p : profiles) {
        ds.labels.push_back(p.label);
        ds.traces.push_back(generate_trace(p, duration, mix_seed(seed, static_cast<std::uint64_t>(p.label.id))));
    }
    return ds;
}

std::vector<ReplicateResult> run_replicates(const std::vector<std::pair<std::uint64_t, LabeledDataset>>& datasets,
                                            const ExperimentConfig& cfg, std::uint64_t train_seed,
                                            const ReplicateOptions& options) {
    if ((options.bank == nullptr) != (options.classifier == nullptr)) {
        throw Error(ErrorCode::Config, "a saved predictor bank needs a saved classifier and vice versa");
    }
    auto run_one = [&](std::size_t i) {
        const auto& [data_seed, dataset] = datasets[i];
        Experiment exp(dataset, cfg, mix_seed(train_seed, data_seed));
        if (options.bank) exp.use_models(*options.bank, *options.classifier);
        ReplicateResult r;
        r.seed = data_seed;
        if (options.scenarios) {
            r.a = exp.run_scenario_a();
            r.b = exp.run_scenario_b(options.mismatch.value_or(default_mismatch(dataset.labels.size())));
            r.c = exp.run_scenario_c();
        }
        if (options.sweep) r.sweep = exp.alpha_sweep(cfg.alphas);
        return r;
    };

    const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::vector<ReplicateResult> out(datasets.size());
    for (std::size_t start = 0; start < datasets.size(); start += workers) {
        const std::size_t stop = std::min(start + workers, datasets.size());
        if (stop - start == 1) {
            out[start] = run_one(start);
            continue;
        }
        std::vector<std::future<ReplicateResult>> batch;
        for (std::size_t i = start; i < stop; ++i) batch.push_back(std::async(std::launch::async, run_one, i));
        for (std::size_t i = start; i < stop; ++i) out[i] = batch[i - start].get();
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::Empty, "median of an empty sequence");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<ScenarioResult> median_scenarios(const std::vector<ReplicateResult>& reps) {
    std::vector<ScenarioResult> out;
    if (reps.empty()) return out;
    for (Scenario s : {Scenario::A, Scenario::B, Scenario::C}) {
        auto pick = [s](const ReplicateResult& r) -> const ScenarioResult& {
            return s == Scenario::A ? r.a : s == Scenario::B ? r.b : r.c;
        };
        ScenarioResult m;
        m.scenario = s;
        std::vector<double> overall;
        std::vector<double> pairs;
        for (const auto& r : reps) {
            overall.push_back(pick(r).overall_rmse);
            pairs.push_back(static_cast<double>(pick(r).training_pairs));
        }
        m.overall_rmse = median(overall);
        m.training_pairs = static_cast<std::size_t>(median(pairs));
        const std::size_t n = pick(reps.front()).per_class_rmse.size();
        for (std::size_t c = 0; c < n; ++c) {
            std::vector<double> v;
            for (const auto& r : reps) v.push_back(pick(r).per_class_rmse[c]);
            m.per_class_rmse.push_back(median(v));
        }
        out.push_back(std::move(m));
    }
    return out;
}

AlphaSweepResult median_sweep(const std::vector<ReplicateResult>& reps) {
    AlphaSweepResult m;
    if (reps.empty()) return m;
    m.alphas = reps.front().sweep.alphas;
    for (std::size_t i = 0; i < m.alphas.size(); ++i) {
        std::vector<double> win, flow;
        for (const auto& r : reps) {
            win.push_back(r.sweep.window_accuracy.at(i));
            flow.push_back(r.sweep.flow_majority_accuracy.at(i));
        }
        m.window_accuracy.push_back(median(win));
        m.flow_majority_accuracy.push_back(median(flow));
    }
    std::vector<double> dt;
    for (const auto& r : reps) dt.push_back(r.sweep.dt_only_accuracy);
    m.dt_only_accuracy = median(dt);
    return m;
}

void write_scenario_reports(const std::vector<ReplicateResult>& reps, const std::vector<ClassLabel>& labels,
                            const std::filesystem::path& dir) {
    auto header = [&](std::ostream& out, bool with_seed) {
        if (with_seed) out << "seed,";
        out << "scenario,overall_rmse";
        for (const auto& l : labels) out << ",rmse_" << l.name;
        out << ",training_pairs\n";
    };
    auto row = [&](std::ostream& out, const ScenarioResult& r) {
        out << to_char(r.scenario) << ',' << format_double(r.overall_rmse);
        for (double v : r.per_class_rmse) out << ',' << format_double(v);
        out << ',' << r.training_pairs << '\n';
    };

    {
        auto out = open_output(dir / "scenario_results.csv");
        header(out, false);
        for (const auto& m : median_scenarios(reps)) row(out, m);
    }
    {
        auto out = open_output(dir / "scenario_results_per_seed.csv");
        header(out, true);
        for (const auto& r : reps) {
            for (const auto* s : {&r.a, &r.b, &r.c}) {
                out << r.seed << ',';
                row(out, *s);
            }
        }
    }
    for (Scenario s : {Scenario::A, Scenario::B, Scenario::C}) {
        auto out = open_output(dir / (std::string("scenario_") + to_char(s) + "_predictions.csv"));
        out << "seed,flow,bin,true_class,predictor_class,predicted,truth\n";
        for (const auto& r : reps) {
            const auto& res = s == Scenario::A ? r.a : s == Scenario::B ? r.b : r.c;
            for (const auto& p : res.points) {
                out << r.seed << ',' << p.flow << ',' << p.bin << ',' << p.true_class << ',' << p.predictor_class
                    << ',' << format_double(p.predicted) << ',' << format_double(p.truth) << '\n';
            }
        }
        if (!out) throw Error(ErrorCode::Io, "write failed in " + dir.string());
    }
}

void write_alpha_reports(const std::vector<ReplicateResult>& reps, const std::filesystem::path& dir) {
    const auto m = median_sweep(reps);
    {
        auto out = open_output(dir / "alpha_sweep.csv");
        out << "alpha,window_accuracy,flow_majority_accuracy\n";
        for (std::size_t i = 0; i < m.alphas.size(); ++i) {
            out << format_double(m.alphas[i]) << ',' << format_double(m.window_accuracy[i]) << ','
                << format_double(m.flow_majority_accuracy[i]) << '\n';
        }
    }
    {
        auto out = open_output(dir / "alpha_sweep_per_seed.csv");
        out << "seed,alpha,window_accuracy,flow_majority_accuracy\n";
        for (const auto& r : reps) {
            for (std::size_t i = 0; i < r.sweep.alphas.size(); ++i) {
                out << r.seed << ',' << format_double(r.sweep.alphas[i]) << ','
                    << format_double(r.sweep.window_accuracy[i]) << ','
                    << format_double(r.sweep.flow_majority_accuracy[i]) << '\n';
            }
        }
    }
    {
        auto out = open_output(dir / "alpha_sweep_baseline.csv");
        out << "baseline,window_accuracy\n";
        out << "classifier_only," << format_double(m.dt_only_accuracy) << '\n';
    }
}

std::map<std::uint64_t, double> rmse_from_prediction_log(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto seed_col = table.column("seed");
    const auto pred_col = table.column("predicted");
    const auto truth_col = table.column("truth");
    std::map<std::uint64_t, std::pair<double, std::size_t>> acc;
    for (const auto& row : table.rows) {
        const auto seed = static_cast<std::uint64_t>(parse_int(row[seed_col]));
        const double d = parse_double(row[pred_col]) - parse_double(row[truth_col]);
        auto& [sum, n] = acc[seed];
        sum += d * d;
        ++n;
    }
    std::map<std::uint64_t, double> out;
    for (const auto& [seed, v] : acc) out[seed] = std::sqrt(v.first / static_cast<double>(v.second));
    return out;
}

}  // namespace jointflow
