#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jointflow/features.hpp"
#include "jointflow/joint_classifier.hpp"
#include "jointflow/predictor_bank.hpp"
#include "jointflow/synth_gen.hpp"
#include "jointflow/trace_model.hpp"

namespace jointflow {

/// Every knob an experiment run depends on, apart from data and seed.
struct ExperimentConfig {
    WindowingConfig windowing;
    SlidingWindowConfig sliding;
    LearnerConfig predictor;
    LearnerConfig classifier;
    std::vector<double> encoding;  ///< numeric label values; empty means 0..n-1
    double split_boundary = 120.0; ///< seconds of each trace used for training
    FusionConfig fusion;
    std::vector<double> alphas = {0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};

    ExperimentConfig();
    void validate() const;
};

enum class Scenario { A, B, C };

char to_char(Scenario s);

/// One predicted bin in a scenario run, in the flow's true-class scale.
struct ScenarioPoint {
    std::size_t flow = 0;
    std::size_t bin = 0;
    int true_class = 0;
    int predictor_class = -1;  ///< -1 for the pooled scenario-C predictor
    double predicted = 0.0;
    double truth = 0.0;
};

struct ScenarioResult {
    Scenario scenario = Scenario::A;
    std::vector<double> per_class_rmse;  ///< by class id
    double overall_rmse = 0.0;
    std::size_t training_pairs = 0;      ///< pairs seen by one predictor of this scenario
    std::vector<ScenarioPoint> points;
};

struct AlphaSweepResult {
    std::vector<double> alphas;
    std::vector<double> window_accuracy;
    std::vector<double> flow_majority_accuracy;
    double dt_only_accuracy = 0.0;  ///< classifier alone (alpha -> infinity)
    std::uint64_t seed = 0;
};

/// Maps each class id to the id whose predictor it is served by in scenario B.
using Mismatch = std::vector<int>;

/// Shifts every class to the previous one: VO->GM, VI->VO, GM->VI for the
/// stock classes.
Mismatch default_mismatch(std::size_t num_classes);

/// Throws InvalidMismatch for identity entries or out-of-range targets.
void validate_mismatch(const Mismatch& mismatch, std::size_t num_classes);

/// Throws InvalidAlphas unless nonempty, strictly ascending and starting at 0.
void validate_alphas(const std::vector<double>& alphas);

/// A dataset split, featurized and (lazily) trained under one seed.
class Experiment {
public:
    Experiment(LabeledDataset dataset, ExperimentConfig cfg, std::uint64_t seed);

    const LabeledDataset& dataset() const noexcept { return dataset_; }
    const ExperimentConfig& config() const noexcept { return cfg_; }
    std::uint64_t seed() const noexcept { return seed_; }
    LabelEncoding encoding() const;

    /// Class-specific predictors, each trained on its class's training split.
    const PredictorBank& bank();
    const Classifier& classifier();

    /// Uses an externally trained bank and classifier instead of training.
    void use_models(PredictorBank bank, Classifier classifier);

    const std::vector<FlowTrace>& test_traces() const noexcept { return test_; }

    ScenarioResult run_scenario_a();
    ScenarioResult run_scenario_b(const Mismatch& mismatch);
    /// One predictor on the pooled windowed pairs of all classes, truncated to
    /// the per-predictor pair count of scenario A.
    ScenarioResult run_scenario_c();

    AlphaSweepResult alpha_sweep(const std::vector<double>& alphas);

    /// Closed loop on every test flow at the configured alpha.
    std::vector<std::vector<StepResult>> run_joint();

    /// Pooled training pairs scenario C uses; exposed for inspection.
    WindowedDataset pooled_pairs(double pooled_scale) const;

private:
    ScenarioResult evaluate(Scenario scenario, const std::vector<const ClassPredictor*>& by_true_class,
                            std::size_t training_pairs) const;

    LabeledDataset dataset_;
    ExperimentConfig cfg_;
    std::uint64_t seed_;
    std::vector<FlowTrace> train_;
    std::vector<FlowTrace> test_;
    std::vector<ClassSeries> train_series_;
    std::vector<PredSeries> test_series_;
    std::optional<PredictorBank> bank_;
    std::optional<Classifier> classifier_;
};

/// Generates one trace per profile for `seed`: trace c uses mix_seed(seed, c).
LabeledDataset generate_dataset(const std::vector<ClassProfile>& profiles, double duration, std::uint64_t seed);

struct ReplicateResult {
    std::uint64_t seed = 0;
    ScenarioResult a, b, c;
    AlphaSweepResult sweep;
};

struct ReplicateOptions {
    bool scenarios = true;
    bool sweep = true;
    std::optional<Mismatch> mismatch;
    /// Saved models to evaluate instead of training per replicate. Scenario C
    /// still trains its pooled predictor. Both or neither must be set.
    const PredictorBank* bank = nullptr;
    const Classifier* classifier = nullptr;
};

/// Runs scenarios and/or the alpha sweep on independent datasets, one per
/// entry of `datasets`, training with mix_seed(train_seed, data seed).
/// Replicates run concurrently; results come back in input order.
std::vector<ReplicateResult> run_replicates(const std::vector<std::pair<std::uint64_t, LabeledDataset>>& datasets,
                                            const ExperimentConfig& cfg, std::uint64_t train_seed,
                                            const ReplicateOptions& options);

double median(std::vector<double> values);

/// Median over replicates of each scenario's per-class and overall RMSE.
std::vector<ScenarioResult> median_scenarios(const std::vector<ReplicateResult>& reps);

/// Median over replicates of each alpha's accuracies.
AlphaSweepResult median_sweep(const std::vector<ReplicateResult>& reps);

/// scenario_results.csv (medians), scenario_results_per_seed.csv and one
/// scenario_<X>_predictions.csv per scenario.
void write_scenario_reports(const std::vector<ReplicateResult>& reps, const std::vector<ClassLabel>& labels,
                            const std::filesystem::path& dir);

/// alpha_sweep.csv (medians), alpha_sweep_per_seed.csv, alpha_sweep_baseline.csv.
void write_alpha_reports(const std::vector<ReplicateResult>& reps, const std::filesystem::path& dir);

/// Recomputes overall RMSE of a scenario from its predictions CSV, per seed.
std::map<std::uint64_t, double> rmse_from_prediction_log(const std::filesystem::path& path);

}  // namespace jointflow
