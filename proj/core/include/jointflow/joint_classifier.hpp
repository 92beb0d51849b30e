#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "jointflow/distance.hpp"
#include "jointflow/features.hpp"
#include "jointflow/mlp.hpp"
#include "jointflow/predictor_bank.hpp"
#include "jointflow/trace_model.hpp"

namespace jointflow {

/// Numeric tag X_i the classifier regresses onto for each class.
struct LabelEncoding {
    std::vector<ClassLabel> labels;
    std::vector<double> numeric;

    /// X_i = i.
    static LabelEncoding ordinal(std::vector<ClassLabel> labels);

    std::size_t size() const noexcept { return labels.size(); }
    double value_of(int class_id) const;

    /// Throws InvalidEncoding on size mismatch, non-dense ids or repeated values.
    void validate() const;
};

struct FusionConfig {
    double alpha = 1.0;

    void validate() const;
};

/// Component i = |X_i - x_t|.
DistanceVector dt_vector(double x_t, const LabelEncoding& enc);

/// D_p + alpha * D_t, componentwise.
DistanceVector fuse(const DistanceVector& d_p, const DistanceVector& d_t, const FusionConfig& cfg);

/// Index of the smallest component; ties go to the lowest index.
std::size_t argmin(const DistanceVector& d);

ClassLabel classify(const DistanceVector& d_a, const LabelEncoding& enc);

/// Per-feature z-scoring fitted on training windows.
struct FeatureScaler {
    std::array<double, FeatureVector::kSize> mean{};
    std::array<double, FeatureVector::kSize> stddev{};

    static FeatureScaler fit(std::span<const FeatureVector> features);
    std::vector<double> apply(const FeatureVector& f) const;
};

/// Regression network from a window's features to the numeric label space.
struct Classifier {
    FeatureScaler scaler;
    Network net;
    LabelEncoding encoding;

    /// The classifier's numeric output x_t.
    double score(const FeatureVector& f) const;

    void save(const std::filesystem::path& path) const;
    static Classifier load(const std::filesystem::path& path);
};

struct LabeledFeatures {
    std::vector<FeatureVector> features;
    std::vector<int> class_ids;  ///< parallel to features
};

/// Throws EmptyDataset or UnknownLabel.
Classifier train_classifier(const LabeledFeatures& data, const LabelEncoding& enc, const LearnerConfig& learner,
                            std::uint64_t seed);

/// One classification window of a flow as it arrives.
struct WindowData {
    std::size_t window_index = 0;
    std::size_t first_bin = 0;
    FeatureVector features;
    std::vector<double> raw_bins;  ///< bytes per prediction bin, class_window/pred_bin values
};

/// Per-flow loop state. Single owner; steps must be fed contiguous windows.
struct JointState {
    std::optional<std::size_t> decision;  ///< class index decided for the previous window
    std::deque<double> history;           ///< last W raw bins
    double running_max = 0.0;             ///< largest raw bin seen so far
    std::vector<PredictionRecord> window_records;
    DistanceVector last_dt, last_dp, last_da;
};

struct WindowLog {
    std::size_t window_index = 0;
    double x_t = 0.0;
    DistanceVector d_p;  ///< empty when the window had no full set of predictions
    DistanceVector d_t;
    DistanceVector d_a;  ///< empty when d_p is
    std::size_t decision = 0;
    std::optional<std::size_t> truth;
};

struct ActivePrediction {
    std::size_t bin = 0;
    std::size_t predictor = 0;
    double predicted_raw = 0.0;
    double truth_raw = 0.0;
};

struct StepResult {
    WindowLog log;
    std::vector<ActivePrediction> active;  ///< one per bin that had W bins of history
};

/// Bank, classifier and fusion weight wired into the closed loop.
class JointEngine {
public:
    JointEngine(const PredictorBank& bank, const Classifier& classifier, FusionConfig fusion);

    const FusionConfig& fusion() const noexcept { return fusion_; }

    /// Predicts every bin of the window with all class predictors, then fuses
    /// the window's prediction errors with the classifier distance. The
    /// predictor chosen by the previous decision supplies the active
    /// predictions; on a flow's first window the classifier alone decides,
    /// both for the active predictor and for the window.
    StepResult step(JointState& state, const WindowData& window, std::optional<std::size_t> truth = {}) const;

    /// Runs the loop over every complete window of a trace.
    std::vector<StepResult> run(const FlowTrace& trace) const;

private:
    const PredictorBank* bank_;
    const Classifier* classifier_;
    FusionConfig fusion_;
};

/// Splits a trace into the windows the engine consumes.
std::vector<WindowData> make_windows(const FlowTrace& trace, const WindowingConfig& cfg);

/// Decision log CSV:
/// window_index,x_t,dp_0..dp_{n-1},dt_0..dt_{n-1},da_0..da_{n-1},decision,truth
void write_decision_log(std::span<const WindowLog> logs, const LabelEncoding& enc, const std::filesystem::path& path);

}  // namespace jointflow
