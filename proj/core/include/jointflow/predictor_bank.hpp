#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jointflow/distance.hpp"
#include "jointflow/features.hpp"
#include "jointflow/mlp.hpp"
#include "jointflow/trace_model.hpp"

namespace jointflow {

struct SlidingWindowConfig {
    int window = 10;  ///< past bins per input

    void validate() const;
};

/// Hidden layout and optimizer settings for one learner. The input and output
/// widths are filled in by whoever owns the data.
struct LearnerConfig {
    std::vector<int> hidden = {16};
    Activation activation = Activation::Tanh;
    TrainConfig train;

    NetSpec spec_for(int inputs) const;
};

struct WindowedDataset {
    std::vector<std::vector<double>> inputs;  ///< each of length W
    std::vector<std::vector<double>> targets; ///< each of length 1

    std::size_t size() const noexcept { return inputs.size(); }
};

/// Pair i is (values[i .. i+W), values[i+W]); exactly len - W pairs.
WindowedDataset window_dataset(const PredSeries& series, const SlidingWindowConfig& cfg);

/// Appends `more` to `into`.
void append(WindowedDataset& into, const WindowedDataset& more);

/// Largest raw value over all series; throws ZeroScale when none is positive.
double fit_scale(std::span<const PredSeries> raw_series);

/// Windowed pairs of every series long enough, normalized by `scale`.
/// Throws SeriesTooShort when no series yields a pair.
WindowedDataset windowed_pairs(std::span<const PredSeries> raw_series, double scale, const SlidingWindowConfig& cfg);

/// One trained next-bin predictor and the scale its inputs are divided by.
struct ClassPredictor {
    ClassLabel label;
    Network net;
    double scale = 1.0;
    double final_loss = 0.0;

    /// Predicts the next raw bin value from the last W raw values.
    double predict_raw(std::span<const double> recent_raw) const;
};

ClassPredictor fit_predictor(const ClassLabel& label, const WindowedDataset& data, double scale,
                             const LearnerConfig& learner, std::uint64_t seed);

/// Raw one-step predictions for bins W .. len-1 of a raw series.
std::vector<double> rolling_predictions(const ClassPredictor& predictor, std::span<const double> raw, int window);

struct ClassSeries {
    ClassLabel label;
    std::vector<PredSeries> series;  ///< raw (unnormalized) training series
};

class PredictorBank {
public:
    PredictorBank() = default;
    PredictorBank(std::vector<ClassPredictor> predictors, SlidingWindowConfig sliding, WindowingConfig windowing);

    std::size_t num_classes() const noexcept { return predictors_.size(); }
    const ClassPredictor& predictor(std::size_t class_id) const { return predictors_.at(class_id); }
    const std::vector<ClassPredictor>& predictors() const noexcept { return predictors_; }
    const SlidingWindowConfig& sliding() const noexcept { return sliding_; }
    const WindowingConfig& windowing() const noexcept { return windowing_; }

    /// Raw prediction of every class predictor, ordered by class id. Throws
    /// DimensionMismatch unless recent_raw has exactly W values.
    std::vector<double> predict_all(std::span<const double> recent_raw) const;

    void save(const std::filesystem::path& dir) const;
    static PredictorBank load(const std::filesystem::path& dir);

private:
    std::vector<ClassPredictor> predictors_;
    SlidingWindowConfig sliding_;
    WindowingConfig windowing_;
};

/// Trains one predictor per label in `universe`, each only on its own class's
/// series. Throws MissingClassData naming a class without data.
PredictorBank train_bank(const std::vector<ClassSeries>& per_class, const std::vector<ClassLabel>& universe,
                         const SlidingWindowConfig& sliding, const WindowingConfig& windowing,
                         const LearnerConfig& learner, std::uint64_t seed);

/// sqrt(mean((p - t)^2)). Throws LengthMismatch or Empty.
double rmse(std::span<const double> predictions, std::span<const double> truths);

/// One prediction bin of a flow, in the flow's normalized units.
struct PredictionRecord {
    std::size_t bin = 0;
    std::vector<double> predicted;  ///< per class
    double truth = 0.0;
    std::vector<double> abs_error;  ///< per class, |predicted - truth|
};

PredictionRecord make_record(std::size_t bin, std::vector<double> predicted, double truth);

/// Component c is the mean absolute error of predictor c over the records.
/// Throws EmptyWindow for no records.
DistanceVector dp_vector(std::span<const PredictionRecord> records);

}  // namespace jointflow
