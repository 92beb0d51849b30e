#pragma once

#include <array>
#include <optional>
#include <vector>

#include "jointflow/trace_model.hpp"

namespace jointflow {

struct WindowingConfig {
    double class_window = 0.5;  ///< seconds per classification window
    double pred_bin = 0.1;      ///< seconds per prediction bin

    /// Prediction bins per classification window. Throws InvalidWindowing
    /// unless class_window is a positive integer multiple of pred_bin.
    int ratio() const;
};

/// Classification features of one window. Deliberately free of addresses and
/// ports.
struct FeatureVector {
    double mean_interarrival = 0.0;  ///< seconds between consecutive packets in the window
    double direction_switches = 0.0; ///< direction changes between consecutive packets
    double uplink_count = 0.0;
    double downlink_count = 0.0;
    double udp_fraction = 0.0;
    double packet_count = 0.0;

    static constexpr std::size_t kSize = 6;

    std::array<double, kSize> to_array() const {
        return {mean_interarrival, direction_switches, uplink_count, downlink_count, udp_fraction, packet_count};
    }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Bytes per prediction bin. raw value = values[i] * scale.
struct PredSeries {
    std::vector<double> values;
    double scale = 1.0;

    std::size_t size() const noexcept { return values.size(); }
};

enum class NormalizeMode { MaxAbs, None };

/// Index of the prediction bin holding time t. A relative slack of 1e-9 bins
/// keeps timestamps that are exact multiples of the bin width in the later bin.
long long bin_index(double t, double bin_width);

/// Number of complete bins of `bin_width` in `span` seconds.
std::size_t complete_bins(double span, double bin_width);

/// One vector per complete classification window of the trace span, windows
/// consecutive from t = 0. Window k covers prediction bins [k*r, (k+1)*r).
std::vector<FeatureVector> extract_features(const FlowTrace& trace, const WindowingConfig& cfg);

/// Raw byte totals per prediction bin over the trace span (scale 1).
PredSeries extract_series(const FlowTrace& trace, const WindowingConfig& cfg);

/// MaxAbs divides by fit_scale when given, else by the series' max |value|.
/// The recorded scale multiplies the input scale so raw = value * scale holds.
PredSeries normalize(const PredSeries& series, NormalizeMode mode, std::optional<double> fit_scale = std::nullopt);

}  // namespace jointflow
