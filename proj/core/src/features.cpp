#include "jointflow/features.hpp"

#include <cmath>

namespace jointflow {

namespace {
constexpr double kBinSlack = 1e-9;
}

int WindowingConfig::ratio() const {
    if (!(pred_bin > 0.0) || !(class_window > 0.0)) {
        throw Error(ErrorCode::InvalidWindowing, "class_window and pred_bin must be positive");
    }
    const double r = class_window / pred_bin;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) {
        throw Error(ErrorCode::InvalidWindowing, "class_window must be an integer multiple of pred_bin");
    }
    return static_cast<int>(rounded);
}

long long bin_index(double t, double bin_width) {
    return static_cast<long long>(std::floor(t / bin_width + kBinSlack));
}

std::size_t complete_bins(double span, double bin_width) {
    if (span <= 0.0) return 0;
    return static_cast<std::size_t>(std::floor(span / bin_width + kBinSlack));
}

std::vector<FeatureVector> extract_features(const FlowTrace& trace, const WindowingConfig& cfg) {
    const auto r = static_cast<std::size_t>(cfg.ratio());
    const std::size_t windows = complete_bins(trace.span(), cfg.pred_bin) / r;
    std::vector<FeatureVector> out(windows);

    struct Acc {
        double first_t = 0.0;
        double last_t = 0.0;
        std::size_t udp = 0;
        bool any = false;
        Direction last_dir = Direction::Uplink;
    };
    std::vector<Acc> acc(windows);

    for (const auto& p : trace.packets) {
        const auto w = static_cast<std::size_t>(bin_index(p.timestamp, cfg.pred_bin)) / r;
        if (w >= windows) break;
        auto& f = out[w];
        auto& a = acc[w];
        if (a.any && p.direction != a.last_dir) f.direction_switches += 1.0;
        if (!a.any) a.first_t = p.timestamp;
        a.any = true;
        a.last_t = p.timestamp;
        a.last_dir = p.direction;
        f.packet_count += 1.0;
        (p.direction == Direction::Uplink ? f.uplink_count : f.downlink_count) += 1.0;
        if (p.protocol == Protocol::UDP) ++a.udp;
    }

    for (std::size_t w = 0; w < windows; ++w) {
        auto& f = out[w];
        const auto& a = acc[w];
        if (f.packet_count >= 2.0) f.mean_interarrival = (a.last_t - a.first_t) / (f.packet_count - 1.0);
        if (f.packet_count > 0.0) f.udp_fraction = static_cast<double>(a.udp) / f.packet_count;
    }
    return out;
}

PredSeries extract_series(const FlowTrace& trace, const WindowingConfig& cfg) {
    cfg.ratio();
    PredSeries series;
    series.values.assign(complete_bins(trace.span(), cfg.pred_bin), 0.0);
    for (const auto& p : trace.packets) {
        const auto b = static_cast<std::size_t>(bin_index(p.timestamp, cfg.pred_bin));
        if (b >= series.values.size()) break;
        series.values[b] += static_cast<double>(p.size);
    }
    return series;
}

PredSeries normalize(const PredSeries& series, NormalizeMode mode, std::optional<double> fit_scale) {
    if (mode == NormalizeMode::None) return series;
    double divisor = 0.0;
    if (fit_scale) {
        divisor = *fit_scale;
    } else {
        for (double v : series.values) divisor = std::max(divisor, std::abs(v));
    }
    if (!(divisor > 0.0) || !std::isfinite(divisor)) {
        throw Error(ErrorCode::ZeroScale, "cannot normalize: scale is zero or undefined");
    }
    PredSeries out;
    out.scale = series.scale * divisor;
    out.values.reserve(series.values.size());
    for (double v : series.values) out.values.push_back(v / divisor);
    return out;
}

}  // namespace jointflow
