// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any failed.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "jointflow/harness.hpp"
#include "jointflow/random.hpp"
#include "jointflow/text_io.hpp"

using namespace jointflow;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const Outcome& o, double seconds, double limit) {
    const bool ok = o.pass && seconds < limit;
    if (!ok) ++failures;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", seconds, limit);
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, o.detail.c_str(), timing);
    std::fflush(stdout);
}

void run_timed(int id, double limit, const std::function<Outcome()>& fn) {
    Clock clock;
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    report(id, o, clock.seconds(), limit);
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("jointflow_accept_" + std::to_string(::getpid()) + "_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<ClassLabel> stock_labels(std::size_t n) {
    std::vector<ClassLabel> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back({static_cast<int>(i), "C" + std::to_string(i)});
    return labels;
}

// 1: fused decision against a plain scan of d_p + alpha * |X - x_t|.
Outcome fusion_oracle() {
    Rng rng(101);
    int mismatches = 0;
    int ties = 0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 2 + rng.index(5);
        const bool grid = k % 4 == 0;  // small integers force exact ties
        LabelEncoding enc;
        if (k % 2 == 0) {
            enc = LabelEncoding::ordinal(stock_labels(n));
        } else {
            enc.labels = stock_labels(n);
            std::vector<double> vals;
            while (vals.size() < n) {
                const double v = grid ? static_cast<double>(rng.index(10)) : rng.uniform(-5.0, 5.0);
                if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
            }
            enc.numeric = vals;
        }
        DistanceVector dp;
        for (std::size_t i = 0; i < n; ++i) dp.values.push_back(grid ? rng.index(3) : rng.uniform(0.0, 2.0));
        const double x_t = grid ? static_cast<double>(rng.index(6)) : rng.uniform(-1.0, static_cast<double>(n));
        const double alpha = grid ? static_cast<double>(rng.index(3)) : (k % 7 == 0 ? 0.0 : rng.uniform(0.0, 10.0));

        const auto dt = dt_vector(x_t, enc);
        const auto got = classify(fuse(dp, dt, FusionConfig{alpha}), enc);

        std::size_t best = 0;
        double best_v = std::numeric_limits<double>::infinity();
        int equal_best = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = dp.values[i] + alpha * std::abs(enc.numeric[i] - x_t);
            if (v < best_v) {
                best_v = v;
                best = i;
                equal_best = 1;
            } else if (v == best_v) {
                ++equal_best;
            }
        }
        if (equal_best > 1) ++ties;
        if (!(got == enc.labels[best])) ++mismatches;
    }
    return {mismatches == 0,
            "fused classify vs linear scan, 1000 cases (" + std::to_string(ties) + " ties), " +
                std::to_string(mismatches) + " mismatches"};
}

// 2: analytic gradients against central differences.
Outcome gradient_checks() {
    Rng rng(202);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int layers = 1 + static_cast<int>(rng.index(3));
        std::vector<int> sizes;
        for (int l = 0; l <= layers; ++l) sizes.push_back(1 + static_cast<int>(rng.index(8)));
        const Activation act = std::array{Activation::Sigmoid, Activation::Tanh, Activation::ReLU}[rng.index(3)];
        auto net = init(NetSpec{sizes, act}, 1000 + k);
        // Random biases too: with init's zero biases a dead ReLU layer leaves
        // the next pre-activations exactly on the kink, where no gradient exists.
        for (auto& layer : net.layers) {
            for (auto& b : layer.biases) b = rng.uniform(-0.5, 0.5);
        }
        std::vector<double> x(sizes.front()), t(sizes.back());
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        for (auto& v : t) v = rng.uniform(-1.0, 1.0);
        worst = std::max(worst, gradient_check(net, x, t, 1e-5));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "gradient check on 100 random nets, worst relative error %.3g", worst);
    return {worst < 1e-4, buf};
}

// 3: window_dataset against a direct transcription of the pair definition.
Outcome windowing_oracle() {
    Rng rng(303);
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
        const int w = 1 + static_cast<int>(rng.index(12));
        const std::size_t len = rng.index(w + 40);
        PredSeries s;
        for (std::size_t i = 0; i < len; ++i) s.values.push_back(rng.uniform(0.0, 1.0));
        const SlidingWindowConfig cfg{w};
        if (len < static_cast<std::size_t>(w) + 1) {
            try {
                window_dataset(s, cfg);
                ++bad;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SeriesTooShort) ++bad;
            }
            continue;
        }
        const auto d = window_dataset(s, cfg);
        const std::size_t expected = len - w;
        if (d.size() != expected || d.targets.size() != expected) {
            ++bad;
            continue;
        }
        for (std::size_t i = 0; i < expected; ++i) {
            std::vector<double> in;
            for (int j = 0; j < w; ++j) in.push_back(s.values[i + j]);
            if (d.inputs[i] != in || d.targets[i] != std::vector<double>{s.values[i + w]}) {
                ++bad;
                break;
            }
        }
    }
    return {bad == 0, "window_dataset vs oracle on 1000 series, " + std::to_string(bad) + " disagreements"};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// 7: property checks on series extraction, window counts and dp_vector.
Outcome properties() {
    Rng rng(707);
    int conservation = 0, counts = 0, dp_bad = 0;
    const int cases = 600;
    for (int k = 0; k < cases; ++k) {
        const std::array<std::pair<double, double>, 4> grids{{{0.5, 0.1}, {1.0, 0.2}, {1.0, 0.25}, {2.0, 0.5}}};
        const auto [tc, tp] = grids[rng.index(grids.size())];
        const WindowingConfig cfg{tc, tp};
        const double duration = rng.bernoulli(0.5) ? rng.uniform(0.0, 30.0) : static_cast<double>(rng.index(30));
        std::vector<double> ts(rng.index(400));
        for (auto& t : ts) t = rng.uniform(0.0, std::max(duration, 1e-3));
        std::sort(ts.begin(), ts.end());
        FlowTrace trace;
        trace.label = {0, "VO"};
        trace.duration = duration;
        for (double t : ts) {
            trace.packets.push_back(PacketRecord{t, static_cast<std::uint32_t>(1 + rng.index(1500)),
                                                 rng.bernoulli(0.5) ? Direction::Uplink : Direction::Downlink,
                                                 rng.bernoulli(0.3) ? Protocol::UDP : Protocol::TCP});
        }
        const double span = trace.span();
        const std::size_t nbins = complete_bins(span, tp);
        const std::size_t nwin = complete_bins(span, tc);

        const auto series = extract_series(trace, cfg);
        double kept = 0.0;
        for (const auto& p : trace.packets) {
            if (bin_index(p.timestamp, tp) < static_cast<long long>(nbins)) kept += p.size;
        }
        const double total = std::accumulate(series.values.begin(), series.values.end(), 0.0);
        if (total != kept) ++conservation;

        const auto feats = extract_features(trace, cfg);
        const std::size_t r = static_cast<std::size_t>(cfg.ratio());
        if (series.size() != nbins || feats.size() != nwin || nwin * r > nbins || nbins >= (nwin + 1) * r) ++counts;

        const std::size_t n = 2 + rng.index(5);
        std::vector<PredictionRecord> recs;
        const std::size_t m = 1 + rng.index(10);
        for (std::size_t b = 0; b < m; ++b) {
            std::vector<double> pred(n);
            for (auto& v : pred) v = rng.uniform(-1.0, 2.0);
            recs.push_back(make_record(b, pred, rng.uniform(0.0, 1.0)));
        }
        const auto dp = dp_vector(recs);
        for (std::size_t c = 0; c < n; ++c) {
            double mean = 0.0;
            for (const auto& rec : recs) mean += std::abs(rec.predicted[c] - rec.truth);
            mean /= static_cast<double>(m);
            if (!(dp[c] >= 0.0) || std::abs(dp[c] - mean) > 1e-12) ++dp_bad;
        }
    }
    return {conservation == 0 && counts == 0 && dp_bad == 0,
            std::to_string(cases) + " cases each: byte conservation " + std::to_string(conservation) +
                " failures, count arithmetic " + std::to_string(counts) + ", dp_vector " + std::to_string(dp_bad)};
}

std::vector<std::pair<std::uint64_t, LabeledDataset>> stock_data(std::initializer_list<std::uint64_t> seeds,
                                                                  double duration) {
    std::vector<std::pair<std::uint64_t, LabeledDataset>> data;
    for (auto s : seeds) data.emplace_back(s, generate_dataset(default_profiles(), duration, s));
    return data;
}

// Reports plus decision logs for a fixed pair of replicates.
void write_pipeline(const std::filesystem::path& dir) {
    const auto data = stock_data({1, 2}, 300.0);
    const ExperimentConfig cfg;
    const auto reps = run_replicates(data, cfg, 0, ReplicateOptions{});
    write_scenario_reports(reps, data.front().second.labels, dir);
    write_alpha_reports(reps, dir);
    Experiment exp(data.front().second, cfg, mix_seed(0, data.front().first));
    const auto runs = exp.run_joint();
    for (std::size_t f = 0; f < runs.size(); ++f) {
        std::vector<WindowLog> logs;
        for (const auto& s : runs[f]) logs.push_back(s.log);
        write_decision_log(logs, exp.encoding(), dir / ("decisions_" + std::to_string(f) + ".csv"));
    }
}

// 6: two independent runs produce identical bytes in every output.
Outcome determinism() {
    const auto a = scratch_dir("det_a");
    const auto b = scratch_dir("det_b");
    write_pipeline(a);
    write_pipeline(b);
    int files = 0, differ = 0;
    for (const auto& e : std::filesystem::directory_iterator(a)) {
        ++files;
        const auto other = b / e.path().filename();
        if (!std::filesystem::exists(other) || read_bytes(e.path()) != read_bytes(other)) ++differ;
    }
    const bool same_count = std::distance(std::filesystem::directory_iterator(b), {}) == files;
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    return {differ == 0 && same_count && files > 0,
            std::to_string(files) + " report files from two runs, " + std::to_string(differ) + " differ"};
}

// 8: with no prediction history the first window follows the classifier alone.
Outcome cold_start() {
    const auto dir = scratch_dir("cold");
    int flows = 0, bad = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        Experiment exp(generate_dataset(default_profiles(), 300.0, seed), ExperimentConfig{}, seed);
        const auto runs = exp.run_joint();
        const auto enc = exp.encoding();
        for (std::size_t f = 0; f < runs.size(); ++f) {
            std::vector<WindowLog> logs;
            for (const auto& s : runs[f]) logs.push_back(s.log);
            const auto path = dir / ("seed" + std::to_string(seed) + "_" + std::to_string(f) + ".csv");
            write_decision_log(logs, enc, path);

            const auto t = read_csv(path);
            ++flows;
            if (t.rows.empty()) {
                ++bad;
                continue;
            }
            const auto& row = t.rows.front();
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < enc.size(); ++c) {
                const double d = parse_double(row[t.column("dt_" + std::to_string(c))]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (row[t.column("window_index")] != "0" || row[t.column("decision")] != enc.labels[best].name) ++bad;
        }
    }
    std::filesystem::remove_all(dir);
    return {bad == 0 && flows > 0,
            "first-window decision equals argmin D_t in " + std::to_string(flows - bad) + "/" +
                std::to_string(flows) + " decision logs"};
}

}  // namespace

int main() {
    run_timed(1, 1.0, fusion_oracle);
    run_timed(2, 30.0, gradient_checks);
    run_timed(3, 5.0, windowing_oracle);

    // 4 and 5 share one pass over five replicates.
    Clock clock;
    std::vector<ReplicateResult> reps;
    std::string error;
    try {
        reps = run_replicates(stock_data({1, 2, 3, 4, 5}, 300.0), ExperimentConfig{}, 0, ReplicateOptions{});
    } catch (const std::exception& e) {
        error = e.what();
    }
    const double shared = clock.seconds();
    if (!error.empty()) {
        report(4, {false, "exception: " + error}, shared, 600.0);
        report(5, {false, "exception: " + error}, shared, 900.0);
    } else {
        const auto med = median_scenarios(reps);
        const double a = med[0].overall_rmse, b = med[1].overall_rmse, c = med[2].overall_rmse;
        report(4,
               {a < c && a < b && b / a >= 2.0,
                "median RMSE A=" + fmt(a) + " B=" + fmt(b) + " C=" + fmt(c) + ", B/A=" + fmt(b / a)},
               shared, 600.0);

        const auto sweep = median_sweep(reps);
        const auto& acc = sweep.window_accuracy;
        bool gain = false, nonincreasing = true;
        for (std::size_t i = 1; i < acc.size(); ++i) {
            if (sweep.alphas[i] > 0.0 && acc[i] >= acc[0] + 0.01) gain = true;
            if (acc[i] > acc[i - 1]) nonincreasing = false;
        }
        std::string seq;
        for (std::size_t i = 0; i < acc.size(); ++i) seq += (i ? " " : "") + fmt(sweep.alphas[i]) + ":" + fmt(acc[i]);
        report(5, {gain && !nonincreasing, "median window accuracy by alpha " + seq}, shared, 900.0);
    }

    run_timed(6, 600.0, determinism);
    run_timed(7, 60.0, properties);
    run_timed(8, 120.0, cold_start);

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
