#include <gtest/gtest.h>

#include <cmath>

#include "jointflow/harness.hpp"
#include "jointflow/text_io.hpp"
#include "test_support.hpp"

namespace jointflow {
namespace {

ExperimentConfig quick_config() {
    ExperimentConfig cfg;
    cfg.predictor.train.epochs = 40;
    cfg.classifier.train.epochs = 40;
    cfg.split_boundary = 30.0;
    return cfg;
}

LabeledDataset small_dataset(std::uint64_t seed, double duration = 60.0) {
    return generate_dataset(default_profiles(), duration, seed);
}

TEST(Mismatch, DefaultIsDerangement) {
    EXPECT_EQ(default_mismatch(3), (Mismatch{2, 0, 1}));
    EXPECT_NO_THROW(validate_mismatch(default_mismatch(3), 3));
    EXPECT_NO_THROW(validate_mismatch(default_mismatch(5), 5));
}

TEST(Mismatch, IdentityRejected) {
    try {
        validate_mismatch({0, 2, 1}, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidMismatch);
    }
    EXPECT_THROW(validate_mismatch({1, 0}, 3), Error);
    EXPECT_THROW(validate_mismatch({1, 5, 0}, 3), Error);
}

TEST(Alphas, Validation) {
    EXPECT_NO_THROW(validate_alphas({0.0, 0.5, 2.0}));
    EXPECT_THROW(validate_alphas({0.0, 0.5, 0.5}), Error);
    EXPECT_THROW(validate_alphas({0.1, 0.5}), Error);
    EXPECT_THROW(validate_alphas({0.0, 2.0, 1.0}), Error);
    EXPECT_THROW(validate_alphas({}), Error);
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_THROW(median({}), Error);
}

TEST(GenerateDataset, OneTracePerProfile) {
    const auto ds = small_dataset(3, 10.0);
    ASSERT_EQ(ds.traces.size(), 3u);
    ASSERT_EQ(ds.labels.size(), 3u);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(ds.traces[c].label, ds.labels[c]);
    EXPECT_EQ(ds.traces[0].packets, small_dataset(3, 10.0).traces[0].packets);
}

TEST(Experiment, ScenariosAreDeterministic) {
    Experiment a(small_dataset(1), quick_config(), 7);
    Experiment b(small_dataset(1), quick_config(), 7);
    const auto ra = a.run_scenario_a();
    const auto rb = b.run_scenario_a();
    EXPECT_EQ(ra.overall_rmse, rb.overall_rmse);
    EXPECT_EQ(ra.per_class_rmse, rb.per_class_rmse);
    EXPECT_EQ(a.run_scenario_c().overall_rmse, b.run_scenario_c().overall_rmse);
}

TEST(Experiment, ScenarioShapes) {
    Experiment exp(small_dataset(2), quick_config(), 1);
    const auto a = exp.run_scenario_a();
    const auto b = exp.run_scenario_b(default_mismatch(3));
    const auto c = exp.run_scenario_c();
    for (const auto* r : {&a, &b, &c}) {
        ASSERT_EQ(r->per_class_rmse.size(), 3u);
        for (double v : r->per_class_rmse) EXPECT_GE(v, 0.0);
        EXPECT_FALSE(r->points.empty());
    }
    for (const auto& p : a.points) EXPECT_EQ(p.predictor_class, p.true_class);
    for (const auto& p : b.points) EXPECT_EQ(p.predictor_class, default_mismatch(3)[p.true_class]);
    for (const auto& p : c.points) EXPECT_EQ(p.predictor_class, -1);
    EXPECT_THROW(exp.run_scenario_b({0, 1, 2}), Error);
}

// Overall RMSE is the RMSE of the concatenated points, not a mean of the
// per-class values.
TEST(Experiment, OverallRmseOverAllPoints) {
    Experiment exp(small_dataset(4), quick_config(), 2);
    const auto r = exp.run_scenario_b(default_mismatch(3));
    double sum = 0.0;
    for (const auto& p : r.points) sum += (p.predicted - p.truth) * (p.predicted - p.truth);
    EXPECT_NEAR(r.overall_rmse, std::sqrt(sum / r.points.size()), 1e-12);
}

TEST(Experiment, PooledPairsMatchScenarioA) {
    Experiment exp(small_dataset(5), quick_config(), 3);
    const auto a = exp.run_scenario_a();
    const auto c = exp.run_scenario_c();
    EXPECT_EQ(c.training_pairs, a.training_pairs);
    // 30 s of training = 300 bins per class, W = 10.
    EXPECT_EQ(a.training_pairs, 290u);
}

// Zero-variance profiles give constant byte series, which every predictor can
// memorize.
TEST(Experiment, ConstantFlowsPredictNearPerfectly) {
    std::vector<ClassProfile> profiles;
    for (int c = 0; c < 2; ++c) {
        ClassProfile p;
        p.label = {c, c == 0 ? "A" : "B"};
        p.interarrival = PeriodicJittered{c == 0 ? 0.02 : 0.05, 0.0};
        p.mean_rate = 1.0 / std::get<PeriodicJittered>(p.interarrival).period;
        p.size_model = FixedSize{c == 0 ? 100.0 : 400.0};
        p.uplink_fraction = 0.5;
        p.protocol_mix = 0.5;
        profiles.push_back(p);
    }
    auto cfg = quick_config();
    cfg.predictor.train.epochs = 100;
    Experiment exp(generate_dataset(profiles, 60.0, 1), cfg, 1);
    EXPECT_LT(exp.run_scenario_a().overall_rmse, 0.02);
}

// With one class the pooled predictor sees exactly the class's own pairs, so
// only training order separates C from A.
TEST(Experiment, SingleClassScenarioCMatchesA) {
    ClassProfile only = default_profiles()[1];
    only.label = {0, "VI"};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Experiment exp(generate_dataset({only}, 300.0, seed), ExperimentConfig{}, seed);
        const double a = exp.run_scenario_a().overall_rmse;
        const double c = exp.run_scenario_c().overall_rmse;
        EXPECT_NEAR(c, a, 0.1 * a) << "seed " << seed;
    }
}

TEST(Experiment, AlphaSweepShape) {
    Experiment exp(small_dataset(6), quick_config(), 5);
    const auto r = exp.alpha_sweep({0.0, 0.5, 5.0});
    ASSERT_EQ(r.window_accuracy.size(), 3u);
    ASSERT_EQ(r.flow_majority_accuracy.size(), 3u);
    for (double a : r.window_accuracy) {
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
    }
    EXPECT_GE(r.dt_only_accuracy, 0.0);
    EXPECT_THROW(exp.alpha_sweep({0.0, 1.0, 1.0}), Error);
}

TEST(Experiment, RejectsBadEncoding) {
    auto cfg = quick_config();
    cfg.encoding = {0.0, 1.0};
    EXPECT_THROW(Experiment(small_dataset(1, 10.0), cfg, 1), Error);
}

TEST(Reports, RmseReproducibleFromPredictionLog) {
    testing::TempDir dir;
    std::vector<std::pair<std::uint64_t, LabeledDataset>> data;
    data.emplace_back(11, small_dataset(11));
    data.emplace_back(12, small_dataset(12));
    ReplicateOptions opt;
    opt.sweep = false;
    const auto reps = run_replicates(data, quick_config(), 0, opt);
    write_scenario_reports(reps, data.front().second.labels, dir.path());
    for (Scenario s : {Scenario::A, Scenario::B, Scenario::C}) {
        const auto from_log =
            rmse_from_prediction_log(dir / (std::string("scenario_") + to_char(s) + "_predictions.csv"));
        for (const auto& r : reps) {
            const auto& res = s == Scenario::A ? r.a : s == Scenario::B ? r.b : r.c;
            EXPECT_DOUBLE_EQ(from_log.at(r.seed), res.overall_rmse);
        }
    }
    const auto table = read_csv(dir / "scenario_results.csv");
    EXPECT_EQ(table.rows.size(), 3u);
    EXPECT_EQ(table.header.front(), "scenario");
}

TEST(Reports, AlphaSweepFiles) {
    testing::TempDir dir;
    std::vector<std::pair<std::uint64_t, LabeledDataset>> data;
    data.emplace_back(1, small_dataset(1, 40.0));
    ReplicateOptions opt;
    opt.scenarios = false;
    const auto reps = run_replicates(data, quick_config(), 0, opt);
    write_alpha_reports(reps, dir.path());
    const auto table = read_csv(dir / "alpha_sweep.csv");
    EXPECT_EQ(table.rows.size(), 8u);
    EXPECT_EQ(table.header, (std::vector<std::string>{"alpha", "window_accuracy", "flow_majority_accuracy"}));
    EXPECT_EQ(read_csv(dir / "alpha_sweep_baseline.csv").rows.size(), 1u);
}

// Each class's own predictor beats every other predictor on that class's
// held-out traffic in at least 2 of the 3 classes (medians over 5 seeds).
// The two cyclic shifts cover all off-diagonal predictor/class pairs.
TEST(ClassMatchedAdvantage, DefaultProfiles) {
    ExperimentConfig cfg;
    std::vector<std::vector<double>> own(3), shift1(3), shift2(3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Experiment exp(generate_dataset(default_profiles(), 300.0, seed), cfg, seed);
        const auto a = exp.run_scenario_a();
        const auto b1 = exp.run_scenario_b({2, 0, 1});
        const auto b2 = exp.run_scenario_b({1, 2, 0});
        for (std::size_t c = 0; c < 3; ++c) {
            own[c].push_back(a.per_class_rmse[c]);
            shift1[c].push_back(b1.per_class_rmse[c]);
            shift2[c].push_back(b2.per_class_rmse[c]);
        }
    }
    int wins = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        if (median(own[c]) < median(shift1[c]) && median(own[c]) < median(shift2[c])) ++wins;
    }
    EXPECT_GE(wins, 2);
}

TEST(JointLoop, SteadyVoiceFlowSettlesOnVoice) {
    Experiment exp(generate_dataset(default_profiles(), 300.0, 3), ExperimentConfig{}, 3);
    const auto runs = exp.run_joint();
    const auto& vo = runs[0];
    ASSERT_GT(vo.size(), 10u);
    std::size_t settled = 0;
    for (std::size_t k = 2; k < vo.size(); ++k) {
        if (vo[k].log.decision == 0) ++settled;
    }
    EXPECT_EQ(vo[2].log.decision, 0u);
    EXPECT_GE(static_cast<double>(settled) / (vo.size() - 2), 0.95);
}

}  // namespace
}  // namespace jointflow
