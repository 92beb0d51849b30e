#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <limits>

#include "jointflow/dataset_io.hpp"
#include "jointflow/text_io.hpp"
#include "test_support.hpp"

namespace jointflow {
namespace {

struct CliRun {
    int code = -1;
    std::string output;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(JOINTFLOW_CLI) + " " + args + " 2>&1";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// Short traces and few epochs keep every CLI round trip under a few seconds.
constexpr const char* kQuickConfig = R"(split: {boundary_s: 30}
predictor: {epochs: 30}
classifier: {epochs: 30}
)";

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        testing::write_file(dir / "quick.yaml", kQuickConfig);
        cfg = " -c " + (dir / "quick.yaml").string();
        data = (dir / "data").string();
    }

    CliRun generate(const std::string& extra = "") {
        return run("generate" + cfg + " -d 60 -s 1,2 -o " + data + extra);
    }

    testing::TempDir dir;
    std::string cfg;
    std::string data;
};

TEST(Cli, HelpAndUsage) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("evaluate --mode bogus").code, 1);
}

TEST_F(CliTest, GenerateWritesTracesAndManifest) {
    const auto r = run("generate" + cfg + " -d 20 -s 1,2,3,4 -o " + data);
    ASSERT_EQ(r.code, 0) << r.output;
    std::size_t csvs = 0;
    for (const auto& e : std::filesystem::directory_iterator(data)) {
        if (e.path().extension() == ".csv" && e.path().filename() != kManifestName) ++csvs;
    }
    EXPECT_EQ(csvs, 12u);
    EXPECT_EQ(read_manifest(data).size(), 12u);
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(data) / "run_manifest.yaml"));
}

TEST_F(CliTest, RefusesOverwriteWithoutForce) {
    ASSERT_EQ(generate().code, 0);
    const auto first = testing::read_file(std::filesystem::path(data) / "VI_seed2.csv");
    const auto again = generate();
    EXPECT_EQ(again.code, 1);
    EXPECT_NE(again.output.find("--force"), std::string::npos) << again.output;
    const auto forced = generate(" --force");
    ASSERT_EQ(forced.code, 0) << forced.output;
    EXPECT_EQ(testing::read_file(std::filesystem::path(data) / "VI_seed2.csv"), first);
}

TEST_F(CliTest, UnwritableOutputNamesPath) {
    testing::write_file(dir / "blocker", "x");
    const auto target = (dir / "blocker" / "sub").string();
    const auto r = run("generate" + cfg + " -d 5 -s 1 -o " + target);
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find(target), std::string::npos) << r.output;
}

TEST_F(CliTest, BadConfigNamesLine) {
    testing::write_file(dir / "bad.yaml", "split:\n  boundary_s: 30\nfusion:\n  alpah: 1\n");
    const auto r = run("generate -c " + (dir / "bad.yaml").string() + " -o " + data);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("bad.yaml:4"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("alpah"), std::string::npos) << r.output;
}

TEST_F(CliTest, MissingDatasetIsDataError) {
    const auto r = run("train" + cfg + " --data " + (dir / "none").string() + " --models " + (dir / "m").string());
    EXPECT_EQ(r.code, 2) << r.output;
}

TEST_F(CliTest, TrainWritesModelsDeterministically) {
    ASSERT_EQ(generate().code, 0);
    const auto models = dir / "models";
    const auto r = run("train" + cfg + " --data " + data + " --models " + models.string());
    ASSERT_EQ(r.code, 0) << r.output;
    for (const char* f : {"predictor_VO.json", "predictor_VI.json", "predictor_GM.json", "bank_manifest.json",
                          "classifier.json", "train_summary.csv", "run_manifest.yaml"}) {
        EXPECT_TRUE(std::filesystem::exists(models / f)) << f;
    }
    const auto first = testing::read_file(models / "predictor_GM.json");
    EXPECT_EQ(run("train" + cfg + " --data " + data + " --models " + models.string()).code, 1);
    ASSERT_EQ(run("train" + cfg + " --force --data " + data + " --models " + models.string()).code, 0);
    EXPECT_EQ(testing::read_file(models / "predictor_GM.json"), first);
}

TEST_F(CliTest, TrainMissingClassNamed) {
    ASSERT_EQ(generate().code, 0);
    const auto manifest = std::filesystem::path(data) / kManifestName;
    auto text = testing::read_file(manifest);
    const auto pos = text.find("VI_seed1.csv");
    text.erase(pos, text.find('\n', pos) - pos + 1);
    testing::write_file(manifest, text);
    const auto r = run("train" + cfg + " --data " + data + " --models " + (dir / "m").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("VI"), std::string::npos) << r.output;
}

TEST_F(CliTest, EvaluateModes) {
    ASSERT_EQ(generate().code, 0);
    const auto reports = dir / "reports";
    const std::string base = "evaluate" + cfg + " --data " + data + " --reports " + reports.string();

    auto r = run(base + " -m scenarios");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(read_csv(reports / "scenario_results.csv").rows.size(), 3u);
    EXPECT_TRUE(std::filesystem::exists(reports / "scenario_B_predictions.csv"));

    r = run(base + " -m alpha-sweep");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(read_csv(reports / "alpha_sweep.csv").rows.size(), 8u);

    r = run(base + " -m alpha-sweep --alphas 0,1");
    EXPECT_EQ(r.code, 1) << r.output;  // would overwrite
    r = run(base + " -m alpha-sweep --force --alphas 0,2,1");
    EXPECT_EQ(r.code, 1) << r.output;  // not ascending

    r = run(base + " -m joint --alpha 1");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(read_csv(reports / "joint_summary.csv").rows.size(), 6u);
}

// On the first window no prediction history exists, so the decision must be
// the classifier's nearest label.
TEST_F(CliTest, JointLogsShowColdStartOnClassifierOnly) {
    ASSERT_EQ(generate().code, 0);
    const auto reports = dir / "reports";
    ASSERT_EQ(run("evaluate" + cfg + " -m joint --data " + data + " --reports " + reports.string()).code, 0);
    int logs = 0;
    for (const auto& e : std::filesystem::directory_iterator(reports)) {
        const auto name = e.path().filename().string();
        if (name.rfind("decisions_", 0) != 0) continue;
        ++logs;
        const auto t = read_csv(e.path());
        ASSERT_FALSE(t.rows.empty());
        const auto& row = t.rows[0];
        EXPECT_EQ(row[t.column("window_index")], "0");
        EXPECT_EQ(row[t.column("dp_0")], "");
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = parse_double(row[t.column("dt_" + std::to_string(c))]);
            if (d < best_d) best_d = d, best = c;
        }
        const std::vector<std::string> names{"VO", "VI", "GM"};
        EXPECT_EQ(row[t.column("decision")], names[best]) << name;
    }
    EXPECT_EQ(logs, 6);
}

TEST_F(CliTest, EvaluateWithSavedModels) {
    ASSERT_EQ(generate().code, 0);
    const auto models = (dir / "models").string();
    ASSERT_EQ(run("train" + cfg + " --data " + data + " --models " + models).code, 0);
    const auto r = run("evaluate" + cfg + " -m alpha-sweep --use-models --data " + data + " --models " + models +
                       " --reports " + (dir / "rep").string());
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(read_csv(dir / "rep" / "alpha_sweep.csv").rows.size(), 8u);
}

TEST_F(CliTest, FeaturesDump) {
    ASSERT_EQ(run("generate" + cfg + " -d 10 -s 1 -o " + data).code, 0);
    const auto out = dir / "feat";
    const auto r = run("features dump" + cfg + " --data " + data + " -o " + out.string());
    ASSERT_EQ(r.code, 0) << r.output;
    const auto f = read_csv(out / "features_VO_seed1.csv");
    EXPECT_EQ(f.rows.size(), 20u);
    EXPECT_EQ(f.header.size(), 7u);
    EXPECT_EQ(read_csv(out / "series_VO_seed1.csv").rows.size(), 100u);
}

}  // namespace
}  // namespace jointflow
