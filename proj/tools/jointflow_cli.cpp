// jointflow command-line driver: generate, train, evaluate, features dump.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "jointflow/config.hpp"
#include "jointflow/dataset_io.hpp"
#include "jointflow/harness.hpp"
#include "jointflow/random.hpp"
#include "jointflow/text_io.hpp"

namespace fs = std::filesystem;
using namespace jointflow;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config;
    bool force = false;
};

RunConfig load_config(const CommonOptions& common) {
    if (common.config.empty()) return RunConfig{};
    if (!fs::exists(common.config)) throw UsageError("config file not found: " + common.config);
    return load_run_config(common.config);
}

void refuse_overwrite(const std::vector<fs::path>& outputs, bool force) {
    if (force) return;
    for (const auto& p : outputs) {
        if (fs::exists(p)) throw UsageError(p.string() + " already exists (pass --force to overwrite)");
    }
}

// Paths are made absolute so the manifest can be fed back with --config from
// any directory.
void write_run_manifest(RunConfig cfg, const fs::path& path, const std::string& command) {
    for (auto* p : {&cfg.paths.dataset_dir, &cfg.paths.model_dir, &cfg.paths.report_dir, &cfg.paths.profiles}) {
        if (!p->empty()) *p = fs::absolute(*p).lexically_normal();
    }
    auto out = open_output(path);
    out << "# " << command << "\n" << to_yaml(cfg);
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<ClassProfile> profiles_for(const RunConfig& cfg) {
    if (cfg.paths.profiles.empty()) return default_profiles();
    return load_profiles(cfg.paths.profiles);
}

// --- generate -------------------------------------------------------------

struct GenerateArgs {
    CommonOptions common;
    std::string profiles, out;
    std::optional<double> duration;
    std::vector<std::uint64_t> seeds;
};

int cmd_generate(const GenerateArgs& args) {
    auto cfg = load_config(args.common);
    if (!args.profiles.empty()) cfg.paths.profiles = args.profiles;
    if (!args.out.empty()) cfg.paths.dataset_dir = args.out;
    if (args.duration) cfg.generate.duration = *args.duration;
    if (!args.seeds.empty()) cfg.generate.seeds = args.seeds;
    if (!(cfg.generate.duration > 0.0)) throw UsageError("--duration must be positive");

    const auto profiles = profiles_for(cfg);
    std::vector<SeededDataset> datasets;
    for (auto seed : cfg.generate.seeds) {
        datasets.emplace_back(seed, generate_dataset(profiles, cfg.generate.duration, seed));
    }
    const auto dir = cfg.paths.dataset_dir;
    auto outputs = dataset_outputs(datasets, dir);
    outputs.push_back(dir / "run_manifest.yaml");
    refuse_overwrite(outputs, args.common.force);

    write_dataset(datasets, dir);
    write_run_manifest(cfg, dir / "run_manifest.yaml", "jointflow generate");
    std::cout << "wrote " << outputs.size() - 2 << " traces and " << kManifestName << " to " << dir.string() << '\n';
    return kOk;
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
    CommonOptions common;
    std::string data, models;
    std::optional<std::uint64_t> seed;
};

std::vector<fs::path> model_outputs(const std::vector<ClassLabel>& labels, const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& l : labels) out.push_back(dir / ("predictor_" + l.name + ".json"));
    for (const char* name : {"bank_manifest.json", "classifier.json", "train_summary.csv", "run_manifest.yaml"}) {
        out.push_back(dir / name);
    }
    return out;
}

int cmd_train(const TrainArgs& args) {
    auto cfg = load_config(args.common);
    if (!args.data.empty()) cfg.paths.dataset_dir = args.data;
    if (!args.models.empty()) cfg.paths.model_dir = args.models;
    if (args.seed) cfg.train_seed = *args.seed;

    const auto dataset = merge_seeds(load_dataset(cfg.paths.dataset_dir));
    const auto dir = cfg.paths.model_dir;
    refuse_overwrite(model_outputs(dataset.labels, dir), args.common.force);

    Experiment exp(dataset, cfg.experiment, cfg.train_seed);
    const auto& bank = exp.bank();
    const auto& clf = exp.classifier();
    bank.save(dir);
    clf.save(dir / "classifier.json");

    auto summary = open_output(dir / "train_summary.csv");
    summary << "class,label,scale,final_loss\n";
    std::cout << "class  scale        final_loss\n";
    for (const auto& p : bank.predictors()) {
        summary << p.label.id << ',' << p.label.name << ',' << format_double(p.scale) << ','
                << format_double(p.final_loss) << '\n';
        std::printf("%-6s %-12.6g %.6g\n", p.label.name.c_str(), p.scale, p.final_loss);
    }
    if (!summary) throw Error(ErrorCode::Io, "write failed: " + (dir / "train_summary.csv").string());
    write_run_manifest(cfg, dir / "run_manifest.yaml", "jointflow train");
    std::cout << "models written to " << dir.string() << '\n';
    return kOk;
}

// --- evaluate -------------------------------------------------------------

struct EvaluateArgs {
    CommonOptions common;
    std::string mode, data, models, reports;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::vector<double> alphas;
    bool use_models = false;
};

std::vector<fs::path> evaluate_outputs(const std::string& mode, const std::vector<SeededDataset>& datasets,
                                       const fs::path& dir) {
    std::vector<fs::path> out;
    if (mode == "scenarios") {
        for (const char* name : {"scenario_results.csv", "scenario_results_per_seed.csv", "scenario_A_predictions.csv",
                                 "scenario_B_predictions.csv", "scenario_C_predictions.csv"}) {
            out.push_back(dir / name);
        }
    } else if (mode == "alpha-sweep") {
        for (const char* name : {"alpha_sweep.csv", "alpha_sweep_per_seed.csv", "alpha_sweep_baseline.csv"}) {
            out.push_back(dir / name);
        }
    } else {
        for (const auto& [seed, ds] : datasets) {
            for (const auto& t : ds.traces) {
                out.push_back(dir / ("decisions_seed" + std::to_string(seed) + "_" + t.label.name + ".csv"));
            }
        }
        out.push_back(dir / "joint_summary.csv");
    }
    out.push_back(dir / ("run_manifest_" + mode + ".yaml"));
    return out;
}

void run_joint_mode(const std::vector<SeededDataset>& datasets, const RunConfig& cfg, const PredictorBank* bank,
                    const Classifier* clf, const fs::path& dir) {
    auto summary = open_output(dir / "joint_summary.csv");
    summary << "seed,label,windows,accuracy\n";
    for (const auto& [seed, ds] : datasets) {
        Experiment exp(ds, cfg.experiment, mix_seed(cfg.train_seed, seed));
        if (bank) exp.use_models(*bank, *clf);
        const auto enc = exp.encoding();
        const auto results = exp.run_joint();
        for (std::size_t f = 0; f < results.size(); ++f) {
            const auto& label = ds.traces[f].label;
            std::vector<WindowLog> logs;
            std::size_t correct = 0;
            for (const auto& s : results[f]) {
                logs.push_back(s.log);
                if (s.log.decision == static_cast<std::size_t>(label.id)) ++correct;
            }
            write_decision_log(logs, enc, dir / ("decisions_seed" + std::to_string(seed) + "_" + label.name + ".csv"));
            const double acc = logs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(logs.size());
            summary << seed << ',' << label.name << ',' << logs.size() << ',' << format_double(acc) << '\n';
            std::printf("seed %-4llu %-6s windows %-5zu accuracy %.4f\n", static_cast<unsigned long long>(seed),
                        label.name.c_str(), logs.size(), acc);
        }
    }
    if (!summary) throw Error(ErrorCode::Io, "write failed: " + (dir / "joint_summary.csv").string());
}

int cmd_evaluate(const EvaluateArgs& args) {
    auto cfg = load_config(args.common);
    if (!args.data.empty()) cfg.paths.dataset_dir = args.data;
    if (!args.models.empty()) cfg.paths.model_dir = args.models;
    if (!args.reports.empty()) cfg.paths.report_dir = args.reports;
    if (args.seed) cfg.train_seed = *args.seed;
    if (args.alpha) cfg.experiment.fusion.alpha = *args.alpha;
    if (!args.alphas.empty()) cfg.experiment.alphas = args.alphas;
    if (args.use_models) cfg.train_in_place = false;
    try {
        cfg.experiment.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    const auto datasets = load_dataset(cfg.paths.dataset_dir);
    const auto dir = cfg.paths.report_dir;
    refuse_overwrite(evaluate_outputs(args.mode, datasets, dir), args.common.force);

    std::optional<PredictorBank> bank;
    std::optional<Classifier> clf;
    if (!cfg.train_in_place) {
        bank = PredictorBank::load(cfg.paths.model_dir);
        clf = Classifier::load(cfg.paths.model_dir / "classifier.json");
    }
    const auto& labels = datasets.front().second.labels;

    if (args.mode == "joint") {
        run_joint_mode(datasets, cfg, bank ? &*bank : nullptr, clf ? &*clf : nullptr, dir);
    } else {
        ReplicateOptions options;
        options.scenarios = args.mode == "scenarios";
        options.sweep = args.mode == "alpha-sweep";
        if (options.scenarios) options.mismatch = cfg.resolve_mismatch(labels);
        if (bank) {
            options.bank = &*bank;
            options.classifier = &*clf;
        }
        const auto reps = run_replicates(datasets, cfg.experiment, cfg.train_seed, options);
        if (options.scenarios) {
            write_scenario_reports(reps, labels, dir);
            for (const auto& m : median_scenarios(reps)) {
                std::printf("scenario %c  median RMSE %.6g\n", to_char(m.scenario), m.overall_rmse);
            }
        } else {
            write_alpha_reports(reps, dir);
            const auto m = median_sweep(reps);
            for (std::size_t i = 0; i < m.alphas.size(); ++i) {
                std::printf("alpha %-8g median window accuracy %.4f\n", m.alphas[i], m.window_accuracy[i]);
            }
        }
    }
    write_run_manifest(cfg, dir / ("run_manifest_" + args.mode + ".yaml"), "jointflow evaluate --mode " + args.mode);
    std::cout << "reports written to " << dir.string() << '\n';
    return kOk;
}

// --- features dump ----------------------------------------------------------

struct DumpArgs {
    CommonOptions common;
    std::string data, out;
};

int cmd_features_dump(const DumpArgs& args) {
    auto cfg = load_config(args.common);
    if (!args.data.empty()) cfg.paths.dataset_dir = args.data;
    const fs::path dir = args.out.empty() ? cfg.paths.report_dir / "features" : fs::path(args.out);
    const auto entries = read_manifest(cfg.paths.dataset_dir);

    std::vector<fs::path> outputs;
    for (const auto& e : entries) {
        const auto stem = fs::path(e.file).stem().string();
        outputs.push_back(dir / ("features_" + stem + ".csv"));
        outputs.push_back(dir / ("series_" + stem + ".csv"));
    }
    refuse_overwrite(outputs, args.common.force);

    const auto& w = cfg.experiment.windowing;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const auto trace = read_trace_csv(cfg.paths.dataset_dir / e.file, e.label, e.source_tag, e.duration);
        {
            auto out = open_output(outputs[2 * i]);
            out << "window_index,mean_interarrival,direction_switches,uplink_count,downlink_count,udp_fraction,"
                   "packet_count\n";
            const auto features = extract_features(trace, w);
            for (std::size_t k = 0; k < features.size(); ++k) {
                out << k;
                for (double v : features[k].to_array()) out << ',' << format_double(v);
                out << '\n';
            }
        }
        {
            auto out = open_output(outputs[2 * i + 1]);
            out << "bin,bytes\n";
            const auto series = extract_series(trace, w);
            for (std::size_t b = 0; b < series.size(); ++b) out << b << ',' << format_double(series.values[b]) << '\n';
        }
    }
    std::cout << "dumped features of " << entries.size() << " traces to " << dir.string() << '\n';
    return kOk;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("-c,--config", common.config, "YAML run config");
    cmd->add_flag("-f,--force", common.force, "Overwrite existing outputs");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jointflow: joint traffic classification and prediction"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate synthetic traces and a manifest");
    add_common(generate, gen.common);
    generate->add_option("-p,--profiles", gen.profiles, "Profile YAML (default: built-in profiles)");
    generate->add_option("-d,--duration", gen.duration, "Seconds per trace");
    generate->add_option("-s,--seeds", gen.seeds, "Seeds, one dataset per seed")->delimiter(',');
    generate->add_option("-o,--out", gen.out, "Dataset directory");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train the predictor bank and classifier");
    add_common(train, tr.common);
    train->add_option("--data", tr.data, "Dataset directory");
    train->add_option("--models", tr.models, "Model output directory");
    train->add_option("--seed", tr.seed, "Training seed");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Run scenario, alpha-sweep or joint experiments");
    add_common(evaluate, ev.common);
    evaluate->add_option("-m,--mode", ev.mode, "scenarios | alpha-sweep | joint")
        ->required()
        ->check(CLI::IsMember({"scenarios", "alpha-sweep", "joint"}));
    evaluate->add_option("--data", ev.data, "Dataset directory");
    evaluate->add_option("--models", ev.models, "Model directory (with --use-models)");
    evaluate->add_option("--reports", ev.reports, "Report directory");
    evaluate->add_option("--seed", ev.seed, "Training seed");
    evaluate->add_option("--alpha", ev.alpha, "Fusion weight for joint mode");
    evaluate->add_option("--alphas", ev.alphas, "Alpha sweep values")->delimiter(',');
    evaluate->add_flag("--use-models", ev.use_models, "Evaluate saved models instead of training per seed");

    DumpArgs dump;
    auto* features = app.add_subcommand("features", "Feature inspection");
    features->require_subcommand(1);
    auto* dump_cmd = features->add_subcommand("dump", "Write per-window features and byte series as CSV");
    add_common(dump_cmd, dump.common);
    dump_cmd->add_option("--data", dump.data, "Dataset directory");
    dump_cmd->add_option("-o,--out", dump.out, "Output directory (default: <report_dir>/features)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    const std::string command = generate->parsed() ? "generate"
                                : train->parsed()  ? "train"
                                : evaluate->parsed() ? "evaluate"
                                                     : "features dump";
    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (train->parsed()) return cmd_train(tr);
        if (evaluate->parsed()) return cmd_evaluate(ev);
        return cmd_features_dump(dump);
    } catch (const UsageError& e) {
        std::cerr << "jointflow " << command << ": " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "jointflow " << command << ": " << e.what() << '\n';
        if (is_config_error(e.code())) return kUsage;
        if (is_data_error(e.code())) return kData;
        return kInternal;
    } catch (const std::exception& e) {
        std::cerr << "jointflow " << command << ": internal error: " << e.what() << '\n';
        return kInternal;
    }
}
