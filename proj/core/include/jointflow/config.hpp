#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jointflow/harness.hpp"

namespace jointflow {

struct PathsConfig {
    std::filesystem::path dataset_dir = "data";
    std::filesystem::path model_dir = "models";
    std::filesystem::path report_dir = "reports";
    /// Profile file for `generate`; empty uses the built-in default profiles.
    std::filesystem::path profiles;
};

struct GenerateConfig {
    double duration = 300.0;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
};

/// Everything a CLI run needs. Every field has a default; a config file
/// overrides any subset, and CLI flags override the file.
struct RunConfig {
    PathsConfig paths;
    GenerateConfig generate;
    ExperimentConfig experiment;
    std::uint64_t train_seed = 0;
    /// Scenario-B routing by class name; empty uses default_mismatch.
    std::map<std::string, std::string> mismatch;
    /// Train models per replicate instead of loading them from model_dir.
    bool train_in_place = true;

    /// Resolves `mismatch` against a label set.
    Mismatch resolve_mismatch(const std::vector<ClassLabel>& labels) const;
};

/// Parses a YAML run config. Errors name the offending key and line.
/// Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& yaml_text, const std::string& source_name,
                           const std::filesystem::path& base_dir = {});

RunConfig load_run_config(const std::filesystem::path& path);

/// YAML form of the effective config; parse_run_config(to_yaml(c)) == c.
std::string to_yaml(const RunConfig& cfg);

}  // namespace jointflow
