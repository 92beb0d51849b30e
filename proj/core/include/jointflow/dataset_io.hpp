#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "jointflow/trace_model.hpp"

namespace jointflow {

/// One row of a dataset manifest.
struct ManifestEntry {
    std::string file;  ///< relative to the dataset directory
    ClassLabel label;
    std::string source_tag;
    std::uint64_t seed = 0;
    double duration = 0.0;
};

/// A dataset generated under one seed: one trace per class.
using SeededDataset = std::pair<std::uint64_t, LabeledDataset>;

inline constexpr const char* kManifestName = "manifest.csv";

/// Trace file name used by write_dataset, e.g. "VO_seed3.csv".
std::string trace_file_name(const ClassLabel& label, std::uint64_t seed);

/// Every path write_dataset would create for `datasets` under `dir`.
std::vector<std::filesystem::path> dataset_outputs(const std::vector<SeededDataset>& datasets,
                                                   const std::filesystem::path& dir);

/// Writes each trace as CSV plus manifest.csv
/// (`file,label_id,label,source_tag,seed,duration_s`).
void write_dataset(const std::vector<SeededDataset>& datasets, const std::filesystem::path& dir);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

/// Reads a dataset directory and groups traces by seed, in ascending seed
/// order. Every seed group must hold every class of the manifest; a gap
/// throws MissingClassData naming the class.
std::vector<SeededDataset> load_dataset(const std::filesystem::path& dir);

/// All traces of all seeds in one dataset (for training on everything).
LabeledDataset merge_seeds(const std::vector<SeededDataset>& datasets);

}  // namespace jointflow
