#include "jointflow/dataset_io.hpp"

#include <algorithm>
#include <map>

#include "jointflow/text_io.hpp"

namespace jointflow {

std::string trace_file_name(const ClassLabel& label, std::uint64_t seed) {
    return label.name + "_seed" + std::to_string(seed) + ".csv";
}

std::vector<std::filesystem::path> dataset_outputs(const std::vector<SeededDataset>& datasets,
                                                   const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& [seed, ds] : datasets) {
        for (const auto& t : ds.traces) out.push_back(dir / trace_file_name(t.label, seed));
    }
    out.push_back(dir / kManifestName);
    return out;
}

void write_dataset(const std::vector<SeededDataset>& datasets, const std::filesystem::path& dir) {
    std::vector<ManifestEntry> entries;
    for (const auto& [seed, ds] : datasets) {
        require_valid(ds);
        for (const auto& t : ds.traces) {
            const auto name = trace_file_name(t.label, seed);
            write_trace_csv(t, dir / name);
            entries.push_back(ManifestEntry{name, t.label, t.source_tag, seed, t.duration});
        }
    }
    auto out = open_output(dir / kManifestName);
    out << "file,label_id,label,source_tag,seed,duration_s\n";
    for (const auto& e : entries) {
        out << e.file << ',' << e.label.id << ',' << e.label.name << ',' << e.source_tag << ',' << e.seed << ','
            << format_double(e.duration) << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed: " + (dir / kManifestName).string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / kManifestName;
    const auto table = read_csv(path);
    const auto file = table.column("file");
    const auto id = table.column("label_id");
    const auto label = table.column("label");
    const auto tag = table.column("source_tag");
    const auto seed = table.column("seed");
    const auto duration = table.column("duration_s");
    std::vector<ManifestEntry> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            const auto s = parse_int(row[seed]);
            if (s < 0) throw Error(ErrorCode::Parse, "negative seed");
            out.push_back(ManifestEntry{row[file], ClassLabel{static_cast<int>(parse_int(row[id])), row[label]},
                                        row[tag], static_cast<std::uint64_t>(s), parse_double(row[duration])});
        } catch (const Error& e) {
            throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(r + 2) + ": " + e.what());
        }
    }
    if (out.empty()) throw Error(ErrorCode::EmptyDataset, path.string() + " lists no traces");
    return out;
}

std::vector<SeededDataset> load_dataset(const std::filesystem::path& dir) {
    const auto entries = read_manifest(dir);

    std::map<int, ClassLabel> universe;
    for (const auto& e : entries) {
        const auto [it, inserted] = universe.emplace(e.label.id, e.label);
        if (!inserted && it->second.name != e.label.name) {
            throw Error(ErrorCode::UnknownLabel, "label id " + std::to_string(e.label.id) + " is named both '" +
                                                     it->second.name + "' and '" + e.label.name + "'");
        }
    }
    std::vector<ClassLabel> labels;
    for (const auto& [id, l] : universe) {
        if (id != static_cast<int>(labels.size())) {
            throw Error(ErrorCode::MissingClassData,
                        "manifest has no traces for class id " + std::to_string(labels.size()));
        }
        labels.push_back(l);
    }

    std::map<std::uint64_t, LabeledDataset> by_seed;
    for (const auto& e : entries) {
        auto& ds = by_seed[e.seed];
        ds.labels = labels;
        ds.traces.push_back(read_trace_csv(dir / e.file, e.label, e.source_tag, e.duration));
    }
    std::vector<SeededDataset> out;
    for (auto& [seed, ds] : by_seed) {
        for (const auto& l : labels) {
            const bool present =
                std::any_of(ds.traces.begin(), ds.traces.end(), [&](const FlowTrace& t) { return t.label == l; });
            if (!present) {
                throw Error(ErrorCode::MissingClassData,
                            "seed " + std::to_string(seed) + " has no trace for class '" + l.name + "'");
            }
        }
        std::stable_sort(ds.traces.begin(), ds.traces.end(),
                         [](const FlowTrace& a, const FlowTrace& b) { return a.label.id < b.label.id; });
        out.emplace_back(seed, std::move(ds));
    }
    return out;
}

LabeledDataset merge_seeds(const std::vector<SeededDataset>& datasets) {
    LabeledDataset merged;
    for (const auto& [seed, ds] : datasets) {
        if (merged.labels.empty()) merged.labels = ds.labels;
        merged.traces.insert(merged.traces.end(), ds.traces.begin(), ds.traces.end());
    }
    return merged;
}

}  // namespace jointflow
