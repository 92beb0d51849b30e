#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jointflow/error.hpp"

namespace jointflow {

enum class Direction : std::uint8_t { Uplink, Downlink };
enum class Protocol : std::uint8_t { TCP, UDP };

/// Metadata of one captured packet. No addresses or ports: classification
/// must work without the 5-tuple.
struct PacketRecord {
    double timestamp = 0.0;  ///< seconds from trace start
    std::uint32_t size = 0;  ///< bytes
    Direction direction = Direction::Uplink;
    Protocol protocol = Protocol::TCP;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct ClassLabel {
    int id = 0;
    std::string name;

    friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

struct FlowTrace {
    std::vector<PacketRecord> packets;  ///< ascending by timestamp
    ClassLabel label;
    std::string source_tag;
    /// Capture span in seconds. Zero means "unknown": the span then ends at
    /// the last packet.
    double duration = 0.0;

    double last_timestamp() const noexcept { return packets.empty() ? 0.0 : packets.back().timestamp; }

    double span() const noexcept { return duration > 0.0 ? duration : last_timestamp(); }
};

struct LabeledDataset {
    std::vector<FlowTrace> traces;
    std::vector<ClassLabel> labels;  ///< label universe, ids dense in [0, n)

    std::size_t num_classes() const noexcept { return labels.size(); }
};

/// Returns the first violated invariant, or nullopt when the trace is valid.
std::optional<ErrorCode> validate_trace(const FlowTrace& trace);

/// Throws Error when validate_trace reports a violation.
void require_valid(const FlowTrace& trace);

/// Checks label ids are dense and unique and every trace label is in the universe.
void require_valid(const LabeledDataset& dataset);

/// Splits at `boundary` seconds. Train keeps [0, boundary); test keeps the
/// rest with timestamps shifted so the boundary maps to 0. Durations are
/// split accordingly when known.
std::pair<FlowTrace, FlowTrace> split_by_time(const FlowTrace& trace, double boundary);

/// Trace CSV: header `timestamp_s,size_bytes,direction,protocol`, direction
/// in {U,D}, protocol in {TCP,UDP}. Timestamps are written in shortest
/// round-trip form.
void write_trace_csv(const FlowTrace& trace, const std::filesystem::path& path);

/// Reads packets only; the caller supplies label and source tag (they live in
/// the dataset manifest). The result is validated.
FlowTrace read_trace_csv(const std::filesystem::path& path, ClassLabel label, std::string source_tag,
                         double duration = 0.0);

}  // namespace jointflow
