#include "jointflow/trace_model.hpp"

#include <algorithm>
#include <set>

#include "jointflow/text_io.hpp"

namespace jointflow {

std::optional<ErrorCode> validate_trace(const FlowTrace& trace) {
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        const auto& p = trace.packets[i];
        if (p.timestamp < 0.0) return ErrorCode::NegativeTimestamp;
        if (p.size < 1) return ErrorCode::NonPositiveSize;
        if (i > 0 && p.timestamp < trace.packets[i - 1].timestamp) return ErrorCode::UnsortedTimestamps;
    }
    return std::nullopt;
}

void require_valid(const FlowTrace& trace) {
    if (auto err = validate_trace(trace)) {
        throw Error(*err, "invalid trace '" + trace.source_tag + "' (" + trace.label.name + ")");
    }
}

void require_valid(const LabeledDataset& dataset) {
    std::set<int> ids;
    for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
        if (dataset.labels[i].id != static_cast<int>(i)) {
            throw Error(ErrorCode::UnknownLabel, "label ids must be dense and ordered; '" + dataset.labels[i].name +
                                                     "' has id " + std::to_string(dataset.labels[i].id));
        }
    }
    for (const auto& trace : dataset.traces) {
        const auto id = trace.label.id;
        if (id < 0 || id >= static_cast<int>(dataset.labels.size()) || dataset.labels[id].name != trace.label.name) {
            throw Error(ErrorCode::UnknownLabel, "trace '" + trace.source_tag + "' has label '" + trace.label.name +
                                                     "' outside the label universe");
        }
        require_valid(trace);
    }
}

std::pair<FlowTrace, FlowTrace> split_by_time(const FlowTrace& trace, double boundary) {
    if (!(boundary > 0.0)) throw Error(ErrorCode::Config, "split boundary must be positive");
    FlowTrace train{.packets = {}, .label = trace.label, .source_tag = trace.source_tag, .duration = 0.0};
    FlowTrace test{.packets = {}, .label = trace.label, .source_tag = trace.source_tag, .duration = 0.0};
    if (trace.duration > 0.0) {
        train.duration = std::min(boundary, trace.duration);
        test.duration = std::max(0.0, trace.duration - boundary);
    }
    for (const auto& p : trace.packets) {
        if (p.timestamp < boundary) {
            train.packets.push_back(p);
        } else {
            auto shifted = p;
            shifted.timestamp = p.timestamp - boundary;
            test.packets.push_back(shifted);
        }
    }
    return {std::move(train), std::move(test)};
}

void write_trace_csv(const FlowTrace& trace, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "timestamp_s,size_bytes,direction,protocol\n";
    for (const auto& p : trace.packets) {
        out << format_double(p.timestamp) << ',' << p.size << ',' << (p.direction == Direction::Uplink ? 'U' : 'D')
            << ',' << (p.protocol == Protocol::TCP ? "TCP" : "UDP") << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

FlowTrace read_trace_csv(const std::filesystem::path& path, ClassLabel label, std::string source_tag,
                         double duration) {
    auto in = open_input(path);
    FlowTrace trace{.packets = {}, .label = std::move(label), .source_tag = std::move(source_tag),
                    .duration = duration};
    std::string line;
    if (!std::getline(in, line) || split_csv(line).size() != 4 ||
        line.rfind("timestamp_s,size_bytes,direction,protocol", 0) != 0) {
        throw Error(ErrorCode::Parse, path.string() + ": missing header 'timestamp_s,size_bytes,direction,protocol'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        const auto f = split_csv(line);
        if (f.size() != 4) throw Error(ErrorCode::Parse, where + ": expected 4 fields");
        PacketRecord p;
        try {
            p.timestamp = parse_double(f[0]);
            const auto size = parse_int(f[1]);
            if (size < 0 || size > 0xffffffffLL) throw Error(ErrorCode::NonPositiveSize, "size out of range");
            p.size = static_cast<std::uint32_t>(size);
        } catch (const Error& e) {
            throw Error(e.code(), where + ": " + e.what());
        }
        if (f[2] == "U") {
            p.direction = Direction::Uplink;
        } else if (f[2] == "D") {
            p.direction = Direction::Downlink;
        } else {
            throw Error(ErrorCode::Parse, where + ": direction must be U or D");
        }
        auto proto = f[3];
        if (!proto.empty() && proto.back() == '\r') proto.remove_suffix(1);
        if (proto == "TCP") {
            p.protocol = Protocol::TCP;
        } else if (proto == "UDP") {
            p.protocol = Protocol::UDP;
        } else {
            throw Error(ErrorCode::Parse, where + ": protocol must be TCP or UDP");
        }
        trace.packets.push_back(p);
    }
    if (auto err = validate_trace(trace)) throw Error(*err, path.string());
    return trace;
}

}  // namespace jointflow
