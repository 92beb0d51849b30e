#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>
#include <vector>

#include "jointflow/random.hpp"
#include "jointflow/trace_model.hpp"

namespace jointflow::testing {

inline PacketRecord pkt(double t, std::uint32_t size = 100, Direction dir = Direction::Uplink,
                        Protocol proto = Protocol::TCP) {
    return PacketRecord{t, size, dir, proto};
}

inline FlowTrace make_trace(std::vector<PacketRecord> packets, double duration = 0.0, ClassLabel label = {0, "VO"}) {
    FlowTrace t;
    t.packets = std::move(packets);
    t.label = std::move(label);
    t.source_tag = "test";
    t.duration = duration;
    return t;
}

/// Random valid trace: sorted uniform timestamps in [0, duration).
inline FlowTrace random_trace(Rng& rng, double duration, std::size_t max_packets) {
    std::vector<double> ts(rng.index(max_packets + 1));
    for (auto& t : ts) t = rng.uniform(0.0, duration);
    std::sort(ts.begin(), ts.end());
    std::vector<PacketRecord> packets;
    for (double t : ts) {
        packets.push_back(PacketRecord{t, static_cast<std::uint32_t>(1 + rng.index(1500)),
                                       rng.bernoulli(0.5) ? Direction::Uplink : Direction::Downlink,
                                       rng.bernoulli(0.5) ? Protocol::UDP : Protocol::TCP});
    }
    return make_trace(std::move(packets), duration);
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("jointflow_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace jointflow::testing
