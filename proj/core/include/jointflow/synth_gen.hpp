#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jointflow/trace_model.hpp"

namespace jointflow {

struct PoissonArrivals {};

/// Nominal arrivals every `period` seconds, each delayed by a uniform offset
/// in [0, jitter) periods. Order is preserved because jitter < 1.
struct PeriodicJittered {
    double period = 0.02;
    double jitter = 0.0;  ///< fraction of period, in [0, 1)
};

using InterarrivalModel = std::variant<PoissonArrivals, PeriodicJittered>;

struct FixedSize {
    double bytes = 0.0;
};
struct NormalSize {
    double mean = 0.0;
    double stddev = 0.0;
};
struct BimodalSize {
    double small = 0.0;
    double large = 0.0;
    double large_prob = 0.0;
};

using SizeModel = std::variant<FixedSize, NormalSize, BimodalSize>;

/// On-off shaping: after every `length` packets the source stays silent for
/// an extra `gap` seconds.
struct Burst {
    int length = 1;
    double gap = 0.0;
};

struct ClassProfile {
    ClassLabel label;
    std::string source_tag;           ///< application the profile imitates
    double mean_rate = 0.0;           ///< packets/s while active; 1/period for periodic arrivals
    InterarrivalModel interarrival;
    SizeModel size_model;
    double uplink_fraction = 0.5;
    double protocol_mix = 0.0;        ///< probability a packet is UDP
    std::optional<Burst> burst;
};

/// Throws Error(InvalidProfile) naming the violated constraint.
void validate_profile(const ClassProfile& profile);

/// Expected long-run packets per second including burst gaps.
double expected_packet_rate(const ClassProfile& profile);

/// Expected packet size in bytes. Normal sizes are treated as untruncated.
double expected_packet_size(const ClassProfile& profile);

inline double expected_byte_rate(const ClassProfile& profile) {
    return expected_packet_rate(profile) * expected_packet_size(profile);
}

/// Pure function of (profile, duration, seed): packets in [0, duration).
FlowTrace generate_trace(const ClassProfile& profile, double duration, std::uint64_t seed);

/// The three stock classes VO, VI and GM, parsed from the profile file that
/// ships in config/profiles.yaml (compiled in).
std::vector<ClassProfile> default_profiles();

/// Parses a profile document. Label ids follow document order.
std::vector<ClassProfile> parse_profiles(const std::string& yaml_text, const std::string& source_name);

std::vector<ClassProfile> load_profiles(const std::filesystem::path& path);

}  // namespace jointflow
