#include "jointflow/synth_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "jointflow/random.hpp"
#include "profiles_embedded.hpp"
#include "yaml_util.hpp"

namespace jointflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

[[noreturn]] void invalid(const ClassProfile& p, const std::string& what) {
    throw Error(ErrorCode::InvalidProfile, "profile '" + p.label.name + "': " + what);
}

std::uint32_t to_bytes(double v) {
    const double r = std::round(v);
    return static_cast<std::uint32_t>(std::clamp(r, 1.0, 65535.0));
}

}  // namespace

void validate_profile(const ClassProfile& p) {
    if (p.label.name.empty()) invalid(p, "empty label name");
    if (!(p.mean_rate > 0.0) || !std::isfinite(p.mean_rate)) invalid(p, "mean_rate must be positive");
    if (const auto* per = std::get_if<PeriodicJittered>(&p.interarrival)) {
        if (!(per->period > 0.0)) invalid(p, "period must be positive");
        if (!(per->jitter >= 0.0 && per->jitter < 1.0)) invalid(p, "jitter must be in [0, 1)");
    }
    std::visit(overloaded{
                   [&](const FixedSize& s) {
                       if (!(s.bytes >= 1.0)) invalid(p, "fixed size must be positive");
                   },
                   [&](const NormalSize& s) {
                       if (!(s.mean >= 1.0)) invalid(p, "normal size mean must be positive");
                       if (!(s.stddev >= 0.0)) invalid(p, "normal size stddev must be nonnegative");
                   },
                   [&](const BimodalSize& s) {
                       if (!(s.small >= 1.0) || !(s.large >= 1.0)) invalid(p, "bimodal sizes must be positive");
                       if (!is_probability(s.large_prob)) invalid(p, "large_prob must be in [0, 1]");
                   },
               },
               p.size_model);
    if (!is_probability(p.uplink_fraction)) invalid(p, "uplink_fraction must be in [0, 1]");
    if (!is_probability(p.protocol_mix)) invalid(p, "protocol_mix must be in [0, 1]");
    if (p.burst) {
        if (p.burst->length < 1) invalid(p, "burst length must be at least 1");
        if (!(p.burst->gap > 0.0)) invalid(p, "burst gap must be positive");
    }
}

double expected_packet_rate(const ClassProfile& p) {
    double rate = p.mean_rate;
    if (const auto* per = std::get_if<PeriodicJittered>(&p.interarrival)) rate = 1.0 / per->period;
    if (!p.burst) return rate;
    const double len = p.burst->length;
    return len / (len / rate + p.burst->gap);
}

double expected_packet_size(const ClassProfile& p) {
    return std::visit(overloaded{
                          [](const FixedSize& s) { return s.bytes; },
                          [](const NormalSize& s) { return s.mean; },
                          [](const BimodalSize& s) { return s.large_prob * s.large + (1.0 - s.large_prob) * s.small; },
                      },
                      p.size_model);
}

FlowTrace generate_trace(const ClassProfile& profile, double duration, std::uint64_t seed) {
    validate_profile(profile);
    if (!(duration > 0.0)) throw Error(ErrorCode::InvalidProfile, "duration must be positive");

    Rng rng(seed);
    FlowTrace trace{.packets = {}, .label = profile.label, .source_tag = profile.source_tag, .duration = duration};
    const auto* periodic = std::get_if<PeriodicJittered>(&profile.interarrival);
    const long long burst_len = profile.burst ? profile.burst->length : 0;
    const double burst_gap = profile.burst ? profile.burst->gap : 0.0;

    double poisson_clock = 0.0;
    for (long long k = 0;; ++k) {
        const long long gaps_so_far = burst_len > 0 ? k / burst_len : 0;
        double t = 0.0;
        if (periodic) {
            const double offset = periodic->jitter > 0.0 ? periodic->jitter * rng.uniform() : 0.0;
            t = (static_cast<double>(k) + offset) * periodic->period + static_cast<double>(gaps_so_far) * burst_gap;
        } else {
            if (burst_len > 0 && k > 0 && k % burst_len == 0) poisson_clock += burst_gap;
            poisson_clock += rng.exponential(profile.mean_rate);
            t = poisson_clock;
        }
        if (t >= duration) break;

        PacketRecord p;
        p.timestamp = t;
        p.size = std::visit(overloaded{
                                [](const FixedSize& s) { return to_bytes(s.bytes); },
                                [&](const NormalSize& s) { return to_bytes(rng.normal(s.mean, s.stddev)); },
                                [&](const BimodalSize& s) {
                                    return to_bytes(rng.bernoulli(s.large_prob) ? s.large : s.small);
                                },
                            },
                            profile.size_model);
        p.direction = rng.bernoulli(profile.uplink_fraction) ? Direction::Uplink : Direction::Downlink;
        p.protocol = rng.bernoulli(profile.protocol_mix) ? Protocol::UDP : Protocol::TCP;
        trace.packets.push_back(p);
    }
    return trace;
}

std::vector<ClassProfile> parse_profiles(const std::string& yaml_text, const std::string& source_name) {
    using namespace detail;
    const YamlSource src{source_name};
    const auto root = load_yaml_string(yaml_text, src);
    const auto classes = root["classes"];
    if (!classes || !classes.IsSequence() || classes.size() == 0) {
        throw Error(ErrorCode::Config, src.where(root) + ": expected a nonempty 'classes' sequence");
    }

    std::vector<ClassProfile> out;
    std::set<std::string> names;
    for (const auto& node : classes) {
        reject_unknown_keys(node,
                            {"name", "source_tag", "mean_rate", "interarrival", "size", "uplink_fraction",
                             "protocol_mix", "burst"},
                            src, "class profile");
        ClassProfile p;
        p.label = ClassLabel{static_cast<int>(out.size()), require<std::string>(node, "name", src)};
        if (!names.insert(p.label.name).second) {
            throw Error(ErrorCode::Config, src.where(node) + ": duplicate class name '" + p.label.name + "'");
        }
        p.source_tag = optional_or<std::string>(node, "source_tag", p.label.name, src);

        const auto ia = node["interarrival"];
        if (!ia) throw Error(ErrorCode::Config, src.where(node) + ": missing key 'interarrival'");
        const auto ia_model = require<std::string>(ia, "model", src);
        if (ia_model == "poisson") {
            reject_unknown_keys(ia, {"model"}, src, "interarrival");
            p.interarrival = PoissonArrivals{};
            p.mean_rate = require<double>(node, "mean_rate", src);
        } else if (ia_model == "periodic") {
            reject_unknown_keys(ia, {"model", "period", "jitter"}, src, "interarrival");
            PeriodicJittered per{require<double>(ia, "period", src), optional_or<double>(ia, "jitter", 0.0, src)};
            p.interarrival = per;
            p.mean_rate = per.period > 0.0 ? 1.0 / per.period : 0.0;
            if (node["mean_rate"]) {
                const double given = require<double>(node, "mean_rate", src);
                if (std::abs(given - p.mean_rate) > 1e-9 * p.mean_rate) {
                    throw Error(ErrorCode::Config, src.where(node["mean_rate"]) +
                                                       ": key 'mean_rate' contradicts 1/period for periodic arrivals");
                }
            }
        } else {
            throw Error(ErrorCode::Config, src.where(ia) + ": key 'model' must be poisson or periodic");
        }

        const auto size = node["size"];
        if (!size) throw Error(ErrorCode::Config, src.where(node) + ": missing key 'size'");
        const auto size_model = require<std::string>(size, "model", src);
        if (size_model == "fixed") {
            reject_unknown_keys(size, {"model", "bytes"}, src, "size");
            p.size_model = FixedSize{require<double>(size, "bytes", src)};
        } else if (size_model == "normal") {
            reject_unknown_keys(size, {"model", "mean", "stddev"}, src, "size");
            p.size_model = NormalSize{require<double>(size, "mean", src), require<double>(size, "stddev", src)};
        } else if (size_model == "bimodal") {
            reject_unknown_keys(size, {"model", "small", "large", "large_prob"}, src, "size");
            p.size_model = BimodalSize{require<double>(size, "small", src), require<double>(size, "large", src),
                                       require<double>(size, "large_prob", src)};
        } else {
            throw Error(ErrorCode::Config, src.where(size) + ": key 'model' must be fixed, normal or bimodal");
        }

        p.uplink_fraction = require<double>(node, "uplink_fraction", src);
        p.protocol_mix = require<double>(node, "protocol_mix", src);
        if (const auto burst = node["burst"]) {
            reject_unknown_keys(burst, {"length", "gap"}, src, "burst");
            p.burst = Burst{require<int>(burst, "length", src), require<double>(burst, "gap", src)};
        }

        try {
            validate_profile(p);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidProfile, src.where(node) + ": " + e.what());
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<ClassProfile> load_profiles(const std::filesystem::path& path) {
    auto in = std::ifstream(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_profiles(text, path.string());
}

std::vector<ClassProfile> default_profiles() {
    return parse_profiles(std::string(detail::kDefaultProfilesYaml), "config/profiles.yaml");
}

}  // namespace jointflow
