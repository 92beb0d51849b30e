#pragma once

// Internal helpers for reading yaml-cpp nodes with errors that name the
// offending key and source line.

#include <yaml-cpp/yaml.h>

#include <optional>
#include <string>

#include "jointflow/error.hpp"

namespace jointflow::detail {

struct YamlSource {
    std::string name;  ///< file path or "<embedded>"

    std::string where(const YAML::Node& node) const {
        const auto mark = node.Mark();
        if (mark.line < 0) return name;
        return name + ":" + std::to_string(mark.line + 1);
    }
};

inline YAML::Node load_yaml_string(const std::string& text, const YamlSource& src) {
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::Config, src.name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

inline YAML::Node load_yaml_file(const std::string& path) {
    try {
        return YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw Error(ErrorCode::Io, "cannot open " + path);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::Config, path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

template <typename T>
T as(const YAML::Node& node, const std::string& key, const YamlSource& src) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw Error(ErrorCode::Config, src.where(node) + ": key '" + key + "' has an invalid value '" +
                                           (node.IsScalar() ? node.Scalar() : std::string("<non-scalar>")) + "'");
    }
}

template <typename T>
T require(const YAML::Node& parent, const std::string& key, const YamlSource& src) {
    const auto node = parent[key];
    if (!node) throw Error(ErrorCode::Config, src.where(parent) + ": missing key '" + key + "'");
    return as<T>(node, key, src);
}

template <typename T>
T optional_or(const YAML::Node& parent, const std::string& key, T fallback, const YamlSource& src) {
    const auto node = parent[key];
    if (!node) return fallback;
    return as<T>(node, key, src);
}

/// Throws naming the first key of `node` not in `allowed`.
inline void reject_unknown_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed,
                                const YamlSource& src, const std::string& section) {
    if (!node.IsMap()) {
        throw Error(ErrorCode::Config, src.where(node) + ": section '" + section + "' must be a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.Scalar();
        bool known = false;
        for (auto a : allowed) known = known || a == key;
        if (!known) throw Error(ErrorCode::Config, src.where(kv.first) + ": unknown key '" + key + "' in " + section);
    }
}

}  // namespace jointflow::detail
