#include "jointflow/text_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "jointflow/error.hpp"

namespace jointflow {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw Error(ErrorCode::Io, "cannot format double");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view field) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    if (field.empty() || field == "nan") return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::Parse, "not a number: '" + std::string(field) + "'");
    }
    return value;
}

long long parse_int(std::string_view field) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw Error(ErrorCode::Parse, "not an integer: '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for reading");
    return in;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error(ErrorCode::Parse, "missing CSV column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Parse, path.string() + ": empty file, header expected");
    for (auto f : split_csv(line)) table.header.emplace_back(f);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv(line);
        if (fields.size() != table.header.size()) {
            throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(table.header.size()) + " fields, got " +
                                              std::to_string(fields.size()));
        }
        auto& row = table.rows.emplace_back();
        for (auto f : fields) row.emplace_back(f);
    }
    return table;
}

}  // namespace jointflow
