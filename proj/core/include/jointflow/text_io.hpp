#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace jointflow {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Parses a full-field double; NaN for an empty field. Throws Error(Parse).
double parse_double(std::string_view field);

long long parse_int(std::string_view field);

/// Splits one CSV line on commas. No quoting: none of our formats need it.
std::vector<std::string_view> split_csv(std::string_view line);

/// Opens a file for writing, creating parent directories. Throws Error(Io)
/// naming the path on failure.
std::ofstream open_output(const std::filesystem::path& path);

std::ifstream open_input(const std::filesystem::path& path);

/// Row-oriented CSV table with a header, used when rereading reports and logs.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws Error(Parse) when absent.
    std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace jointflow
