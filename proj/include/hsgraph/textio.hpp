#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hsgraph {

/// Shortest round-trip decimal form; not-a-value renders as "NA".
std::string format_number(double value);

/// Splits one CSV record. Handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv(std::string_view line);

/// Quotes a field only when it contains a separator, quote or newline.
std::string csv_field(std::string_view text);

/// Parses a CSV number cell; "NA", "nan" and empty become not-a-value.
double parse_number(std::string_view cell);

/// Writes `content` to `path` through a sibling temp file and a rename.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace hsgraph
