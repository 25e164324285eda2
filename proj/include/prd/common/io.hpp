#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace prd {

// Writes `content` to a sibling temp file and renames it over `path`.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Shortest round-trippable decimal representation of a double.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
std::string to_csv(const CsvTable& table);

}  // namespace prd
