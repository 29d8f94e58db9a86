#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace memsim::io {

// Shortest decimal form that round-trips to the same double. All file
// output goes through this so byte-identical reruns only require identical
// computed values.
std::string format_double(double v);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames into place, so a failed command
// never leaves a partial output behind.
void atomic_write(const std::filesystem::path& path, std::string_view content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Parses a simple comma-separated file (no quoting; none of our formats
// need it). Verifies the header when `expected_header` is non-empty.
CsvTable read_csv(const std::filesystem::path& path,
                  std::string_view expected_header = {});

}  // namespace memsim::io
