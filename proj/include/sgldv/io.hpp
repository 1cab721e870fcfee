#pragma once

#include <string>
#include <vector>

namespace sgldv {

// Writes content to path via a temporary sibling file and rename, so readers
// never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string csv_row(const std::vector<std::string>& cells);

}  // namespace sgldv
