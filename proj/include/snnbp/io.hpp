#pragma once

#include <filesystem>
#include <string>

namespace snnbp {

// Shortest decimal form that round-trips a double exactly.
std::string fmt_double(double v);

// Writes via a sibling temp file and renames into place, so readers never
// observe a truncated file.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace snnbp
