#pragma once

#include <filesystem>
#include <string>

namespace medml {

// 17 significant digits (round-trips); "nan"/"inf" spelled out.
std::string format_real(double v);

// Writes through a sibling temporary file and renames it into place, so a
// reader never sees a partial file. Throws Error on I/O failure.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace medml
