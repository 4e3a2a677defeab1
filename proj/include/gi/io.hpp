#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gi {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames it over `path`, so
// concurrent readers see either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace gi
