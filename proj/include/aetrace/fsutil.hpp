#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace aetrace {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Writes only when content differs from what is on disk; returns true when a
// write happened. Keeps stage re-runs free of filesystem mutations.
bool write_file_if_changed(const std::filesystem::path& path, std::string_view content);

// Write-to-temp-then-rename so concurrent readers never see partial content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace aetrace
