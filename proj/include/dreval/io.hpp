#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dreval {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Throws Error(Io) when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Write-temp-then-rename so concurrent readers never see partial content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace dreval
