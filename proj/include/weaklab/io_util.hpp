#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace weaklab {

/// Writes to a sibling temp file, then renames over `path`. Nothing is left
/// behind on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace weaklab
