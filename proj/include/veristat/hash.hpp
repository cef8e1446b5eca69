#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace veristat {

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's contents. Throws LoadError if it cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace veristat
