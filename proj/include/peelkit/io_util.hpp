#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace peelkit {

/// Whole file as bytes; throws Error(Io) if it cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it over `path`, so readers never
/// observe a partial file. Throws Error(Io).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Lower-cased extension including the dot, e.g. ".ply".
std::string lower_extension(const std::filesystem::path& path);

} // namespace peelkit
