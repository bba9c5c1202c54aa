#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace semask {

/// Root directory holding prompts/ and data/. SEMASK_RESOURCE_DIR in the
/// environment wins over the compiled-in source directory.
std::filesystem::path resource_root();

/// resource_root() / relative
std::filesystem::path resource_path(std::string_view relative);

/// Reads a whole file as bytes; throws std::runtime_error when unreadable.
std::string read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace semask
