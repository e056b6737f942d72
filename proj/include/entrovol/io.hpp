#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace entrovol::io {

/// Whole-file read; throws IoFailure naming the path.
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Fixed-point rendering with at least 10 significant digits (and at least
/// 10 decimals), e.g. 0.5 -> "0.5000000000". Non-finite values render as "nan"/"inf"/"-inf".
std::string format_value(double v);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace entrovol::io
