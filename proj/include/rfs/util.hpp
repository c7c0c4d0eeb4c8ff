#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rfs {

/// RFC-4180 style parser: quoted fields, doubled quotes, embedded delimiters
/// and newlines; CRLF and LF line endings. Returns one vector per record.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, char delimiter = ',');

/// Quotes a field when it contains the delimiter, a quote or a line break.
std::string csv_escape(std::string_view field, char delimiter = ',');

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Round-trippable, locale-independent rendering of a double ("%.17g").
std::string format_double(double v);

/// 64-bit FNV-1a, used for config and dataset fingerprints.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace rfs
