#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace opdrift {

// Whole-file read; throws InputError when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames over the target so readers never observe
// a partially written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Flat "key = value" text. Blank lines and lines starting with '#' are ignored;
// keys are trimmed, and a repeated key throws InputError.
std::map<std::string, std::string> parse_key_values(std::string_view text);

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_row(std::string_view line);

// Quotes a field only when it contains a comma, quote or newline.
std::string csv_field(std::string_view field);

std::string_view trim(std::string_view s) noexcept;

// Round-trippable decimal rendering (17 significant digits).
std::string format_double(double v);

}  // namespace opdrift
