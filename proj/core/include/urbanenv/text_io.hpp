// Copyright 2026 The urbanenv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text helpers shared by the file formats: RFC 4180 style CSV,
// `key = value` files, and the fixed number formats used on disk.

#ifndef URBANENV_TEXT_IO_HPP
#define URBANENV_TEXT_IO_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace urbanenv {

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;

  /// Index of a header column, or throws ParseError.
  std::size_t column(std::string_view name) const;
};

/// Parses CSV text. Lines starting with '#' before the header are skipped and
/// returned through `comments` when given. Rows must match the header width.
CsvTable parse_csv(std::string_view text, std::vector<std::string>* comments = nullptr);
CsvTable read_csv(const std::filesystem::path& path,
                  std::vector<std::string>* comments = nullptr);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);
/// Joins escaped fields with commas and ends the line with a newline.
std::string csv_line(const CsvRow& fields);

/// Ordered `key = value` pairs. '#' starts a comment when it is the first
/// non-blank character of a line; blank lines are ignored.
struct KeyValueFile {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::size_t> lines;
};

KeyValueFile parse_key_value(std::string_view text);
KeyValueFile read_key_value(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
std::string read_binary_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string trim(std::string_view s);

/// "%.9g": enough digits for float32 values to round-trip exactly.
std::string format_g9(double v);
/// "%.6f" with negative zero printed as "0.000000".
std::string format_fixed6(double v);
/// Shortest representation that parses back to the same double.
std::string format_exact(double v);

/// Strict numeric parsing: the whole field must be consumed.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace urbanenv

#endif  // URBANENV_TEXT_IO_HPP
