// Copyright 2026 The Kinonav Authors
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

// Small text formats shared by the file readers: `key = value` documents
// and numeric CSV tables with a named header.

#ifndef KINONAV_TEXTIO_H_
#define KINONAV_TEXTIO_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kinonav::textio {

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

// Parses a whole token as a finite double; throws DataError naming `what`.
double ParseDouble(std::string_view token, std::string_view what);
long long ParseInt(std::string_view token, std::string_view what);

std::string_view Trim(std::string_view s);
std::vector<std::string_view> Split(std::string_view s, char sep);

// `key = value` lines; blank lines and lines starting with '#' are skipped.
// Duplicate keys and lines without '=' throw DataError with the line number.
std::map<std::string, std::string> ParseKeyValues(std::string_view text,
                                                  std::string_view source = "input");

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  // Index of `name` in the header; throws DataError when absent.
  std::size_t Column(std::string_view name) const;
};

// Numeric CSV with a header line. Every row must have the header's width.
// Errors name `source` and the 1-based line number.
CsvTable ParseCsv(std::string_view text, std::string_view source = "input");

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace kinonav::textio

#endif  // KINONAV_TEXTIO_H_
