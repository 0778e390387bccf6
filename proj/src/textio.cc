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

#include "kinonav/textio.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "kinonav/common.h"

namespace kinonav::textio {

std::string FormatDouble(double value) { return fmt::format("{}", value); }

double ParseDouble(std::string_view token, std::string_view what) {
  const std::string_view t = Trim(token);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size() || !std::isfinite(value)) {
    throw DataError(fmt::format("{}: expected a number, got '{}'", what, t));
  }
  return value;
}

long long ParseInt(std::string_view token, std::string_view what) {
  const std::string_view t = Trim(token);
  long long value = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size()) {
    throw DataError(fmt::format("{}: expected an integer, got '{}'", what, t));
  }
  return value;
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::map<std::string, std::string> ParseKeyValues(std::string_view text,
                                                  std::string_view source) {
  std::map<std::string, std::string> out;
  int line_no = 0;
  for (std::string_view line : Split(text, '\n')) {
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(fmt::format("{}:{}: expected 'key = value'", source, line_no));
    }
    const std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) throw DataError(fmt::format("{}:{}: empty key", source, line_no));
    if (!out.emplace(key, std::string(Trim(line.substr(eq + 1)))).second) {
      throw DataError(fmt::format("{}:{}: duplicate key '{}'", source, line_no, key));
    }
  }
  return out;
}

std::size_t CsvTable::Column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError(fmt::format("missing CSV column '{}'", name));
}

CsvTable ParseCsv(std::string_view text, std::string_view source) {
  CsvTable table;
  int line_no = 0;
  for (std::string_view line : Split(text, '\n')) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::vector<std::string_view> fields = Split(line, ',');
    if (table.header.empty()) {
      for (std::string_view f : fields) table.header.emplace_back(Trim(f));
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}", source, line_no,
                                  table.header.size(), fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::string_view f : fields) {
      row.push_back(ParseDouble(f, fmt::format("{}:{}", source, line_no)));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw DataError(fmt::format("{}: empty CSV", source));
  return table;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace kinonav::textio
