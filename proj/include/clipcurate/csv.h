// Copyright 2026 The clipcurate Authors.
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

#ifndef CLIPCURATE_CSV_H_
#define CLIPCURATE_CSV_H_

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace clipcurate {

using CsvRow = std::vector<std::string>;

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Accepts LF and CRLF line endings. A trailing empty line is ignored.
std::vector<CsvRow> ParseCsv(std::string_view text);

// Column-name lookup over a header row.
class CsvTable {
 public:
  explicit CsvTable(std::string_view text);

  const CsvRow& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }
  bool has_column(const std::string& name) const { return index_.count(name) > 0; }
  // Throws CsvError when the column is missing.
  std::size_t column(const std::string& name) const;

 private:
  CsvRow header_;
  std::vector<CsvRow> rows_;
  std::map<std::string, std::size_t> index_;
};

// Quotes only when the field contains a comma, quote, CR or LF.
std::string CsvEscape(std::string_view field);
std::string CsvLine(const CsvRow& fields);

}  // namespace clipcurate

#endif  // CLIPCURATE_CSV_H_
