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

#include "clipcurate/csv.h"

#include <random>
#include <string>
#include <vector>

#include "doctest.h"

namespace clipcurate {
namespace {

TEST_CASE("plain and quoted fields") {
  auto rows = ParseCsv("a,b,c\n1,\"x,y\",\"he said \"\"hi\"\"\"\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == CsvRow{"a", "b", "c"});
  CHECK(rows[1] == CsvRow{"1", "x,y", "he said \"hi\""});
}

TEST_CASE("CRLF, embedded newline, empty fields, no trailing newline") {
  auto rows = ParseCsv("a,,\r\n\"l1\nl2\",z\r\nlast,row");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == CsvRow{"a", "", ""});
  CHECK(rows[1] == CsvRow{"l1\nl2", "z"});
  CHECK(rows[2] == CsvRow{"last", "row"});
}

TEST_CASE("empty input") { CHECK(ParseCsv("").empty()); }

TEST_CASE("malformed quoting is rejected with a line number") {
  CHECK_THROWS_AS(ParseCsv("a,\"unterminated\n"), CsvError);
  CHECK_THROWS_AS(ParseCsv("a,\"x\"y\n"), CsvError);
  try {
    ParseCsv("ok\nfine\n\"bad\"x\n");
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("CsvTable column lookup and field count check") {
  CsvTable t("fname,labels\n1,\"a,b\"\n");
  CHECK(t.column("labels") == 1);
  CHECK(t.rows()[0][1] == "a,b");
  CHECK(t.has_column("fname"));
  CHECK_THROWS_AS(t.column("split"), CsvError);
  CHECK_THROWS_AS(CsvTable("a,b\n1\n"), CsvError);
}

TEST_CASE("escape round-trips random fields") {
  std::mt19937 gen(11);
  const std::string alphabet = "ab,\"\r\n x";
  for (int trial = 0; trial < 500; ++trial) {
    CsvRow row;
    const int n = 1 + static_cast<int>(gen() % 4);
    for (int i = 0; i < n; ++i) {
      std::string f;
      const int len = static_cast<int>(gen() % 6);
      for (int j = 0; j < len; ++j) f.push_back(alphabet[gen() % alphabet.size()]);
      row.push_back(f);
    }
    if (row.size() == 1 && row[0].empty()) continue;  // an empty line is not a row
    auto parsed = ParseCsv(CsvLine(row));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == row);
  }
}

TEST_CASE("CsvEscape quotes only when needed") {
  CHECK(CsvEscape("plain") == "plain");
  CHECK(CsvEscape("a,b") == "\"a,b\"");
  CHECK(CsvEscape("q\"") == "\"q\"\"\"");
}

}  // namespace
}  // namespace clipcurate
