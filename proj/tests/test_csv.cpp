#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"

using namespace fairaudit;

TEST_CASE("quoted fields keep commas, quotes and newlines") {
  std::istringstream in("a,b,c\n\"x, y\",\"say \"\"hi\"\"\",\"two\nlines\"\nlast,,\n");
  const auto rows = csv::read_all(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].fields == std::vector<std::string>{"x, y", "say \"hi\"", "two\nlines"});
  CHECK(rows[1].line == 2);
  CHECK(rows[2].line == 4);
  CHECK(rows[2].fields == std::vector<std::string>{"last", "", ""});
}

TEST_CASE("CRLF and missing final newline") {
  std::istringstream in("h1,h2\r\n1,2\r\n3,4");
  const auto rows = csv::read_all(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].fields == std::vector<std::string>{"3", "4"});
}

TEST_CASE("blank lines are skipped") {
  std::istringstream in("h\n\n1\n\n");
  CHECK(csv::read_all(in).size() == 2);
}

TEST_CASE("unterminated quote reports where it opened") {
  std::istringstream in("h1,h2\n1,\"open\n");
  try {
    csv::read_all(in);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.row() == 2);
    CHECK(e.column() == 3);
  }
}

TEST_CASE("text after closing quote is rejected") {
  std::istringstream in("\"a\"b\n");
  CHECK_THROWS_AS(csv::read_all(in), Error);
}

TEST_CASE("escape round-trips through the reader") {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "", "line\nbreak"};
  std::ostringstream out;
  csv::write_row(out, fields);
  std::istringstream in(out.str());
  const auto rows = csv::read_all(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].fields == fields);
  CHECK(csv::escape("plain") == "plain");
}
