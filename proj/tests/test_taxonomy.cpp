#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "fairaudit/error.hpp"
#include "fairaudit/taxonomy.hpp"
#include "oracle.hpp"

using namespace fairaudit;

namespace {

ErrorCode code_of(const std::string& doc) {
  std::istringstream in(doc);
  try {
    load_taxonomy(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("table1 preset is the 3 x 9 x 10 lattice") {
  const auto tax = DemographicTaxonomy::preset("table1");
  CHECK(tax.genders().size() == 3);
  CHECK(tax.races().size() == 9);
  CHECK(tax.age_bins().size() == 10);
  CHECK(tax.cell_count() == 270);
  CHECK(tax.age_bins().front().label == "0-2");
  CHECK(tax.age_bins()[1].label == "3-7");
  CHECK(tax.age_bins()[2].label == "8-15");
  CHECK(tax.age_bins().back().label == "71-100");
}

TEST_CASE("eval preset uses decade bins") {
  const auto tax = DemographicTaxonomy::preset("eval");
  CHECK(bin_age(65, tax) == "60-69");
  CHECK(bin_age(25, tax) == "20-29");
  CHECK(bin_age(5, tax) == "3-9");
  CHECK(bin_age(90, tax) == "70+");
  CHECK(bin_age(1, tax) == "0-2");
}

TEST_CASE("bin_age on table1") {
  const auto tax = DemographicTaxonomy::preset("table1");
  CHECK(bin_age(2, tax) == "0-2");
  CHECK(bin_age(0, tax) == "0-2");
  CHECK(bin_age(3, tax) == "3-7");
  CHECK(bin_age(100, tax) == "71-100");
  CHECK_THROWS_AS(bin_age(101, tax), Error);
  try {
    bin_age(101, tax);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnbinnableAge);
  }
  CHECK_THROWS_AS(bin_age(-1, tax), Error);
}

TEST_CASE("bin_age agrees with a linear scan, including gaps") {
  std::istringstream in(R"({"gender":["M","F"],"race":["A"],
    "age_bins":[{"label":"young","min":0,"max":9},{"label":"mid","min":20,"max":39},{"label":"old","min":60,"max":80}]})");
  const auto gappy = load_taxonomy(in);
  for (const auto& tax : {DemographicTaxonomy::preset("table1"), DemographicTaxonomy::preset("eval"), gappy}) {
    for (int age = 0; age <= 160; ++age) {
      const auto expected = oracle::bin_by_scan(age, tax);
      const auto index = tax.age_bin_index(age);
      REQUIRE(index.has_value() == expected.has_value());
      if (expected) CHECK(tax.age_bins()[*index].label == *expected);
    }
  }
}

TEST_CASE("document errors") {
  CHECK(code_of(R"({"gender":["M"],"race":["A"],"age_bins":[{"label":"a","min":0,"max":5},{"label":"b","min":4,"max":10}]})") ==
        ErrorCode::BinOverlap);
  CHECK(code_of(R"({"gender":["M","M"],"race":["A"],"age_bins":[{"label":"a","min":0,"max":5}]})") ==
        ErrorCode::DuplicateSubgroup);
  CHECK(code_of(R"({"gender":[],"race":["A"],"age_bins":[{"label":"a","min":0,"max":5}]})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"gender":["M"],"race":["A"],"age_bins":[{"label":"a","min":6,"max":5}]})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"gender":["M"],"race":["A"]})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"gender":["M"],"race":["A"],"age_bins":[{"label":"a","min":0,"max":5}],"fallback":{"race":"Z"}})") ==
        ErrorCode::UnknownSubgroup);
}

TEST_CASE("malformed JSON reports line and column") {
  std::istringstream in("{\n  \"gender\": [\"M\",\n  oops\n}");
  try {
    load_taxonomy(in);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.row() == 3);
    CHECK(e.column().has_value());
  }
}

TEST_CASE("unsorted bins are ordered by lower bound") {
  std::istringstream in(R"({"gender":["M"],"race":["A"],
    "age_bins":[{"label":"old","min":50,"max":99},{"label":"young","min":0,"max":49}]})");
  const auto tax = load_taxonomy(in);
  CHECK(tax.age_bins()[0].label == "young");
  CHECK(bin_age(70, tax) == "old");
}

TEST_CASE("to_json round-trips") {
  for (const char* name : {"table1", "eval"}) {
    const auto tax = DemographicTaxonomy::preset(name);
    std::istringstream in(tax.to_json().dump());
    CHECK(load_taxonomy(in) == tax);
  }
}

TEST_CASE("cell index and key are inverse") {
  const auto tax = DemographicTaxonomy::preset("table1");
  for (std::size_t c = 0; c < tax.cell_count(); ++c) {
    const auto key = tax.cell_key(c);
    REQUIRE(tax.cell_index(key) == c);
  }
  CHECK(tax.cell_key(0) == GroupKey{"Male", "White", "0-2"});
  CHECK(tax.cell_key(269) == GroupKey{"Other", "Other", "71-100"});
}

TEST_CASE("unknown preset") { CHECK_THROWS_AS(DemographicTaxonomy::preset("nope"), Error); }
