#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fairaudit/audit.hpp"
#include "fairaudit/error.hpp"
#include "oracle.hpp"

using namespace fairaudit;

namespace {

GroupKey key(const oracle::Cell& c) { return {std::get<0>(c), std::get<1>(c), std::get<2>(c)}; }

}  // namespace

TEST_CASE("hand example: two cells, one attribute fully covered") {
  std::istringstream in(R"({"gender":["M","F"],"race":["A","B","C"],
    "age_bins":[{"label":"kid","min":0,"max":17},{"label":"adult","min":18,"max":99}]})");
  const auto tax = load_taxonomy(in);
  const auto m = oracle::manifest_with_counts(tax, {{{"M", "A", "kid"}, 1}, {{"F", "A", "kid"}, 3}});
  const auto report = audit(m);
  // gender 2/2, race 1/3, age 1/2
  CHECK(report.inclusivity.R == doctest::Approx((1.0 + 1.0 / 3.0 + 0.5) / 3.0));
  CHECK(report.inclusivity.per_attribute[1].missing_subgroups == std::vector<std::string>{"B", "C"});
  CHECK(report.diversity.D == doctest::Approx(1.0 / 3.0));
  CHECK(report.diversity.min_cell == GroupKey{"M", "A", "kid"});
  CHECK(report.diversity.max_cell == GroupKey{"F", "A", "kid"});
  CHECK(report.grs.size() == 2);
  CHECK(report.missing_cells.size() == 10);
  CHECK(diversity(m, DiversityConvention::all_cells).D == 0.0);
}

TEST_CASE("ties resolve to the earliest cell") {
  const auto tax = DemographicTaxonomy::preset("table1");
  const auto m = oracle::manifest_with_counts(
      tax, {{{"Female", "Black", "3-7"}, 2}, {{"Male", "White", "0-2"}, 2}, {{"Male", "Indian", "0-2"}, 2}});
  const auto d = diversity(m);
  CHECK(d.D == 1.0);
  CHECK(d.min_cell == GroupKey{"Male", "White", "0-2"});
  CHECK(d.max_cell == GroupKey{"Male", "White", "0-2"});
}

TEST_CASE("empty manifest") {
  const auto tax = DemographicTaxonomy::preset("table1");
  const Manifest m(tax, {});
  CHECK(inclusivity(m).R == 0.0);
  CHECK_THROWS_AS(diversity(m), Error);
  CHECK_THROWS_AS(group_representation_shares(m), Error);
  CHECK(missing_cells(m).size() == 270);
}

TEST_CASE("all-cells convention on a full lattice equals observed") {
  std::istringstream in(R"({"gender":["M","F"],"race":["A"],"age_bins":[{"label":"x","min":0,"max":99}]})");
  const auto tax = load_taxonomy(in);
  const auto m = oracle::manifest_with_counts(tax, {{{"M", "A", "x"}, 2}, {{"F", "A", "x"}, 5}});
  CHECK(diversity(m, DiversityConvention::all_cells).D == doctest::Approx(0.4));
  CHECK(diversity(m).D == doctest::Approx(0.4));
}

TEST_CASE("random manifests agree with the brute-force recount") {
  std::mt19937_64 gen(2024);
  for (const char* preset : {"table1", "eval"}) {
    const auto tax = DemographicTaxonomy::preset(preset);
    for (int trial = 0; trial < 100; ++trial) {
      const auto m = oracle::random_manifest(tax, gen, 300);
      const auto got = audit(m);
      const auto want = oracle::audit(m);
      REQUIRE(std::fabs(got.inclusivity.R - want.R) <= 1e-12);
      REQUIRE(want.D.has_value());
      REQUIRE(std::fabs(got.diversity.D - *want.D) <= 1e-12);
      REQUIRE(got.grs.size() == want.shares.size());
      for (std::size_t i = 0; i < got.grs.size(); ++i) {
        REQUIRE(got.grs[i].cell == key(want.shares[i].first));
        REQUIRE(std::fabs(got.grs[i].share - want.shares[i].second) <= 1e-12);
      }
      REQUIRE(got.missing_cells.size() == want.missing_cells.size());
      bool none_missing = want.missing_subgroups.empty();
      CHECK((got.inclusivity.R == 1.0) == none_missing);
    }
  }
}

TEST_CASE("json layout") {
  const auto tax = DemographicTaxonomy::preset("table1");
  const auto m = oracle::manifest_with_counts(tax, {{{"Male", "White", "0-2"}, 1}});
  const auto doc = to_json(audit(m), "demo");
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"dataset", "n", "inclusivity", "diversity", "grs", "missing_cells"});
  CHECK(doc["diversity"]["convention"] == "observed");
  CHECK(doc["grs"][0]["share"] == 1.0);
}
