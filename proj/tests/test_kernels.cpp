#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fairaudit/kernels.hpp"

using namespace fairaudit;

namespace {

// Large enough to clear the serial cutoff inside the kernels.
constexpr std::size_t kBig = 200'000;

void force_threads() {
#ifdef _OPENMP
  omp_set_num_threads(4);
#endif
}

}  // namespace

TEST_CASE("histogram: parallel equals serial") {
  force_threads();
  std::mt19937_64 gen(3);
  for (std::size_t n_cells : {1u, 7u, 270u, 5000u}) {
    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{999}, kBig}) {
      std::vector<std::uint32_t> cells(n);
      for (auto& c : cells) c = static_cast<std::uint32_t>(gen() % n_cells);
      const auto par = kernels::cell_histogram(cells, n_cells);
      const auto ser = kernels::cell_histogram_serial(cells, n_cells);
      CHECK(par == ser);
      std::size_t total = 0;
      for (auto c : ser) total += c;
      CHECK(total == n);
    }
  }
}

TEST_CASE("histogram by hand") {
  const std::vector<std::uint32_t> cells{0, 2, 2, 4, 2};
  CHECK(kernels::cell_histogram(cells, 5) == std::vector<std::size_t>{1, 0, 3, 0, 1});
}

TEST_CASE("confusion: parallel equals serial") {
  force_threads();
  std::mt19937_64 gen(5);
  for (std::size_t n_groups : {1u, 5u, 27u}) {
    for (std::size_t n : {std::size_t{10}, kBig}) {
      std::vector<std::uint32_t> groups(n);
      std::vector<std::uint8_t> yt(n), yp(n);
      for (std::size_t i = 0; i < n; ++i) {
        groups[i] = static_cast<std::uint32_t>(gen() % n_groups);
        yt[i] = static_cast<std::uint8_t>(gen() % 2);
        yp[i] = static_cast<std::uint8_t>(gen() % 2);
      }
      for (std::uint8_t positive : {std::uint8_t{0}, std::uint8_t{1}}) {
        CHECK(kernels::confusion_tally(groups, yt, yp, n_groups, positive) ==
              kernels::confusion_tally_serial(groups, yt, yp, n_groups, positive));
      }
    }
  }
}

TEST_CASE("confusion by hand, positive class swaps tp and tn") {
  const std::vector<std::uint32_t> groups{0, 0, 0, 0, 1};
  const std::vector<std::uint8_t> yt{1, 1, 0, 0, 1};
  const std::vector<std::uint8_t> yp{1, 0, 1, 0, 1};
  const auto pos1 = kernels::confusion_tally_serial(groups, yt, yp, 2, 1);
  CHECK(pos1[0] == kernels::ConfusionCounts{1, 1, 1, 1});
  CHECK(pos1[1] == kernels::ConfusionCounts{1, 0, 0, 0});
  const auto pos0 = kernels::confusion_tally_serial(groups, yt, yp, 2, 0);
  CHECK(pos0[1] == kernels::ConfusionCounts{0, 0, 0, 1});
}

TEST_CASE("thread count is positive") { CHECK(kernels::max_threads() >= 1); }
