// Serial vs OpenMP timings for the tally kernels.
//   bench_kernels [n_records] [repeats]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "fairaudit/kernels.hpp"

using namespace fairaudit;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s < best) best = s;
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20'000'000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  const std::size_t n_cells = 270;
  const std::size_t n_groups = 27;

  std::mt19937_64 gen(1);
  std::vector<std::uint32_t> cells(n), groups(n);
  std::vector<std::uint8_t> yt(n), yp(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = gen();
    cells[i] = static_cast<std::uint32_t>(r % n_cells);
    groups[i] = static_cast<std::uint32_t>((r >> 16) % n_groups);
    yt[i] = static_cast<std::uint8_t>((r >> 40) & 1);
    yp[i] = static_cast<std::uint8_t>((r >> 41) & 1);
  }

  std::size_t sink = 0;
  const double hs = best_of(repeats, [&] { sink += kernels::cell_histogram_serial(cells, n_cells)[0]; });
  const double hp = best_of(repeats, [&] { sink += kernels::cell_histogram(cells, n_cells)[0]; });
  const double cs = best_of(repeats, [&] { sink += kernels::confusion_tally_serial(groups, yt, yp, n_groups, 1)[0].tp; });
  const double cp = best_of(repeats, [&] { sink += kernels::confusion_tally(groups, yt, yp, n_groups, 1)[0].tp; });

  std::printf("records=%zu threads=%d repeats=%d\n", n, kernels::max_threads(), repeats);
  std::printf("%-16s %12s %12s %8s\n", "kernel", "serial_ms", "openmp_ms", "speedup");
  std::printf("%-16s %12.2f %12.2f %8.2f\n", "cell_histogram", hs * 1e3, hp * 1e3, hs / hp);
  std::printf("%-16s %12.2f %12.2f %8.2f\n", "confusion_tally", cs * 1e3, cp * 1e3, cs / cp);
  return sink == 0 ? 1 : 0;
}
