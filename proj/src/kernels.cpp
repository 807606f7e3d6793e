#include "fairaudit/kernels.hpp"

#include <cassert>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fairaudit::kernels {

namespace {

// Below this size thread start-up costs more than the tally itself.
constexpr std::size_t kParallelThreshold = 1 << 14;

inline void tally_one(ConfusionCounts& c, std::uint8_t truth, std::uint8_t pred,
                      std::uint8_t positive) {
  const bool actual = truth == positive;
  const bool predicted = pred == positive;
  if (actual) {
    predicted ? ++c.tp : ++c.fn;
  } else {
    predicted ? ++c.fp : ++c.tn;
  }
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<std::size_t> cell_histogram_serial(std::span<const std::uint32_t> cells,
                                               std::size_t n_cells) {
  std::vector<std::size_t> counts(n_cells, 0);
  for (std::uint32_t c : cells) {
    assert(c < n_cells);
    ++counts[c];
  }
  return counts;
}

std::vector<std::size_t> cell_histogram(std::span<const std::uint32_t> cells, std::size_t n_cells) {
#ifdef _OPENMP
  if (cells.size() < kParallelThreshold || omp_get_max_threads() == 1) {
    return cell_histogram_serial(cells, n_cells);
  }
  std::vector<std::size_t> counts(n_cells, 0);
  const auto n = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel
  {
    std::vector<std::size_t> local(n_cells, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) ++local[cells[i]];
#pragma omp critical(fairaudit_histogram_merge)
    for (std::size_t c = 0; c < n_cells; ++c) counts[c] += local[c];
  }
  return counts;
#else
  return cell_histogram_serial(cells, n_cells);
#endif
}

std::vector<ConfusionCounts> confusion_tally_serial(std::span<const std::uint32_t> groups,
                                                    std::span<const std::uint8_t> y_true,
                                                    std::span<const std::uint8_t> y_pred,
                                                    std::size_t n_groups, std::uint8_t positive) {
  assert(groups.size() == y_true.size() && groups.size() == y_pred.size());
  std::vector<ConfusionCounts> out(n_groups);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    tally_one(out[groups[i]], y_true[i], y_pred[i], positive);
  }
  return out;
}

std::vector<ConfusionCounts> confusion_tally(std::span<const std::uint32_t> groups,
                                             std::span<const std::uint8_t> y_true,
                                             std::span<const std::uint8_t> y_pred,
                                             std::size_t n_groups, std::uint8_t positive) {
#ifdef _OPENMP
  if (groups.size() < kParallelThreshold || omp_get_max_threads() == 1) {
    return confusion_tally_serial(groups, y_true, y_pred, n_groups, positive);
  }
  assert(groups.size() == y_true.size() && groups.size() == y_pred.size());
  std::vector<ConfusionCounts> out(n_groups);
  const auto n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel
  {
    std::vector<ConfusionCounts> local(n_groups);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) tally_one(local[groups[i]], y_true[i], y_pred[i], positive);
#pragma omp critical(fairaudit_confusion_merge)
    for (std::size_t g = 0; g < n_groups; ++g) {
      out[g].tp += local[g].tp;
      out[g].fp += local[g].fp;
      out[g].fn += local[g].fn;
      out[g].tn += local[g].tn;
    }
  }
  return out;
#else
  return confusion_tally_serial(groups, y_true, y_pred, n_groups, positive);
#endif
}

}  // namespace fairaudit::kernels
