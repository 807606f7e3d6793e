#ifndef FAIRAUDIT_KERNELS_HPP
#define FAIRAUDIT_KERNELS_HPP

// Data-parallel tallies behind the audit and fairness modules. Each kernel
// has an OpenMP version and a serial reference with identical results; the
// serial twins back the unit tests and the benchmark.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fairaudit::kernels {

/// counts[c] = number of entries equal to c. Entries must be < n_cells.
std::vector<std::size_t> cell_histogram(std::span<const std::uint32_t> cells, std::size_t n_cells);
std::vector<std::size_t> cell_histogram_serial(std::span<const std::uint32_t> cells,
                                               std::size_t n_cells);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Per-group confusion cells with `positive` as the positive class value.
std::vector<ConfusionCounts> confusion_tally(std::span<const std::uint32_t> groups,
                                             std::span<const std::uint8_t> y_true,
                                             std::span<const std::uint8_t> y_pred,
                                             std::size_t n_groups, std::uint8_t positive);
std::vector<ConfusionCounts> confusion_tally_serial(std::span<const std::uint32_t> groups,
                                                    std::span<const std::uint8_t> y_true,
                                                    std::span<const std::uint8_t> y_pred,
                                                    std::size_t n_groups, std::uint8_t positive);

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace fairaudit::kernels

#endif  // FAIRAUDIT_KERNELS_HPP
