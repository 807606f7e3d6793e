// Test-only reference computations. Everything here recounts from raw
// record strings with nested loops and never touches the library's dense
// cell indices, kernels or rate helpers.
#ifndef FAIRAUDIT_TESTS_ORACLE_HPP
#define FAIRAUDIT_TESTS_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fairaudit/fairness.hpp"
#include "fairaudit/manifest.hpp"
#include "fairaudit/taxonomy.hpp"

namespace oracle {

using Cell = std::tuple<std::string, std::string, std::string>;

struct Audit {
  double R = 0.0;
  std::map<std::string, std::vector<std::string>> missing_subgroups;  // attribute -> labels
  std::vector<std::pair<Cell, double>> shares;                        // observed cells, lattice order
  std::optional<double> D;                                            // observed convention
  std::vector<Cell> missing_cells;
};

inline Audit audit(const fairaudit::Manifest& manifest) {
  const auto& tax = manifest.taxonomy();
  const auto& records = manifest.records();
  std::vector<std::string> bins;
  for (const auto& b : tax.age_bins()) bins.push_back(b.label);

  Audit out;
  auto coverage = [&](const std::vector<std::string>& labels, const std::string& attr, auto field) {
    std::size_t seen = 0;
    for (const auto& label : labels) {
      bool found = false;
      for (const auto& r : records) found = found || field(r) == label;
      if (found) {
        ++seen;
      } else {
        out.missing_subgroups[attr].push_back(label);
      }
    }
    return static_cast<double>(seen) / static_cast<double>(labels.size());
  };
  const double rg = coverage(tax.genders(), "gender", [](const auto& r) { return r.gender; });
  const double rr = coverage(tax.races(), "race", [](const auto& r) { return r.race; });
  const double ra = coverage(bins, "age", [](const auto& r) { return *r.age_bin; });
  out.R = (rg + rr + ra) / 3.0;

  const double n = static_cast<double>(records.size());
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& g : tax.genders()) {
    for (const auto& race : tax.races()) {
      for (const auto& a : bins) {
        std::size_t count = 0;
        for (const auto& r : records) {
          if (r.gender == g && r.race == race && *r.age_bin == a) ++count;
        }
        if (count == 0) {
          out.missing_cells.emplace_back(g, race, a);
          continue;
        }
        const double share = static_cast<double>(count) / n;
        out.shares.emplace_back(Cell{g, race, a}, share);
        if (!any || share < lo) lo = share;
        if (!any || share > hi) hi = share;
        any = true;
      }
    }
  }
  if (any) out.D = lo / hi;
  return out;
}

/// Age bin by linear scan, independent of the taxonomy's binary search.
inline std::optional<std::string> bin_by_scan(int years, const fairaudit::DemographicTaxonomy& tax) {
  for (const auto& b : tax.age_bins()) {
    if (years >= b.min_years && years <= b.max_years) return b.label;
  }
  return std::nullopt;
}

struct GroupStats {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

inline std::string group_name(const fairaudit::PredictionRecord& r, const std::vector<std::string>& attrs) {
  std::string name;
  for (const auto& a : attrs) {
    if (!name.empty()) name += '+';
    name += a == "gender" ? r.gender : (a == "race" ? r.race : r.age_bin);
  }
  return name;
}

inline std::map<std::string, GroupStats> tally(const std::vector<fairaudit::PredictionRecord>& records,
                                              const std::vector<std::string>& attrs, int positive) {
  std::map<std::string, GroupStats> out;
  for (const auto& r : records) {
    auto& s = out[group_name(r, attrs)];
    const bool actual = r.y_true == positive;
    const bool predicted = r.y_pred == positive;
    if (actual && predicted) ++s.tp;
    if (!actual && predicted) ++s.fp;
    if (actual && !predicted) ++s.fn;
    if (!actual && !predicted) ++s.tn;
  }
  return out;
}

inline double por(const GroupStats& s) { return double(s.tp + s.fp) / double(s.total()); }
inline double acc(const GroupStats& s) { return double(s.tp + s.tn) / double(s.total()); }

/// max over all ordered pairs of |log(acc_j / acc_k)|.
inline double epsilon(const std::vector<double>& accuracies) {
  double best = 0.0;
  for (double a : accuracies) {
    for (double b : accuracies) best = std::max(best, std::fabs(std::log(a / b)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Generators

inline fairaudit::Manifest random_manifest(const fairaudit::DemographicTaxonomy& tax, std::mt19937_64& gen,
                                           std::size_t max_records, const std::string& name = "rand") {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_records);
  const std::size_t n = size_dist(gen);
  // Concentrate on a random subset of labels so that missing subgroups and
  // uneven cells are common.
  auto subset = [&](std::size_t k) {
    std::uniform_int_distribution<std::size_t> d(1, k);
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), gen);
    idx.resize(d(gen));
    return idx;
  };
  const auto gs = subset(tax.genders().size());
  const auto rs = subset(tax.races().size());
  const auto as = subset(tax.age_bins().size());
  std::vector<fairaudit::FaceRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    fairaudit::FaceRecord r;
    r.id = name + "-" + std::to_string(i);
    r.source = name;
    r.gender = tax.genders()[gs[gen() % gs.size()]];
    r.race = tax.races()[rs[gen() % rs.size()]];
    const auto& bin = tax.age_bins()[as[gen() % as.size()]];
    if (gen() % 2) {
      r.age_years = bin.min_years + static_cast<int>(gen() % static_cast<std::uint64_t>(bin.max_years - bin.min_years + 1));
    } else {
      r.age_bin = bin.label;
    }
    records.push_back(std::move(r));
  }
  return fairaudit::Manifest(tax, std::move(records), name);
}

/// Builds a manifest with an explicit count per (gender, race, age_bin).
inline fairaudit::Manifest manifest_with_counts(const fairaudit::DemographicTaxonomy& tax,
                                                const std::vector<std::pair<fairaudit::GroupKey, std::size_t>>& cells,
                                                const std::string& name = "m") {
  std::vector<fairaudit::FaceRecord> records;
  std::size_t id = 0;
  for (const auto& [key, count] : cells) {
    for (std::size_t i = 0; i < count; ++i) {
      fairaudit::FaceRecord r;
      r.id = name + "-" + std::to_string(id++);
      r.source = name;
      r.gender = key.gender;
      r.race = key.race;
      r.age_bin = key.age_bin;
      records.push_back(std::move(r));
    }
  }
  return fairaudit::Manifest(tax, std::move(records), name);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace oracle

#endif  // FAIRAUDIT_TESTS_ORACLE_HPP
