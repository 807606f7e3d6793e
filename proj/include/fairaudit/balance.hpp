#ifndef FAIRAUDIT_BALANCE_HPP
#define FAIRAUDIT_BALANCE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairaudit/error.hpp"
#include "fairaudit/manifest.hpp"
#include "fairaudit/taxonomy.hpp"

namespace fairaudit {

enum class QuotaMode { fixed, min_nonzero, median, max_fillable };

struct QuotaPolicy {
  QuotaMode mode = QuotaMode::median;
  std::size_t fixed_quota = 0;         // used when mode == fixed; must be >= 1
  std::size_t max_augment_factor = 3;  // k: a real record may appear up to k times
  bool allow_undersample = true;

  void validate() const;
};

/// "median", "min" / "min-nonzero", "max-fillable", or a positive integer.
QuotaPolicy parse_quota_policy(std::string_view quota, std::size_t max_augment_factor,
                               bool allow_undersample = true);

enum class ActionKind { keep_all, undersample, augment };

struct CellAction {
  GroupKey cell;
  std::size_t available = 0;
  std::size_t quota = 0;
  ActionKind kind = ActionKind::keep_all;
  std::size_t undersample_to = 0;        // kind == undersample
  std::vector<std::size_t> multipliers;  // kind == augment; one per real record, descending
  std::size_t resulting = 0;
  std::size_t shortfall = 0;

  bool unfillable() const { return available == 0 && quota > 0; }
};

struct SourceIdentity {
  std::string name;
  std::size_t records = 0;
  std::string checksum;

  bool operator==(const SourceIdentity&) const = default;
};

struct BalancePlan {
  QuotaPolicy policy;
  std::size_t quota = 0;
  std::uint64_t seed = 0;
  ParseMode source_mode = ParseMode::strict;
  std::shared_ptr<const DemographicTaxonomy> taxonomy;
  std::vector<SourceIdentity> sources;
  std::vector<CellAction> actions;  // one per lattice cell, taxonomy order
  double projected_D = 0.0;
};

/// Per-cell counts summed over all sources. Throws TaxonomyMismatch.
std::vector<std::size_t> merged_cell_counts(std::span<const Manifest> sources);

/// Target per-cell count for the policy. Throws EmptyLattice when every
/// merged cell is empty.
std::size_t resolve_quota(std::span<const Manifest> sources, const QuotaPolicy& policy);

/// Splits `quota` uses over `available` records as evenly as possible:
/// every entry is floor(quota/available) or ceil(...), larger ones first.
std::vector<std::size_t> even_multipliers(std::size_t available, std::size_t quota);

BalancePlan build_plan(std::span<const Manifest> sources, const QuotaPolicy& policy, std::uint64_t seed,
                       ParseMode source_mode = ParseMode::strict);

/// Realizes the plan over the merged sources. Selection within each cell
/// is a seeded shuffle, so (plan, sources) fully determine the output.
/// Augmented copies get ids `<id>~aug<j>` with augmented_from = <id>.
/// Throws SourceMismatch when the sources are not the ones planned over.
Manifest apply_plan(const BalancePlan& plan, std::span<const Manifest> sources);

SourceIdentity source_identity(const Manifest& manifest);

nlohmann::ordered_json to_json(const BalancePlan& plan);
BalancePlan plan_from_json(const nlohmann::json& doc);

struct SplitSpec {
  std::array<double, 3> fractions{0.70, 0.15, 0.15};  // train, val, test
  std::uint64_t seed = 0;

  void validate() const;
};

/// Largest-remainder apportionment of n records; remainder ties go to
/// train, then val, then test.
std::array<std::size_t, 3> split_counts(std::size_t n, const std::array<double, 3>& fractions);

struct SplitResult {
  Manifest train;
  Manifest val;
  Manifest test;
  std::vector<Warning> warnings;
};

/// Per-cell stratified split. Records keep their input order inside each
/// output and get their `split` field set.
SplitResult stratified_split(const Manifest& manifest, const SplitSpec& spec);

}  // namespace fairaudit

#endif  // FAIRAUDIT_BALANCE_HPP
