#ifndef FAIRAUDIT_AUDIT_HPP
#define FAIRAUDIT_AUDIT_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairaudit/manifest.hpp"
#include "fairaudit/taxonomy.hpp"

namespace fairaudit {

/// Which lattice cells enter the min/max ratio of the Diversity score.
/// `observed` skips empty cells (absence is Inclusivity's job); `all_cells`
/// takes the ratio literally, so any empty cell forces D = 0.
enum class DiversityConvention { observed, all_cells };

std::string_view to_string(DiversityConvention convention);
std::optional<DiversityConvention> parse_diversity_convention(std::string_view text);

struct AttributeCoverage {
  Attribute attribute = Attribute::gender;
  std::size_t observed = 0;
  std::size_t expected = 0;
  double ratio = 0.0;
  std::vector<std::string> missing_subgroups;
};

struct Inclusivity {
  double R = 0.0;
  std::vector<AttributeCoverage> per_attribute;  // gender, race, age
};

struct CellShare {
  GroupKey cell;
  std::size_t count = 0;
  double share = 0.0;
};

struct Diversity {
  double D = 0.0;
  GroupKey min_cell;
  GroupKey max_cell;
  DiversityConvention convention = DiversityConvention::observed;
};

struct AuditReport {
  std::size_t n = 0;
  Inclusivity inclusivity;
  Diversity diversity;
  std::vector<CellShare> grs;  // observed cells, taxonomy order
  std::vector<GroupKey> missing_cells;
};

/// R = mean over attributes of |observed subgroups| / |expected subgroups|.
Inclusivity inclusivity(const Manifest& manifest);

/// GRS_i = |g_i| / N for every observed cell. Throws EmptyManifest.
std::vector<CellShare> group_representation_shares(const Manifest& manifest);

/// D = min GRS / max GRS. Ties resolve to the earliest cell in taxonomy order.
/// Throws EmptyManifest.
Diversity diversity(const Manifest& manifest,
                    DiversityConvention convention = DiversityConvention::observed);

/// Same score from dense per-cell counts (flat lattice order).
Diversity diversity_from_counts(std::span<const std::size_t> dense_counts,
                                const DemographicTaxonomy& taxonomy,
                                DiversityConvention convention = DiversityConvention::observed);

/// Lattice cells with no records, in taxonomy order.
std::vector<GroupKey> missing_cells(const Manifest& manifest);

AuditReport audit(const Manifest& manifest,
                  DiversityConvention convention = DiversityConvention::observed);

/// `{n, inclusivity, diversity, grs, missing_cells}` with fixed key order.
/// `dataset` is written first when non-empty.
nlohmann::ordered_json to_json(const AuditReport& report, std::string_view dataset = {});

nlohmann::ordered_json to_json(const GroupKey& key);

}  // namespace fairaudit

#endif  // FAIRAUDIT_AUDIT_HPP
