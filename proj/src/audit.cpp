#include "fairaudit/audit.hpp"

#include "fairaudit/error.hpp"

namespace fairaudit {

std::string_view to_string(DiversityConvention convention) {
  return convention == DiversityConvention::observed ? "observed" : "all-cells";
}

std::optional<DiversityConvention> parse_diversity_convention(std::string_view text) {
  if (text == "observed") return DiversityConvention::observed;
  if (text == "all-cells" || text == "all_cells") return DiversityConvention::all_cells;
  return std::nullopt;
}

namespace {

Inclusivity inclusivity_from_counts(std::span<const std::size_t> dense, const DemographicTaxonomy& taxonomy) {
  Inclusivity out;
  double sum = 0.0;
  for (Attribute attribute : kAllAttributes) {
    std::vector<bool> seen(taxonomy.size(attribute), false);
    for (std::size_t c = 0; c < dense.size(); ++c) {
      if (dense[c] > 0) seen[taxonomy.component(c, attribute)] = true;
    }
    AttributeCoverage coverage;
    coverage.attribute = attribute;
    coverage.expected = seen.size();
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i]) {
        ++coverage.observed;
      } else {
        coverage.missing_subgroups.push_back(taxonomy.labels(attribute)[i]);
      }
    }
    coverage.ratio = static_cast<double>(coverage.observed) / static_cast<double>(coverage.expected);
    sum += coverage.ratio;
    out.per_attribute.push_back(std::move(coverage));
  }
  out.R = sum / static_cast<double>(kAllAttributes.size());
  return out;
}

std::size_t total(std::span<const std::size_t> dense) {
  std::size_t n = 0;
  for (auto c : dense) n += c;
  return n;
}

std::vector<CellShare> shares_from_counts(std::span<const std::size_t> dense, const DemographicTaxonomy& taxonomy) {
  const std::size_t n = total(dense);
  if (n == 0) throw Error(ErrorCode::EmptyManifest, "group representation shares need N > 0");
  std::vector<CellShare> out;
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] == 0) continue;
    out.push_back({taxonomy.cell_key(c), dense[c], static_cast<double>(dense[c]) / static_cast<double>(n)});
  }
  return out;
}

}  // namespace

Inclusivity inclusivity(const Manifest& manifest) {
  return inclusivity_from_counts(dense_cell_counts(manifest), manifest.taxonomy());
}

std::vector<CellShare> group_representation_shares(const Manifest& manifest) {
  return shares_from_counts(dense_cell_counts(manifest), manifest.taxonomy());
}

Diversity diversity_from_counts(std::span<const std::size_t> dense, const DemographicTaxonomy& taxonomy,
                                DiversityConvention convention) {
  const std::size_t n = total(dense);
  if (n == 0) throw Error(ErrorCode::EmptyManifest, "diversity needs N > 0");
  std::optional<std::size_t> min_cell;
  std::optional<std::size_t> max_cell;
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] == 0 && convention == DiversityConvention::observed) continue;
    if (!min_cell || dense[c] < dense[*min_cell]) min_cell = c;
    if (!max_cell || dense[c] > dense[*max_cell]) max_cell = c;
  }
  const double nd = static_cast<double>(n);
  const double min_share = static_cast<double>(dense[*min_cell]) / nd;
  const double max_share = static_cast<double>(dense[*max_cell]) / nd;
  return {min_share / max_share, taxonomy.cell_key(*min_cell), taxonomy.cell_key(*max_cell), convention};
}

Diversity diversity(const Manifest& manifest, DiversityConvention convention) {
  return diversity_from_counts(dense_cell_counts(manifest), manifest.taxonomy(), convention);
}

std::vector<GroupKey> missing_cells(const Manifest& manifest) {
  const auto dense = dense_cell_counts(manifest);
  std::vector<GroupKey> out;
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] == 0) out.push_back(manifest.taxonomy().cell_key(c));
  }
  return out;
}

AuditReport audit(const Manifest& manifest, DiversityConvention convention) {
  const auto dense = dense_cell_counts(manifest);
  const auto& taxonomy = manifest.taxonomy();
  AuditReport report;
  report.n = manifest.size();
  report.inclusivity = inclusivity_from_counts(dense, taxonomy);
  report.grs = shares_from_counts(dense, taxonomy);
  report.diversity = diversity_from_counts(dense, taxonomy, convention);
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] == 0) report.missing_cells.push_back(taxonomy.cell_key(c));
  }
  return report;
}

nlohmann::ordered_json to_json(const GroupKey& key) {
  return {{"gender", key.gender}, {"race", key.race}, {"age_bin", key.age_bin}};
}

nlohmann::ordered_json to_json(const AuditReport& report, std::string_view dataset) {
  nlohmann::ordered_json doc;
  if (!dataset.empty()) doc["dataset"] = dataset;
  doc["n"] = report.n;

  auto per_attribute = nlohmann::ordered_json::array();
  for (const auto& coverage : report.inclusivity.per_attribute) {
    per_attribute.push_back({{"attribute", to_string(coverage.attribute)},
                             {"observed", coverage.observed},
                             {"expected", coverage.expected},
                             {"ratio", coverage.ratio},
                             {"missing_subgroups", coverage.missing_subgroups}});
  }
  doc["inclusivity"] = {{"R", report.inclusivity.R}, {"per_attribute", std::move(per_attribute)}};
  doc["diversity"] = {{"D", report.diversity.D},
                      {"convention", to_string(report.diversity.convention)},
                      {"min_cell", to_json(report.diversity.min_cell)},
                      {"max_cell", to_json(report.diversity.max_cell)}};

  auto grs = nlohmann::ordered_json::array();
  for (const auto& cell : report.grs) {
    grs.push_back({{"gender", cell.cell.gender},
                   {"race", cell.cell.race},
                   {"age_bin", cell.cell.age_bin},
                   {"count", cell.count},
                   {"share", cell.share}});
  }
  doc["grs"] = std::move(grs);
  auto missing = nlohmann::ordered_json::array();
  for (const auto& key : report.missing_cells) missing.push_back(to_json(key));
  doc["missing_cells"] = std::move(missing);
  return doc;
}

}  // namespace fairaudit
