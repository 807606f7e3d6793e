#include "fairaudit/manifest.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_set>

#include "fairaudit/csv.hpp"
#include "fairaudit/kernels.hpp"

namespace fairaudit {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  return std::nullopt;
}

namespace {

constexpr std::array<std::string_view, 7> kHeader{"id",       "source",  "gender", "race",
                                                  "age_years", "age_bin", "split"};
constexpr std::string_view kLineageHeader = "augmented_from";

std::uint32_t resolve_cell(const DemographicTaxonomy& taxonomy, FaceRecord& record) {
  auto g = taxonomy.index_of(Attribute::gender, record.gender);
  if (!g) throw Error(ErrorCode::UnknownSubgroup, "unknown gender '" + record.gender + "' in record '" + record.id + "'");
  auto r = taxonomy.index_of(Attribute::race, record.race);
  if (!r) throw Error(ErrorCode::UnknownSubgroup, "unknown race '" + record.race + "' in record '" + record.id + "'");
  std::optional<std::size_t> a;
  if (record.age_years) {
    if (*record.age_years < 0) {
      throw Error(ErrorCode::UnbinnableAge, "negative age in record '" + record.id + "'");
    }
    a = taxonomy.age_bin_index(*record.age_years);
    if (!a) {
      throw Error(ErrorCode::UnbinnableAge, "no age bin contains " + std::to_string(*record.age_years) +
                                                " (record '" + record.id + "')");
    }
    record.age_bin = taxonomy.age_bins()[*a].label;
  } else if (record.age_bin) {
    a = taxonomy.index_of(Attribute::age, *record.age_bin);
    if (!a) throw Error(ErrorCode::UnknownSubgroup, "unknown age bin '" + *record.age_bin + "' in record '" + record.id + "'");
  } else {
    throw Error(ErrorCode::MissingAge, "record '" + record.id + "' has neither age_years nor age_bin");
  }
  return static_cast<std::uint32_t>(taxonomy.cell_index(*g, *r, *a));
}

std::optional<int> parse_age(const std::string& text, std::size_t line, std::size_t column) {
  if (text.empty()) return std::nullopt;
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::ParseError, "age_years '" + text + "' is not an integer", line, column);
  }
  if (value < 0) throw Error(ErrorCode::ParseError, "age_years must be non-negative", line, column);
  return value;
}

}  // namespace

Manifest::Manifest(std::shared_ptr<const DemographicTaxonomy> taxonomy, std::vector<FaceRecord> records,
                   std::string name)
    : taxonomy_(std::move(taxonomy)), records_(std::move(records)), name_(std::move(name)) {
  if (!taxonomy_) throw Error(ErrorCode::InvalidArgument, "manifest requires a taxonomy");
  cells_.reserve(records_.size());
  std::unordered_set<std::string_view> ids;
  ids.reserve(records_.size());
  for (auto& record : records_) {
    if (record.id.empty()) throw Error(ErrorCode::ParseError, "record with empty id");
    if (!ids.insert(record.id).second) throw Error(ErrorCode::DuplicateId, "duplicate id '" + record.id + "'");
    cells_.push_back(resolve_cell(*taxonomy_, record));
  }
}

Manifest::Manifest(const DemographicTaxonomy& taxonomy, std::vector<FaceRecord> records, std::string name)
    : Manifest(std::make_shared<const DemographicTaxonomy>(taxonomy), std::move(records), std::move(name)) {}

ParsedManifest parse_manifest(std::istream& in, const DemographicTaxonomy& taxonomy, ParseMode mode,
                              std::string name) {
  return parse_manifest(in, std::make_shared<const DemographicTaxonomy>(taxonomy), mode, std::move(name));
}

ParsedManifest parse_manifest(std::istream& in, std::shared_ptr<const DemographicTaxonomy> taxonomy,
                              ParseMode mode, std::string name) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "manifest is missing its header", 1, 1);

  auto& header = rows.front().fields;
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  const bool has_lineage = header.size() == kHeader.size() + 1 && header.back() == kLineageHeader;
  if (header.size() != kHeader.size() + (has_lineage ? 1 : 0)) {
    throw Error(ErrorCode::ParseError,
                "manifest header must be 'id,source,gender,race,age_years,age_bin,split' "
                "optionally followed by 'augmented_from'",
                rows.front().line, 1);
  }
  for (std::size_t i = 0; i < kHeader.size(); ++i) {
    if (header[i] != kHeader[i]) {
      throw Error(ErrorCode::ParseError, "expected header column '" + std::string(kHeader[i]) + "', got '" + header[i] + "'",
                  rows.front().line, i + 1);
    }
  }

  std::vector<Warning> warnings;
  std::size_t remapped = 0;
  std::vector<FaceRecord> records;
  records.reserve(rows.size() - 1);
  std::unordered_set<std::string> ids;

  auto check_label = [&](Attribute attribute, std::string& label, std::size_t line, std::size_t column,
                         const std::string& id) {
    if (taxonomy->index_of(attribute, label)) return;
    const auto fallback = taxonomy->fallback(attribute);
    if (mode == ParseMode::lenient && fallback && attribute != Attribute::age) {
      warnings.push_back({"REMAP", "line " + std::to_string(line) + " id=" + id + " " +
                                       std::string(to_string(attribute)) + " '" + label + "' -> '" +
                                       *fallback + "'"});
      label = *fallback;
      ++remapped;
      return;
    }
    throw Error(ErrorCode::UnknownSubgroup,
                "unknown " + std::string(to_string(attribute)) + " '" + label + "'", line, column);
  };

  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& fields = rows[r].fields;
    const std::size_t line = rows[r].line;
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                  line, 1);
    }
    FaceRecord record;
    record.id = std::move(fields[0]);
    if (record.id.empty()) throw Error(ErrorCode::ParseError, "empty id", line, 1);
    if (!ids.insert(record.id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate id '" + record.id + "'", line, 1);
    }
    record.source = std::move(fields[1]);
    record.gender = std::move(fields[2]);
    check_label(Attribute::gender, record.gender, line, 3, record.id);
    record.race = std::move(fields[3]);
    check_label(Attribute::race, record.race, line, 4, record.id);
    record.age_years = parse_age(fields[4], line, 5);
    if (!fields[5].empty()) {
      record.age_bin = std::move(fields[5]);
      check_label(Attribute::age, *record.age_bin, line, 6, record.id);
    }
    if (!record.age_years && !record.age_bin) {
      throw Error(ErrorCode::MissingAge, "record '" + record.id + "' has neither age_years nor age_bin", line, 5);
    }
    if (record.age_years) {
      auto bin = taxonomy->age_bin_index(*record.age_years);
      if (!bin) {
        throw Error(ErrorCode::UnbinnableAge, "no age bin contains " + std::to_string(*record.age_years), line, 5);
      }
      const auto& derived = taxonomy->age_bins()[*bin].label;
      if (record.age_bin && *record.age_bin != derived) {
        warnings.push_back({"AGE_CONFLICT", "line " + std::to_string(line) + " id=" + record.id + " age_years=" +
                                                std::to_string(*record.age_years) + " age_bin='" +
                                                *record.age_bin + "' -> '" + derived + "'"});
      }
      record.age_bin = derived;
    }
    if (!fields[6].empty()) {
      record.split = parse_split(fields[6]);
      if (!record.split) throw Error(ErrorCode::ParseError, "split must be train, val or test", line, 7);
    }
    if (has_lineage && !fields[7].empty()) record.augmented_from = std::move(fields[7]);
    records.push_back(std::move(record));
  }

  return ParsedManifest{Manifest(std::move(taxonomy), std::move(records), std::move(name)), remapped,
                        std::move(warnings)};
}

void write_manifest(std::ostream& out, const Manifest& manifest, LineageColumn lineage) {
  bool with_lineage = lineage == LineageColumn::always;
  if (lineage == LineageColumn::automatic) {
    for (const auto& record : manifest.records()) {
      if (record.augmented_from) {
        with_lineage = true;
        break;
      }
    }
  }
  std::vector<std::string> fields(kHeader.begin(), kHeader.end());
  if (with_lineage) fields.emplace_back(kLineageHeader);
  csv::write_row(out, fields);
  for (const auto& record : manifest.records()) {
    fields.assign({record.id, record.source, record.gender, record.race,
                   record.age_years ? std::to_string(*record.age_years) : std::string{},
                   record.age_bin.value_or(std::string{}),
                   record.split ? std::string(to_string(*record.split)) : std::string{}});
    if (with_lineage) fields.push_back(record.augmented_from.value_or(std::string{}));
    csv::write_row(out, fields);
  }
}

std::string manifest_to_csv(const Manifest& manifest, LineageColumn lineage) {
  std::ostringstream out;
  write_manifest(out, manifest, lineage);
  return out.str();
}

std::string manifest_checksum(const Manifest& manifest) {
  const std::string text = manifest_to_csv(manifest, LineageColumn::automatic);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::vector<std::size_t> dense_cell_counts(const Manifest& manifest) {
  return kernels::cell_histogram(manifest.cells(), manifest.taxonomy().cell_count());
}

std::vector<std::pair<GroupKey, std::size_t>> cell_counts(const Manifest& manifest) {
  const auto dense = dense_cell_counts(manifest);
  std::vector<std::pair<GroupKey, std::size_t>> out;
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] > 0) out.emplace_back(manifest.taxonomy().cell_key(c), dense[c]);
  }
  return out;
}

std::vector<std::string> merge_prefixes(std::span<const Manifest> manifests) {
  std::vector<std::string> prefixes;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    std::string base = manifests[i].name();
    if (base.empty()) {
      base = manifests[i].empty() ? "m" + std::to_string(i + 1) : manifests[i].records().front().source;
    }
    const std::size_t occurrence = ++seen[base];
    prefixes.push_back(occurrence == 1 ? base : base + "#" + std::to_string(occurrence));
  }
  // A generated "x#2" could collide with a literal source named "x#2".
  std::map<std::string, std::size_t> unique;
  for (auto& prefix : prefixes) {
    while (unique.count(prefix)) prefix += "'";
    unique[prefix] = 1;
  }
  return prefixes;
}

Manifest merge_manifests(std::span<const Manifest> manifests, std::string name) {
  if (manifests.empty()) throw Error(ErrorCode::InvalidArgument, "merge needs at least one manifest");
  const auto& taxonomy = manifests.front().shared_taxonomy();
  std::size_t total = 0;
  for (const auto& m : manifests) {
    if (!(m.taxonomy() == *taxonomy)) {
      throw Error(ErrorCode::TaxonomyMismatch, "manifest '" + m.name() + "' uses a different taxonomy");
    }
    total += m.size();
  }
  const auto prefixes = merge_prefixes(manifests);
  std::vector<FaceRecord> records;
  records.reserve(total);
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    for (FaceRecord record : manifests[i].records()) {
      record.id = prefixes[i] + ":" + record.id;
      if (record.augmented_from) *record.augmented_from = prefixes[i] + ":" + *record.augmented_from;
      records.push_back(std::move(record));
    }
  }
  return Manifest(taxonomy, std::move(records), std::move(name));
}

}  // namespace fairaudit
