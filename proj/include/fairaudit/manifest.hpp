#ifndef FAIRAUDIT_MANIFEST_HPP
#define FAIRAUDIT_MANIFEST_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairaudit/error.hpp"
#include "fairaudit/taxonomy.hpp"

namespace fairaudit {

enum class Split { train, val, test };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

/// Metadata row standing in for one face image.
struct FaceRecord {
  std::string id;
  std::string source;
  std::string gender;
  std::string race;
  std::optional<int> age_years;
  std::optional<std::string> age_bin;
  std::optional<Split> split;
  std::optional<std::string> augmented_from;

  bool operator==(const FaceRecord&) const = default;
};

enum class ParseMode { strict, lenient };

/// Validated, immutable collection of records bound to one taxonomy.
///
/// On construction every record's age_bin is derived from age_years when
/// years are present (years win over a conflicting bin), labels are
/// checked against the taxonomy and ids must be unique. The flat lattice
/// cell of each record is cached.
class Manifest {
public:
  Manifest(std::shared_ptr<const DemographicTaxonomy> taxonomy, std::vector<FaceRecord> records,
           std::string name = {});
  Manifest(const DemographicTaxonomy& taxonomy, std::vector<FaceRecord> records,
           std::string name = {});

  const DemographicTaxonomy& taxonomy() const { return *taxonomy_; }
  const std::shared_ptr<const DemographicTaxonomy>& shared_taxonomy() const { return taxonomy_; }
  const std::vector<FaceRecord>& records() const { return records_; }
  std::span<const std::uint32_t> cells() const { return cells_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::string& name() const { return name_; }

  bool operator==(const Manifest& other) const {
    return *taxonomy_ == *other.taxonomy_ && records_ == other.records_;
  }

private:
  std::shared_ptr<const DemographicTaxonomy> taxonomy_;
  std::vector<FaceRecord> records_;
  std::vector<std::uint32_t> cells_;
  std::string name_;
};

struct ParsedManifest {
  Manifest manifest;
  std::size_t remapped = 0;  // lenient-mode label remaps
  std::vector<Warning> warnings;
};

/// Reads the manifest CSV (header `id,source,gender,race,age_years,age_bin,split`
/// with an optional 8th `augmented_from` column). Errors carry the CSV line.
ParsedManifest parse_manifest(std::istream& in, const DemographicTaxonomy& taxonomy,
                              ParseMode mode = ParseMode::strict, std::string name = {});
ParsedManifest parse_manifest(std::istream& in, std::shared_ptr<const DemographicTaxonomy> taxonomy,
                              ParseMode mode = ParseMode::strict, std::string name = {});

enum class LineageColumn { automatic, always, never };

/// Writes the CSV form. With `automatic` the `augmented_from` column is
/// emitted only when some record carries lineage.
void write_manifest(std::ostream& out, const Manifest& manifest,
                    LineageColumn lineage = LineageColumn::automatic);
std::string manifest_to_csv(const Manifest& manifest,
                            LineageColumn lineage = LineageColumn::automatic);

/// FNV-1a 64 over the canonical CSV form, as 16 lowercase hex digits.
std::string manifest_checksum(const Manifest& manifest);

/// Dense per-cell counts, indexed by flat lattice index.
std::vector<std::size_t> dense_cell_counts(const Manifest& manifest);

/// Non-empty cells with their counts, in taxonomy order.
std::vector<std::pair<GroupKey, std::size_t>> cell_counts(const Manifest& manifest);

/// Concatenates sources sharing one taxonomy. Ids become `<name>:<id>`;
/// a name seen again gets `#2`, `#3`, ... so repeated sources stay distinct.
Manifest merge_manifests(std::span<const Manifest> manifests, std::string name = "merged");

/// Prefixes used by merge_manifests, one per input.
std::vector<std::string> merge_prefixes(std::span<const Manifest> manifests);

}  // namespace fairaudit

#endif  // FAIRAUDIT_MANIFEST_HPP
