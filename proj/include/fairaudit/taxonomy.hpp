#ifndef FAIRAUDIT_TAXONOMY_HPP
#define FAIRAUDIT_TAXONOMY_HPP

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fairaudit {

/// Sensitive attributes, in lattice order (gender-major, age-minor).
enum class Attribute { gender = 0, race = 1, age = 2 };

inline constexpr std::array<Attribute, 3> kAllAttributes{Attribute::gender, Attribute::race,
                                                         Attribute::age};

std::string_view to_string(Attribute attribute);
std::optional<Attribute> parse_attribute(std::string_view name);

struct AgeBin {
  std::string label;
  int min_years = 0;  // inclusive
  int max_years = 0;  // inclusive

  bool operator==(const AgeBin&) const = default;
};

/// One cell of the gender x race x age-bin lattice.
struct GroupKey {
  std::string gender;
  std::string race;
  std::string age_bin;

  auto operator<=>(const GroupKey&) const = default;
};

/// The expected subgroup universe for each attribute plus the age-binning
/// scheme. Immutable once built; the constructor enforces the invariants
/// (unique labels, at least one subgroup per attribute, non-overlapping
/// bins). Bins are kept sorted by their lower bound.
class DemographicTaxonomy {
public:
  DemographicTaxonomy(std::vector<std::string> genders, std::vector<std::string> races,
                      std::vector<AgeBin> age_bins,
                      std::map<Attribute, std::string> fallback = {});

  /// "table1": 3 genders x 9 races x 10 bins (0-2 ... 71-100).
  /// "eval":   same genders/races, decade bins 0-2, 3-9, 10-19, ..., 60-69, 70+.
  static DemographicTaxonomy preset(std::string_view name);
  static bool is_preset(std::string_view name);

  const std::vector<std::string>& genders() const { return labels_[0]; }
  const std::vector<std::string>& races() const { return labels_[1]; }
  const std::vector<AgeBin>& age_bins() const { return age_bins_; }
  const std::vector<std::string>& labels(Attribute attribute) const {
    return labels_[static_cast<std::size_t>(attribute)];
  }
  std::size_t size(Attribute attribute) const { return labels(attribute).size(); }

  std::optional<std::size_t> index_of(Attribute attribute, std::string_view label) const;
  std::optional<std::string> fallback(Attribute attribute) const;

  /// Bin index containing `age_years`, if any.
  std::optional<std::size_t> age_bin_index(int age_years) const;

  std::size_t cell_count() const;
  std::size_t cell_index(std::size_t gender, std::size_t race, std::size_t age) const {
    return (gender * races().size() + race) * age_bins_.size() + age;
  }
  std::optional<std::size_t> cell_index(const GroupKey& key) const;
  GroupKey cell_key(std::size_t flat) const;
  /// Index of `attribute` within flat cell index.
  std::size_t component(std::size_t flat, Attribute attribute) const;

  nlohmann::ordered_json to_json() const;

  bool operator==(const DemographicTaxonomy& other) const;

private:
  std::array<std::vector<std::string>, 3> labels_;
  std::vector<AgeBin> age_bins_;
  std::map<Attribute, std::string> fallback_;
  std::array<std::map<std::string, std::size_t, std::less<>>, 3> index_;
};

/// Parses a taxonomy JSON document:
///   {"gender": [...], "race": [...], "age_bins": [{"label","min","max"}...],
///    "fallback": {"gender": "Other", "race": "Other"}}
DemographicTaxonomy load_taxonomy(std::istream& in);
DemographicTaxonomy taxonomy_from_json(const nlohmann::json& doc);

/// Resolves a preset name ("table1", "eval") or a path to a JSON document.
DemographicTaxonomy resolve_taxonomy(const std::string& preset_or_path);

/// Label of the unique bin containing `age_years`; throws UnbinnableAge.
const std::string& bin_age(int age_years, const DemographicTaxonomy& taxonomy);

}  // namespace fairaudit

#endif  // FAIRAUDIT_TAXONOMY_HPP
