#include "fairaudit/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fairaudit/error.hpp"

namespace fairaudit {

std::string_view to_string(Attribute attribute) {
  switch (attribute) {
    case Attribute::gender: return "gender";
    case Attribute::race: return "race";
    case Attribute::age: return "age";
  }
  return "?";
}

std::optional<Attribute> parse_attribute(std::string_view name) {
  if (name == "gender") return Attribute::gender;
  if (name == "race") return Attribute::race;
  if (name == "age" || name == "age_bin") return Attribute::age;
  return std::nullopt;
}

DemographicTaxonomy::DemographicTaxonomy(std::vector<std::string> genders,
                                         std::vector<std::string> races,
                                         std::vector<AgeBin> age_bins,
                                         std::map<Attribute, std::string> fallback)
    : age_bins_(std::move(age_bins)), fallback_(std::move(fallback)) {
  std::stable_sort(age_bins_.begin(), age_bins_.end(),
                   [](const AgeBin& a, const AgeBin& b) { return a.min_years < b.min_years; });
  for (const auto& bin : age_bins_) {
    if (bin.min_years < 0 || bin.max_years < bin.min_years) {
      throw Error(ErrorCode::ParseError, "age bin '" + bin.label + "' has an invalid range [" +
                                             std::to_string(bin.min_years) + ", " +
                                             std::to_string(bin.max_years) + "]");
    }
  }
  for (std::size_t i = 1; i < age_bins_.size(); ++i) {
    if (age_bins_[i].min_years <= age_bins_[i - 1].max_years) {
      throw Error(ErrorCode::BinOverlap,
                  "age bins '" + age_bins_[i - 1].label + "' and '" + age_bins_[i].label + "' overlap");
    }
  }

  std::vector<std::string> bin_labels;
  bin_labels.reserve(age_bins_.size());
  for (const auto& bin : age_bins_) bin_labels.push_back(bin.label);
  labels_ = {std::move(genders), std::move(races), std::move(bin_labels)};

  for (Attribute attribute : kAllAttributes) {
    const auto a = static_cast<std::size_t>(attribute);
    if (labels_[a].empty()) {
      throw Error(ErrorCode::ParseError,
                  "attribute '" + std::string(to_string(attribute)) + "' has no subgroups");
    }
    for (std::size_t i = 0; i < labels_[a].size(); ++i) {
      if (!index_[a].emplace(labels_[a][i], i).second) {
        throw Error(ErrorCode::DuplicateSubgroup, "duplicate " + std::string(to_string(attribute)) +
                                                      " subgroup '" + labels_[a][i] + "'");
      }
    }
  }
  for (const auto& [attribute, label] : fallback_) {
    if (!index_of(attribute, label)) {
      throw Error(ErrorCode::UnknownSubgroup, "fallback '" + label + "' is not a " +
                                                  std::string(to_string(attribute)) + " subgroup");
    }
  }
}

namespace {

std::vector<std::string> table1_races() {
  return {"White", "Black",  "Southeast Asian", "East Asian", "Indian",
          "Hispanic", "Middle Eastern", "Mixed", "Other"};
}

}  // namespace

bool DemographicTaxonomy::is_preset(std::string_view name) {
  return name == "table1" || name == "eval";
}

DemographicTaxonomy DemographicTaxonomy::preset(std::string_view name) {
  std::map<Attribute, std::string> fallback{{Attribute::gender, "Other"}, {Attribute::race, "Other"}};
  if (name == "table1") {
    return DemographicTaxonomy({"Male", "Female", "Other"}, table1_races(),
                               {{"0-2", 0, 2},
                                {"3-7", 3, 7},
                                {"8-15", 8, 15},
                                {"16-20", 16, 20},
                                {"21-30", 21, 30},
                                {"31-40", 31, 40},
                                {"41-50", 41, 50},
                                {"51-60", 51, 60},
                                {"61-70", 61, 70},
                                {"71-100", 71, 100}},
                               std::move(fallback));
  }
  if (name == "eval") {
    return DemographicTaxonomy({"Male", "Female", "Other"}, table1_races(),
                               {{"0-2", 0, 2},
                                {"3-9", 3, 9},
                                {"10-19", 10, 19},
                                {"20-29", 20, 29},
                                {"30-39", 30, 39},
                                {"40-49", 40, 49},
                                {"50-59", 50, 59},
                                {"60-69", 60, 69},
                                {"70+", 70, 150}},
                               std::move(fallback));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown taxonomy preset '" + std::string(name) + "'");
}

std::optional<std::size_t> DemographicTaxonomy::index_of(Attribute attribute,
                                                         std::string_view label) const {
  const auto& index = index_[static_cast<std::size_t>(attribute)];
  if (auto it = index.find(label); it != index.end()) return it->second;
  return std::nullopt;
}

std::optional<std::string> DemographicTaxonomy::fallback(Attribute attribute) const {
  if (auto it = fallback_.find(attribute); it != fallback_.end()) return it->second;
  return std::nullopt;
}

std::optional<std::size_t> DemographicTaxonomy::age_bin_index(int age_years) const {
  // Bins are sorted and disjoint: binary search on the lower bound.
  auto it = std::upper_bound(age_bins_.begin(), age_bins_.end(), age_years,
                             [](int years, const AgeBin& bin) { return years < bin.min_years; });
  if (it == age_bins_.begin()) return std::nullopt;
  --it;
  if (age_years > it->max_years) return std::nullopt;
  return static_cast<std::size_t>(it - age_bins_.begin());
}

std::size_t DemographicTaxonomy::cell_count() const {
  return genders().size() * races().size() * age_bins_.size();
}

std::optional<std::size_t> DemographicTaxonomy::cell_index(const GroupKey& key) const {
  auto g = index_of(Attribute::gender, key.gender);
  auto r = index_of(Attribute::race, key.race);
  auto a = index_of(Attribute::age, key.age_bin);
  if (!g || !r || !a) return std::nullopt;
  return cell_index(*g, *r, *a);
}

std::size_t DemographicTaxonomy::component(std::size_t flat, Attribute attribute) const {
  const std::size_t ages = age_bins_.size();
  const std::size_t races_n = races().size();
  switch (attribute) {
    case Attribute::age: return flat % ages;
    case Attribute::race: return (flat / ages) % races_n;
    case Attribute::gender: return flat / (ages * races_n);
  }
  return 0;
}

GroupKey DemographicTaxonomy::cell_key(std::size_t flat) const {
  return {genders()[component(flat, Attribute::gender)], races()[component(flat, Attribute::race)],
          age_bins_[component(flat, Attribute::age)].label};
}

nlohmann::ordered_json DemographicTaxonomy::to_json() const {
  nlohmann::ordered_json doc;
  doc["gender"] = genders();
  doc["race"] = races();
  auto bins = nlohmann::ordered_json::array();
  for (const auto& bin : age_bins_) {
    bins.push_back({{"label", bin.label}, {"min", bin.min_years}, {"max", bin.max_years}});
  }
  doc["age_bins"] = std::move(bins);
  if (!fallback_.empty()) {
    auto fb = nlohmann::ordered_json::object();
    for (const auto& [attribute, label] : fallback_) fb[std::string(to_string(attribute))] = label;
    doc["fallback"] = std::move(fb);
  }
  return doc;
}

bool DemographicTaxonomy::operator==(const DemographicTaxonomy& other) const {
  return labels_ == other.labels_ && age_bins_ == other.age_bins_ && fallback_ == other.fallback_;
}

namespace {

std::vector<std::string> string_array(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    throw Error(ErrorCode::ParseError, std::string("taxonomy key '") + key + "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : doc[key]) {
    if (!item.is_string()) {
      throw Error(ErrorCode::ParseError, std::string("taxonomy key '") + key + "' must hold strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

DemographicTaxonomy taxonomy_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "taxonomy document must be a JSON object");
  auto genders = string_array(doc, "gender");
  auto races = string_array(doc, "race");
  if (!doc.contains("age_bins") || !doc["age_bins"].is_array()) {
    throw Error(ErrorCode::ParseError, "taxonomy key 'age_bins' must be an array");
  }
  std::vector<AgeBin> bins;
  for (const auto& item : doc["age_bins"]) {
    if (!item.is_object() || !item.contains("label") || !item["label"].is_string() ||
        !item.contains("min") || !item["min"].is_number_integer() || !item.contains("max") ||
        !item["max"].is_number_integer()) {
      throw Error(ErrorCode::ParseError, "age bin entries need string 'label' and integer 'min'/'max'");
    }
    bins.push_back({item["label"].get<std::string>(), item["min"].get<int>(), item["max"].get<int>()});
  }
  std::map<Attribute, std::string> fallback;
  if (doc.contains("fallback")) {
    if (!doc["fallback"].is_object()) throw Error(ErrorCode::ParseError, "'fallback' must be an object");
    for (const auto& [key, value] : doc["fallback"].items()) {
      auto attribute = parse_attribute(key);
      if (!attribute || !value.is_string()) {
        throw Error(ErrorCode::ParseError, "bad fallback entry '" + key + "'");
      }
      fallback[*attribute] = value.get<std::string>();
    }
  }
  return DemographicTaxonomy(std::move(genders), std::move(races), std::move(bins), std::move(fallback));
}

DemographicTaxonomy load_taxonomy(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into line/column.
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::ParseError, "malformed taxonomy JSON", line, column);
  }
  return taxonomy_from_json(doc);
}

DemographicTaxonomy resolve_taxonomy(const std::string& preset_or_path) {
  if (DemographicTaxonomy::is_preset(preset_or_path)) return DemographicTaxonomy::preset(preset_or_path);
  std::ifstream in(preset_or_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open taxonomy '" + preset_or_path + "'");
  return load_taxonomy(in);
}

const std::string& bin_age(int age_years, const DemographicTaxonomy& taxonomy) {
  if (age_years < 0) {
    throw Error(ErrorCode::UnbinnableAge, "negative age " + std::to_string(age_years));
  }
  auto index = taxonomy.age_bin_index(age_years);
  if (!index) throw Error(ErrorCode::UnbinnableAge, "no age bin contains " + std::to_string(age_years));
  return taxonomy.age_bins()[*index].label;
}

}  // namespace fairaudit
