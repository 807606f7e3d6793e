#include "fairaudit/fairness.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fairaudit/csv.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

PositiveClass PositiveClass::parse(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "female" || lower == "f" || lower == "1") return female();
  if (lower == "male" || lower == "m" || lower == "0") return male();
  throw Error(ErrorCode::InvalidArgument, "positive label must be female/male or 1/0, got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Prediction log I/O

namespace {

constexpr std::array<std::string_view, 7> kPredictionHeader{"id",     "gender", "race", "age_bin",
                                                            "y_true", "y_pred", "score"};

std::uint8_t parse_binary(const std::string& text, const char* what, std::size_t line, std::size_t column) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw Error(ErrorCode::MalformedLabel, std::string(what) + " must be 0 or 1, got '" + text + "'", line, column);
}

std::string format_score(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

}  // namespace

ParsedPredictions parse_predictions(std::istream& in, const DemographicTaxonomy& taxonomy, double threshold) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "prediction log is missing its header", 1, 1);
  auto& header = rows.front().fields;
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  if (header.size() != kPredictionHeader.size()) {
    throw Error(ErrorCode::ParseError, "prediction header must be 'id,gender,race,age_bin,y_true,y_pred,score'",
                rows.front().line, 1);
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kPredictionHeader[i]) {
      throw Error(ErrorCode::ParseError,
                  "expected header column '" + std::string(kPredictionHeader[i]) + "', got '" + header[i] + "'",
                  rows.front().line, i + 1);
    }
  }

  ParsedPredictions out;
  out.records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& f = rows[r].fields;
    const std::size_t line = rows[r].line;
    if (f.size() != kPredictionHeader.size()) {
      throw Error(ErrorCode::ParseError, "expected 7 fields, got " + std::to_string(f.size()), line, 1);
    }
    PredictionRecord record;
    record.id = std::move(f[0]);
    record.gender = std::move(f[1]);
    record.race = std::move(f[2]);
    record.age_bin = std::move(f[3]);
    if (!taxonomy.index_of(Attribute::gender, record.gender)) {
      throw Error(ErrorCode::UnknownSubgroup, "unknown gender '" + record.gender + "'", line, 2);
    }
    if (!taxonomy.index_of(Attribute::race, record.race)) {
      throw Error(ErrorCode::UnknownSubgroup, "unknown race '" + record.race + "'", line, 3);
    }
    if (!taxonomy.index_of(Attribute::age, record.age_bin)) {
      throw Error(ErrorCode::UnknownSubgroup, "unknown age bin '" + record.age_bin + "'", line, 4);
    }
    record.y_true = parse_binary(f[4], "y_true", line, 5);
    record.y_pred = parse_binary(f[5], "y_pred", line, 6);
    if (!f[6].empty()) {
      double score = 0.0;
      auto [ptr, ec] = std::from_chars(f[6].data(), f[6].data() + f[6].size(), score);
      if (ec != std::errc{} || ptr != f[6].data() + f[6].size() || !(score >= 0.0 && score <= 1.0)) {
        throw Error(ErrorCode::ParseError, "score must be a number in [0, 1], got '" + f[6] + "'", line, 7);
      }
      record.score = score;
      const bool predicted = score >= threshold;
      if (predicted != (record.y_pred == 1)) {
        out.warnings.push_back({"SCORE_MISMATCH", "line " + std::to_string(line) + " id=" + record.id +
                                                      " score=" + f[6] + " y_pred=" +
                                                      std::to_string(record.y_pred)});
      }
    }
    out.records.push_back(std::move(record));
  }
  return out;
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records) {
  csv::write_row(out, std::vector<std::string>(kPredictionHeader.begin(), kPredictionHeader.end()));
  for (const auto& r : records) {
    csv::write_row(out, {r.id, r.gender, r.race, r.age_bin, std::to_string(r.y_true), std::to_string(r.y_pred),
                         r.score ? format_score(*r.score) : std::string{}});
  }
}

// ---------------------------------------------------------------------------
// Grouping

Grouping::Grouping(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
  if (attributes_.empty()) throw Error(ErrorCode::InvalidArgument, "grouping needs at least one attribute");
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    for (std::size_t j = i + 1; j < attributes_.size(); ++j) {
      if (attributes_[i] == attributes_[j]) {
        throw Error(ErrorCode::InvalidArgument, "grouping repeats '" + std::string(to_string(attributes_[i])) + "'");
      }
    }
  }
}

Grouping Grouping::parse(std::string_view text) {
  std::vector<Attribute> attributes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('+', start), text.size());
    const auto token = text.substr(start, end - start);
    auto attribute = parse_attribute(token);
    if (!attribute) {
      throw Error(ErrorCode::InvalidArgument, "unknown grouping attribute '" + std::string(token) + "'");
    }
    attributes.push_back(*attribute);
    start = end + 1;
  }
  return Grouping(std::move(attributes));
}

std::string Grouping::name() const {
  std::string out;
  for (auto a : attributes_) {
    if (!out.empty()) out += '+';
    out += to_string(a);
  }
  return out;
}

std::size_t Grouping::group_count(const DemographicTaxonomy& taxonomy) const {
  std::size_t n = 1;
  for (auto a : attributes_) n *= taxonomy.size(a);
  return n;
}

std::size_t Grouping::group_of(const PredictionRecord& record, const DemographicTaxonomy& taxonomy) const {
  std::size_t index = 0;
  for (auto a : attributes_) {
    const std::string& label =
        a == Attribute::gender ? record.gender : (a == Attribute::race ? record.race : record.age_bin);
    auto i = taxonomy.index_of(a, label);
    if (!i) {
      throw Error(ErrorCode::UnknownSubgroup,
                  "record '" + record.id + "' has unknown " + std::string(to_string(a)) + " '" + label + "'");
    }
    index = index * taxonomy.size(a) + *i;
  }
  return index;
}

std::string Grouping::group_name(std::size_t index, const DemographicTaxonomy& taxonomy) const {
  std::vector<std::string_view> parts(attributes_.size());
  for (std::size_t k = attributes_.size(); k-- > 0;) {
    const auto n = taxonomy.size(attributes_[k]);
    parts[k] = taxonomy.labels(attributes_[k])[index % n];
    index /= n;
  }
  std::string out;
  for (auto p : parts) {
    if (!out.empty()) out += '+';
    out += p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rates

std::vector<GroupConfusion> confusion_by_group(std::span<const PredictionRecord> records,
                                               const DemographicTaxonomy& taxonomy, const Grouping& grouping,
                                               const PositiveClass& positive) {
  if (records.empty()) throw Error(ErrorCode::EmptyLog, "prediction log has no records");
  const std::size_t n_groups = grouping.group_count(taxonomy);
  std::vector<std::uint32_t> groups(records.size());
  std::vector<std::uint8_t> truth(records.size());
  std::vector<std::uint8_t> pred(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    groups[i] = static_cast<std::uint32_t>(grouping.group_of(records[i], taxonomy));
    truth[i] = records[i].y_true;
    pred[i] = records[i].y_pred;
  }
  const auto tallies = kernels::confusion_tally(groups, truth, pred, n_groups, positive.value);
  std::vector<GroupConfusion> out;
  for (std::size_t g = 0; g < n_groups; ++g) {
    const auto& t = tallies[g];
    if (t.total() == 0) continue;
    out.push_back({grouping.group_name(g, taxonomy), t.tp, t.fp, t.fn, t.tn});
  }
  return out;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> tpr(const GroupConfusion& c) { return ratio(c.tp, c.tp + c.fn); }
std::optional<double> tnr(const GroupConfusion& c) { return ratio(c.tn, c.tn + c.fp); }
std::optional<double> fpr(const GroupConfusion& c) { return ratio(c.fp, c.fp + c.tn); }
std::optional<double> positive_outcome_ratio(const GroupConfusion& c) { return ratio(c.tp + c.fp, c.total()); }
std::optional<double> accuracy(const GroupConfusion& c) { return ratio(c.tp + c.tn, c.total()); }

std::vector<std::pair<std::string, double>> disparate_impact(std::span<const GroupConfusion> groups,
                                                             std::string_view reference) {
  auto ref = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.group == reference; });
  if (ref == groups.end()) {
    throw Error(ErrorCode::UnknownReference, "reference group '" + std::string(reference) + "' is not in the log");
  }
  const auto ref_por = positive_outcome_ratio(*ref);
  if (!ref_por || *ref_por == 0.0) {
    throw Error(ErrorCode::DegenerateReference,
                "reference group '" + std::string(reference) + "' has no positive predictions");
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    if (&g == &*ref) {
      out.emplace_back(g.group, 1.0);
    } else {
      out.emplace_back(g.group, *positive_outcome_ratio(g) / *ref_por);
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> disparate_impact(std::span<const PredictionRecord> records,
                                                             const DemographicTaxonomy& taxonomy,
                                                             const Grouping& grouping, std::string_view reference,
                                                             const PositiveClass& positive) {
  return disparate_impact(confusion_by_group(records, taxonomy, grouping, positive), reference);
}

std::vector<std::pair<std::string, bool>> four_fifths_flags(std::span<const std::pair<std::string, double>> di) {
  std::vector<std::pair<std::string, bool>> out;
  out.reserve(di.size());
  for (const auto& [group, value] : di) out.emplace_back(group, four_fifths_flag(value));
  return out;
}

EqualizedOdds equalized_odds_epsilon(std::span<const GroupConfusion> groups) {
  if (groups.empty()) throw Error(ErrorCode::EmptyLog, "no groups to compare");
  std::vector<double> acc;
  acc.reserve(groups.size());
  for (const auto& g : groups) {
    const auto a = accuracy(g);
    if (!a || *a == 0.0) {
      throw Error(ErrorCode::DegenerateAccuracy, "group '" + g.group + "' has zero accuracy");
    }
    acc.push_back(*a);
  }
  EqualizedOdds out;
  out.argpair = {groups[0].group, groups[0].group};
  double best = -1.0;
  for (std::size_t j = 0; j < acc.size(); ++j) {
    for (std::size_t k = j + 1; k < acc.size(); ++k) {
      const double value = std::abs(std::log(acc[j] / acc[k]));
      if (value > best) {
        best = value;
        out.argpair = {groups[j].group, groups[k].group};
      }
    }
  }
  out.epsilon = std::max(best, 0.0);
  out.ratio = std::exp(out.epsilon);
  return out;
}

TprGap tpr_gap(std::span<const GroupConfusion> groups) {
  TprGap out;
  std::optional<double> lo;
  std::optional<double> hi;
  for (const auto& g : groups) {
    const auto rate = tpr(g);
    if (!rate) {
      out.excluded.push_back(g.group);
      continue;
    }
    if (!hi || *rate > *hi) {
      hi = rate;
      out.max_group = g.group;
    }
    if (!lo || *rate < *lo) {
      lo = rate;
      out.min_group = g.group;
    }
  }
  if (!hi) throw Error(ErrorCode::UndefinedRate, "no group has a defined true positive rate");
  out.gap = *hi - *lo;
  return out;
}

TprGap tpr_gap(std::span<const PredictionRecord> records, const DemographicTaxonomy& taxonomy,
               const Grouping& grouping, const PositiveClass& positive) {
  return tpr_gap(confusion_by_group(records, taxonomy, grouping, positive));
}

// ---------------------------------------------------------------------------
// Synthesis

SynthSpec synth_spec_from_json(const nlohmann::json& doc) {
  try {
    SynthSpec spec;
    if (doc.contains("positive")) spec.positive = PositiveClass::parse(doc.at("positive").get<std::string>());
    for (const auto& g : doc.at("groups")) {
      SynthGroup group;
      group.cell = {g.at("gender").get<std::string>(), g.at("race").get<std::string>(),
                    g.at("age_bin").get<std::string>()};
      group.count_pos = g.at("count_pos").get<std::size_t>();
      group.count_neg = g.at("count_neg").get<std::size_t>();
      group.tpr = g.at("tpr").get<double>();
      group.fpr = g.at("fpr").get<double>();
      spec.groups.push_back(std::move(group));
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed synthesis spec: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const SynthSpec& spec) {
  nlohmann::ordered_json doc;
  doc["positive"] = spec.positive.name;
  auto groups = nlohmann::ordered_json::array();
  for (const auto& g : spec.groups) {
    groups.push_back({{"gender", g.cell.gender},
                      {"race", g.cell.race},
                      {"age_bin", g.cell.age_bin},
                      {"count_pos", g.count_pos},
                      {"count_neg", g.count_neg},
                      {"tpr", g.tpr},
                      {"fpr", g.fpr}});
  }
  doc["groups"] = std::move(groups);
  return doc;
}

std::vector<PredictionRecord> synthesize_predictions(const SynthSpec& spec, const DemographicTaxonomy& taxonomy,
                                                     std::uint64_t seed) {
  std::vector<PredictionRecord> rows;
  const std::uint8_t pos = spec.positive.value;
  const auto neg = static_cast<std::uint8_t>(1 - pos);
  for (const auto& g : spec.groups) {
    if (!taxonomy.cell_index(g.cell)) {
      throw Error(ErrorCode::UnknownSubgroup,
                  "synthesis group " + g.cell.gender + "|" + g.cell.race + "|" + g.cell.age_bin + " is not in the taxonomy");
    }
    if (!(g.tpr >= 0.0 && g.tpr <= 1.0 && g.fpr >= 0.0 && g.fpr <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "synthesis rates must lie in [0, 1]");
    }
    const auto tp = static_cast<std::size_t>(std::llround(g.tpr * static_cast<double>(g.count_pos)));
    const auto fp = static_cast<std::size_t>(std::llround(g.fpr * static_cast<double>(g.count_neg)));
    auto row = [&](std::uint8_t truth, std::uint8_t predicted) {
      rows.push_back({{}, g.cell.gender, g.cell.race, g.cell.age_bin, truth, predicted, std::nullopt});
    };
    for (std::size_t i = 0; i < g.count_pos; ++i) row(pos, i < tp ? pos : neg);
    for (std::size_t i = 0; i < g.count_neg; ++i) row(neg, i < fp ? pos : neg);
  }
  Rng rng(seed);
  rng.shuffle(std::span<PredictionRecord>(rows));
  const int width = std::max<int>(6, static_cast<int>(std::to_string(rows.size()).size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "syn-%0*zu", width, i + 1);
    rows[i].id = buffer;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Reports

const GroupFairness* FairnessReport::find(std::string_view group) const {
  for (const auto& g : groups) {
    if (g.name == group) return &g;
  }
  return nullptr;
}

std::optional<double> FairnessReport::positive_tpr(const GroupFairness& row) const {
  return positive.value == 1 ? row.tpr_f : row.tpr_m;
}

FairnessReport evaluate(std::span<const PredictionRecord> records, const DemographicTaxonomy& taxonomy,
                        const Grouping& grouping, std::string_view reference, const PositiveClass& positive,
                        std::string dataset) {
  const auto confusions = confusion_by_group(records, taxonomy, grouping, positive);
  const auto di = disparate_impact(confusions, reference);

  FairnessReport report;
  report.dataset = std::move(dataset);
  report.grouping = grouping.name();
  report.positive = positive;
  report.reference = std::string(reference);

  std::vector<GroupConfusion> eligible;
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < confusions.size(); ++i) {
    const auto& c = confusions[i];
    GroupFairness row;
    row.name = c.group;
    row.counts = kernels::ConfusionCounts{c.tp, c.fp, c.fn, c.tn};
    const auto pos_rate = tpr(c);
    const auto neg_rate = tnr(c);
    row.tpr_f = positive.value == 1 ? pos_rate : neg_rate;
    row.tpr_m = positive.value == 1 ? neg_rate : pos_rate;
    row.fpr = fpr(c);
    row.por = positive_outcome_ratio(c);
    row.accuracy = accuracy(c);
    row.di = di[i].second;
    row.flagged = four_fifths_flag(*row.di);
    report.groups.push_back(std::move(row));
    correct += c.tp + c.tn;
    total += c.total();

    if (!pos_rate) {
      report.excluded.push_back({c.group, "no positives"});
    } else if (*accuracy(c) == 0.0) {
      report.excluded.push_back({c.group, "zero accuracy"});
    } else {
      eligible.push_back(c);
    }
  }
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(total);

  std::vector<double> pooled;
  for (const auto& row : report.groups) {
    if (row.tpr_f) pooled.push_back(*row.tpr_f);
    if (row.tpr_m) pooled.push_back(*row.tpr_m);
  }
  if (!pooled.empty()) {
    const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
    report.tpr_gap_pooled = *hi - *lo;
  }
  if (!eligible.empty()) {
    report.tpr_gap = tpr_gap(eligible).gap;
    const auto eo = equalized_odds_epsilon(eligible);
    report.eo_epsilon = eo.epsilon;
    report.eo_ratio = eo.ratio;
    report.eo_argpair = eo.argpair;
  }
  return report;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& value) {
  return value ? nlohmann::ordered_json(*value) : nlohmann::ordered_json(nullptr);
}

std::optional<double> read_opt(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  if (!doc.at(key).is_number()) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be a number or null");
  return doc.at(key).get<double>();
}

}  // namespace

nlohmann::ordered_json to_json(const FairnessReport& report) {
  nlohmann::ordered_json doc;
  if (!report.dataset.empty()) doc["dataset"] = report.dataset;
  doc["grouping"] = report.grouping;
  doc["positive_label"] = report.positive.name;
  doc["reference"] = report.reference;
  auto groups = nlohmann::ordered_json::array();
  for (const auto& g : report.groups) {
    nlohmann::ordered_json row{{"name", g.name},       {"tpr_f", opt(g.tpr_f)}, {"tpr_m", opt(g.tpr_m)},
                               {"por", opt(g.por)},    {"di", opt(g.di)},       {"flagged", g.flagged},
                               {"fpr", opt(g.fpr)},    {"accuracy", opt(g.accuracy)}};
    if (g.counts) {
      row["counts"] = {{"tp", g.counts->tp},
                       {"fp", g.counts->fp},
                       {"fn", g.counts->fn},
                       {"tn", g.counts->tn},
                       {"total", g.counts->total()}};
    }
    groups.push_back(std::move(row));
  }
  doc["groups"] = std::move(groups);
  doc["eo_epsilon"] = opt(report.eo_epsilon);
  doc["eo_ratio"] = opt(report.eo_ratio);
  doc["eo_argpair"] = report.eo_argpair
                          ? nlohmann::ordered_json::array({report.eo_argpair->first, report.eo_argpair->second})
                          : nlohmann::ordered_json(nullptr);
  doc["tpr_gap"] = opt(report.tpr_gap);
  doc["tpr_gap_pooled"] = opt(report.tpr_gap_pooled);
  doc["overall_accuracy"] = opt(report.overall_accuracy);
  auto excluded = nlohmann::ordered_json::array();
  for (const auto& e : report.excluded) excluded.push_back({{"group", e.group}, {"reason", e.reason}});
  doc["excluded"] = std::move(excluded);
  return doc;
}

FairnessReport fairness_report_from_json(const nlohmann::json& doc) {
  try {
    FairnessReport report;
    report.dataset = doc.value("dataset", std::string{});
    report.grouping = doc.at("grouping").get<std::string>();
    report.positive = PositiveClass::parse(doc.at("positive_label").get<std::string>());
    report.reference = doc.at("reference").get<std::string>();
    for (const auto& g : doc.at("groups")) {
      GroupFairness row;
      row.name = g.at("name").get<std::string>();
      row.tpr_f = read_opt(g, "tpr_f");
      row.tpr_m = read_opt(g, "tpr_m");
      row.fpr = read_opt(g, "fpr");
      row.por = read_opt(g, "por");
      row.accuracy = read_opt(g, "accuracy");
      row.di = read_opt(g, "di");
      row.flagged = row.di && four_fifths_flag(*row.di);
      if (g.contains("counts") && !g.at("counts").is_null()) {
        const auto& c = g.at("counts");
        row.counts = kernels::ConfusionCounts{c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                                              c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>()};
      }
      report.groups.push_back(std::move(row));
    }
    report.eo_epsilon = read_opt(doc, "eo_epsilon");
    report.eo_ratio = read_opt(doc, "eo_ratio");
    if (doc.contains("eo_argpair") && doc.at("eo_argpair").is_array() && doc.at("eo_argpair").size() == 2) {
      report.eo_argpair = std::pair{doc.at("eo_argpair")[0].get<std::string>(), doc.at("eo_argpair")[1].get<std::string>()};
    }
    report.tpr_gap = read_opt(doc, "tpr_gap");
    report.tpr_gap_pooled = read_opt(doc, "tpr_gap_pooled");
    report.overall_accuracy = read_opt(doc, "overall_accuracy");
    if (doc.contains("excluded")) {
      for (const auto& e : doc.at("excluded")) {
        if (e.is_string()) {
          report.excluded.push_back({e.get<std::string>(), ""});
        } else {
          report.excluded.push_back({e.at("group").get<std::string>(), e.value("reason", std::string{})});
        }
      }
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed fairness report: ") + e.what());
  }
}

}  // namespace fairaudit
