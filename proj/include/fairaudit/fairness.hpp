#ifndef FAIRAUDIT_FAIRNESS_HPP
#define FAIRAUDIT_FAIRNESS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairaudit/error.hpp"
#include "fairaudit/kernels.hpp"
#include "fairaudit/taxonomy.hpp"

namespace fairaudit {

inline constexpr double kFourFifths = 0.8;

struct PredictionRecord {
  std::string id;
  std::string gender;
  std::string race;
  std::string age_bin;
  std::uint8_t y_true = 0;
  std::uint8_t y_pred = 0;
  std::optional<double> score;

  bool operator==(const PredictionRecord&) const = default;
};

/// Which label value is the positive class (Y-hat = 1 in the DI ratio).
/// Labels encode gender: 1 = female, 0 = male. The default is female.
struct PositiveClass {
  std::string name = "female";
  std::uint8_t value = 1;

  static PositiveClass female() { return {"female", 1}; }
  static PositiveClass male() { return {"male", 0}; }
  /// Accepts female/male (any case) or 1/0.
  static PositiveClass parse(std::string_view text);

  bool operator==(const PositiveClass&) const = default;
};

struct ParsedPredictions {
  std::vector<PredictionRecord> records;
  std::vector<Warning> warnings;
};

/// Reads the prediction log CSV (`id,gender,race,age_bin,y_true,y_pred,score`).
/// A score that disagrees with y_pred at `threshold` is kept with a
/// SCORE_MISMATCH warning.
ParsedPredictions parse_predictions(std::istream& in, const DemographicTaxonomy& taxonomy,
                                    double threshold = 0.5);
void write_predictions(std::ostream& out, std::span<const PredictionRecord> records);

/// Attribute selector for grouping, e.g. race, age, or race+gender. Group
/// indices are mixed-radix over the selected attributes in the given order;
/// group names join the labels with '+'.
class Grouping {
public:
  explicit Grouping(std::vector<Attribute> attributes);
  static Grouping parse(std::string_view text);

  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::string name() const;
  std::size_t group_count(const DemographicTaxonomy& taxonomy) const;
  std::size_t group_of(const PredictionRecord& record, const DemographicTaxonomy& taxonomy) const;
  std::string group_name(std::size_t index, const DemographicTaxonomy& taxonomy) const;

  bool operator==(const Grouping&) const = default;

private:
  std::vector<Attribute> attributes_;
};

struct GroupConfusion {
  std::string group;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// Groups that occur in the log, taxonomy order. Throws EmptyLog.
std::vector<GroupConfusion> confusion_by_group(std::span<const PredictionRecord> records,
                                               const DemographicTaxonomy& taxonomy,
                                               const Grouping& grouping, const PositiveClass& positive);

/// Rates return nullopt when the denominator is zero (rendered "--").
std::optional<double> tpr(const GroupConfusion& c);  // tp / (tp + fn)
std::optional<double> tnr(const GroupConfusion& c);  // tn / (tn + fp)
std::optional<double> fpr(const GroupConfusion& c);  // fp / (fp + tn)
std::optional<double> positive_outcome_ratio(const GroupConfusion& c);  // (tp + fp) / total
std::optional<double> accuracy(const GroupConfusion& c);                // (tp + tn) / total

/// di(g) = POR(g) / POR(reference), di(reference) = 1 exactly.
/// Throws UnknownReference or DegenerateReference (reference POR = 0).
std::vector<std::pair<std::string, double>> disparate_impact(std::span<const GroupConfusion> groups,
                                                             std::string_view reference);
std::vector<std::pair<std::string, double>> disparate_impact(std::span<const PredictionRecord> records,
                                                             const DemographicTaxonomy& taxonomy,
                                                             const Grouping& grouping,
                                                             std::string_view reference,
                                                             const PositiveClass& positive);

inline bool four_fifths_flag(double di) { return di < kFourFifths; }
std::vector<std::pair<std::string, bool>> four_fifths_flags(
    std::span<const std::pair<std::string, double>> di);

struct EqualizedOdds {
  double epsilon = 0.0;  // max |ln(acc_j / acc_k)|
  double ratio = 1.0;    // exp(epsilon): max accuracy ratio
  std::pair<std::string, std::string> argpair;
};

/// Exhaustive over ordered group pairs. Throws EmptyLog on no groups and
/// DegenerateAccuracy when a group has zero accuracy.
EqualizedOdds equalized_odds_epsilon(std::span<const GroupConfusion> groups);

struct TprGap {
  double gap = 0.0;
  std::string max_group;
  std::string min_group;
  std::vector<std::string> excluded;  // groups without positives
};

/// max - min positive-class TPR over groups where it is defined.
/// Throws UndefinedRate when no group has a defined TPR.
TprGap tpr_gap(std::span<const GroupConfusion> groups);
TprGap tpr_gap(std::span<const PredictionRecord> records, const DemographicTaxonomy& taxonomy,
               const Grouping& grouping, const PositiveClass& positive);

struct SynthGroup {
  GroupKey cell;
  std::size_t count_pos = 0;
  std::size_t count_neg = 0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct SynthSpec {
  std::vector<SynthGroup> groups;
  PositiveClass positive = PositiveClass::female();
};

SynthSpec synth_spec_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const SynthSpec& spec);

/// Log realizing tp = round(tpr * count_pos), fp = round(fpr * count_neg)
/// per group exactly; row order and ids come from a seeded shuffle.
std::vector<PredictionRecord> synthesize_predictions(const SynthSpec& spec,
                                                     const DemographicTaxonomy& taxonomy,
                                                     std::uint64_t seed);

/// One row of a fairness report. tpr_f / tpr_m are per-class recalls
/// (female recall, male recall); which one is the positive-class TPR
/// depends on the report's positive label.
struct GroupFairness {
  std::string name;
  std::optional<kernels::ConfusionCounts> counts;  // absent in transcribed fixtures
  std::optional<double> tpr_f;
  std::optional<double> tpr_m;
  std::optional<double> fpr;
  std::optional<double> por;
  std::optional<double> accuracy;
  std::optional<double> di;
  bool flagged = false;
};

struct Exclusion {
  std::string group;
  std::string reason;
};

struct FairnessReport {
  std::string dataset;
  std::string grouping;
  PositiveClass positive;
  std::string reference;
  std::vector<GroupFairness> groups;
  std::optional<double> eo_epsilon;
  std::optional<double> eo_ratio;
  std::optional<std::pair<std::string, std::string>> eo_argpair;
  std::optional<double> tpr_gap;         // positive-class TPR column
  std::optional<double> tpr_gap_pooled;  // both per-class TPR columns
  std::optional<double> overall_accuracy;
  std::vector<Exclusion> excluded;

  const GroupFairness* find(std::string_view group) const;
  /// Positive-class TPR of a row (tpr_f when positive is female).
  std::optional<double> positive_tpr(const GroupFairness& row) const;
};

/// Full evaluation of a log: per-group rates, DI against `reference`,
/// four-fifths flags, epsilon and TPR gaps. Groups lacking positives are
/// listed in `excluded` and skipped by the gap and epsilon maxima.
FairnessReport evaluate(std::span<const PredictionRecord> records, const DemographicTaxonomy& taxonomy,
                        const Grouping& grouping, std::string_view reference,
                        const PositiveClass& positive, std::string dataset = {});

nlohmann::ordered_json to_json(const FairnessReport& report);
FairnessReport fairness_report_from_json(const nlohmann::json& doc);

}  // namespace fairaudit

#endif  // FAIRAUDIT_FAIRNESS_HPP
