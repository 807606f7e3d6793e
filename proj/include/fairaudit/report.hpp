#ifndef FAIRAUDIT_REPORT_HPP
#define FAIRAUDIT_REPORT_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairaudit/fairness.hpp"

namespace fairaudit {

/// Mean of |di - 1| over non-reference groups with a defined DI.
/// Throws UndefinedRate when there is none.
double mean_di_distance(const FairnessReport& report);

/// Which per-class TPR columns feed the max-min gap.
enum class GapBasis { female, pooled };

/// max - min over the chosen TPR column(s) of every group in the report.
/// Throws UndefinedRate when no value is defined.
double report_tpr_gap(const FairnessReport& report, GapBasis basis);

struct GapReduction {
  std::string best_baseline;  // smallest-gap baseline
  double candidate_gap = 0.0;
  double baseline_gap = 0.0;
  double reduction_pct = 0.0;  // 100 * (1 - candidate / baseline)
};

struct HeadlineStats {
  std::string candidate;
  GapReduction female_gap;
  GapReduction pooled_gap;
  std::string best_di_baseline;  // smallest mean DI distance
  double candidate_di_distance = 0.0;
  double baseline_di_distance = 0.0;
  double di_improvement_pct = 0.0;  // 100 * (1 - candidate / baseline)
  std::vector<std::pair<std::string, double>> mean_di_distance;  // every report, input order
};

/// Throws IncompatibleReports unless every report shares grouping,
/// positive label and reference group, and contains the reference group.
void check_compatible(std::span<const FairnessReport> reports);

/// Candidate against the best baseline for each statistic.
HeadlineStats headline_stats(const FairnessReport& candidate, std::span<const FairnessReport> baselines);

nlohmann::ordered_json to_json(const HeadlineStats& stats);

struct AuditSummary {
  std::string dataset;
  double R = 0.0;
  double D = 0.0;
};

/// Reads dataset/R/D out of an audit report document.
AuditSummary audit_summary_from_json(const nlohmann::json& doc, std::string fallback_name = {});

/// Self-contained comparison: the embedded reports are enough to re-derive
/// every headline number.
struct ComparisonReport {
  std::vector<FairnessReport> reports;
  std::optional<std::size_t> candidate;  // index into reports
  std::vector<AuditSummary> audit_rows;
  std::optional<HeadlineStats> derived;
};

ComparisonReport build_comparison(std::vector<FairnessReport> reports, std::optional<std::size_t> candidate,
                                  std::vector<AuditSummary> audit_rows = {});

/// Re-derives the headline numbers from the embedded reports and compares
/// them with the stored ones. Returns mismatch descriptions (empty = ok).
std::vector<std::string> verify_comparison(const ComparisonReport& comparison);

nlohmann::ordered_json to_json(const ComparisonReport& comparison);
ComparisonReport comparison_from_json(const nlohmann::json& doc);

enum class ComparisonFormat { json, markdown, csv };
std::optional<ComparisonFormat> parse_comparison_format(std::string_view text);

/// Deterministic rendering. Markdown follows the per-group table layout
/// (Group, Metric, one column per dataset) with 3 decimals and "--" for
/// absent values; the reference group comes first.
std::string emit_comparison(const ComparisonReport& comparison, ComparisonFormat format);

/// Fixed-point with three decimals, "--" when absent.
std::string format_cell(const std::optional<double>& value);

struct PlotPoint {
  std::string dataset;
  std::string metric;
  double value = 0.0;
};

std::vector<PlotPoint> plot_points_from_audits(std::span<const AuditSummary> audits);
std::vector<PlotPoint> plot_points_from_accuracy(std::span<const FairnessReport> reports);

/// Long-format CSV `dataset,metric,value`, sorted by dataset then metric,
/// values printed with shortest round-trip precision.
std::string emit_plot_data(std::vector<PlotPoint> points);

}  // namespace fairaudit

#endif  // FAIRAUDIT_REPORT_HPP
