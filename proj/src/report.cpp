#include "fairaudit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fairaudit/csv.hpp"

namespace fairaudit {

double mean_di_distance(const FairnessReport& report) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : report.groups) {
    if (g.name == report.reference || !g.di) continue;
    sum += std::abs(*g.di - 1.0);
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::UndefinedRate, "report '" + report.dataset + "' has no non-reference group with a DI");
  }
  return sum / static_cast<double>(n);
}

double report_tpr_gap(const FairnessReport& report, GapBasis basis) {
  std::optional<double> lo;
  std::optional<double> hi;
  auto take = [&](const std::optional<double>& v) {
    if (!v) return;
    if (!lo || *v < *lo) lo = v;
    if (!hi || *v > *hi) hi = v;
  };
  for (const auto& g : report.groups) {
    take(g.tpr_f);
    if (basis == GapBasis::pooled) take(g.tpr_m);
  }
  if (!hi) throw Error(ErrorCode::UndefinedRate, "report '" + report.dataset + "' has no TPR values");
  return *hi - *lo;
}

void check_compatible(std::span<const FairnessReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::IncompatibleReports, "no reports to compare");
  const auto& first = reports.front();
  for (const auto& r : reports) {
    if (r.grouping != first.grouping) {
      throw Error(ErrorCode::IncompatibleReports,
                  "grouping '" + r.grouping + "' differs from '" + first.grouping + "'");
    }
    if (!(r.positive == first.positive)) {
      throw Error(ErrorCode::IncompatibleReports, "positive label '" + r.positive.name + "' differs from '" +
                                                      first.positive.name + "'");
    }
    if (r.reference != first.reference) {
      throw Error(ErrorCode::IncompatibleReports,
                  "reference '" + r.reference + "' differs from '" + first.reference + "'");
    }
    if (!r.find(r.reference)) {
      throw Error(ErrorCode::IncompatibleReports,
                  "report '" + r.dataset + "' lacks the reference group '" + r.reference + "'");
    }
  }
}

namespace {

double reduction_pct(double candidate, double baseline) {
  if (baseline == 0.0) {
    throw Error(ErrorCode::UndefinedRate, "best baseline value is zero; relative reduction is undefined");
  }
  return 100.0 * (1.0 - candidate / baseline);
}

GapReduction gap_reduction(const FairnessReport& candidate, std::span<const FairnessReport> baselines,
                           GapBasis basis) {
  GapReduction out;
  out.candidate_gap = report_tpr_gap(candidate, basis);
  std::optional<double> best;
  for (const auto& b : baselines) {
    const double gap = report_tpr_gap(b, basis);
    if (!best || gap < *best) {
      best = gap;
      out.best_baseline = b.dataset;
    }
  }
  out.baseline_gap = *best;
  out.reduction_pct = reduction_pct(out.candidate_gap, out.baseline_gap);
  return out;
}

}  // namespace

HeadlineStats headline_stats(const FairnessReport& candidate, std::span<const FairnessReport> baselines) {
  if (baselines.empty()) throw Error(ErrorCode::InvalidArgument, "headline statistics need at least one baseline");
  std::vector<FairnessReport> all{candidate};
  all.insert(all.end(), baselines.begin(), baselines.end());
  check_compatible(all);

  HeadlineStats stats;
  stats.candidate = candidate.dataset;
  stats.female_gap = gap_reduction(candidate, baselines, GapBasis::female);
  stats.pooled_gap = gap_reduction(candidate, baselines, GapBasis::pooled);

  stats.candidate_di_distance = mean_di_distance(candidate);
  std::optional<double> best;
  for (const auto& b : baselines) {
    const double d = mean_di_distance(b);
    if (!best || d < *best) {
      best = d;
      stats.best_di_baseline = b.dataset;
    }
  }
  stats.baseline_di_distance = *best;
  stats.di_improvement_pct = reduction_pct(stats.candidate_di_distance, stats.baseline_di_distance);
  for (const auto& r : all) stats.mean_di_distance.emplace_back(r.dataset, mean_di_distance(r));
  return stats;
}

namespace {

nlohmann::ordered_json to_json(const GapReduction& g) {
  return {{"best_baseline", g.best_baseline},
          {"candidate_gap", g.candidate_gap},
          {"baseline_gap", g.baseline_gap},
          {"reduction_pct", g.reduction_pct}};
}

}  // namespace

nlohmann::ordered_json to_json(const HeadlineStats& stats) {
  nlohmann::ordered_json doc;
  doc["candidate"] = stats.candidate;
  doc["max_tpr_gap_reduction_pct"] = stats.female_gap.reduction_pct;
  doc["max_tpr_gap_reduction_pct_pooled"] = stats.pooled_gap.reduction_pct;
  doc["tpr_gap_female"] = to_json(stats.female_gap);
  doc["tpr_gap_pooled"] = to_json(stats.pooled_gap);
  auto distances = nlohmann::ordered_json::object();
  for (const auto& [name, d] : stats.mean_di_distance) distances[name] = d;
  doc["mean_di_distance"] = std::move(distances);
  doc["di_best_baseline"] = stats.best_di_baseline;
  doc["di_improvement_pct"] = stats.di_improvement_pct;
  return doc;
}

AuditSummary audit_summary_from_json(const nlohmann::json& doc, std::string fallback_name) {
  try {
    AuditSummary out;
    out.dataset = doc.value("dataset", fallback_name);
    out.R = doc.at("inclusivity").at("R").get<double>();
    out.D = doc.at("diversity").at("D").get<double>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed audit report: ") + e.what());
  }
}

ComparisonReport build_comparison(std::vector<FairnessReport> reports, std::optional<std::size_t> candidate,
                                  std::vector<AuditSummary> audit_rows) {
  check_compatible(reports);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      if (reports[i].dataset == reports[j].dataset) {
        throw Error(ErrorCode::IncompatibleReports, "two reports are named '" + reports[i].dataset + "'");
      }
    }
  }
  ComparisonReport out;
  out.reports = std::move(reports);
  out.candidate = candidate;
  out.audit_rows = std::move(audit_rows);
  if (candidate) {
    if (*candidate >= out.reports.size()) throw Error(ErrorCode::InvalidArgument, "candidate index out of range");
    std::vector<FairnessReport> baselines;
    for (std::size_t i = 0; i < out.reports.size(); ++i) {
      if (i != *candidate) baselines.push_back(out.reports[i]);
    }
    if (!baselines.empty()) out.derived = headline_stats(out.reports[*candidate], baselines);
  }
  return out;
}

std::vector<std::string> verify_comparison(const ComparisonReport& comparison) {
  std::vector<std::string> problems;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  for (const auto& r : comparison.reports) {
    if (r.tpr_gap) {
      std::vector<double> values;
      for (const auto& g : r.groups) {
        bool excluded = false;
        for (const auto& e : r.excluded) excluded = excluded || e.group == g.name;
        if (auto v = r.positive_tpr(g); v && !excluded) values.push_back(*v);
      }
      if (!values.empty()) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (!close(*r.tpr_gap, *hi - *lo)) problems.push_back(r.dataset + ": tpr_gap does not match its groups");
      }
    }
    for (const auto& g : r.groups) {
      if (g.di && g.flagged != four_fifths_flag(*g.di)) {
        problems.push_back(r.dataset + ": flag of '" + g.name + "' disagrees with its DI");
      }
      if (g.name == r.reference && g.di && *g.di != 1.0) {
        problems.push_back(r.dataset + ": reference DI is not 1");
      }
    }
  }
  if (comparison.derived) {
    const auto& stored = *comparison.derived;
    auto rebuilt = build_comparison(comparison.reports, comparison.candidate, comparison.audit_rows);
    if (!rebuilt.derived) {
      problems.push_back("derived statistics present but cannot be recomputed");
    } else {
      const auto& fresh = *rebuilt.derived;
      auto check = [&](const char* what, double a, double b) {
        if (!close(a, b)) problems.push_back(std::string("derived ") + what + " does not match the reports");
      };
      check("female gap reduction", stored.female_gap.reduction_pct, fresh.female_gap.reduction_pct);
      check("pooled gap reduction", stored.pooled_gap.reduction_pct, fresh.pooled_gap.reduction_pct);
      check("DI improvement", stored.di_improvement_pct, fresh.di_improvement_pct);
      check("candidate DI distance", stored.candidate_di_distance, fresh.candidate_di_distance);
      if (stored.female_gap.best_baseline != fresh.female_gap.best_baseline ||
          stored.best_di_baseline != fresh.best_di_baseline) {
        problems.push_back("derived best baseline does not match the reports");
      }
    }
  }
  return problems;
}

nlohmann::ordered_json to_json(const ComparisonReport& comparison) {
  nlohmann::ordered_json doc;
  auto datasets = nlohmann::ordered_json::array();
  for (const auto& r : comparison.reports) datasets.push_back(r.dataset);
  doc["datasets"] = std::move(datasets);
  doc["candidate"] = comparison.candidate ? nlohmann::ordered_json(comparison.reports[*comparison.candidate].dataset)
                                          : nlohmann::ordered_json(nullptr);
  const auto& first = comparison.reports.front();
  doc["grouping"] = first.grouping;
  doc["positive_label"] = first.positive.name;
  doc["reference"] = first.reference;
  auto audits = nlohmann::ordered_json::array();
  for (const auto& a : comparison.audit_rows) audits.push_back({{"dataset", a.dataset}, {"R", a.R}, {"D", a.D}});
  doc["audit_rows"] = std::move(audits);
  auto reports = nlohmann::ordered_json::array();
  for (const auto& r : comparison.reports) reports.push_back(to_json(r));
  doc["fairness_rows"] = std::move(reports);
  doc["derived"] = comparison.derived ? to_json(*comparison.derived) : nlohmann::ordered_json(nullptr);
  return doc;
}

ComparisonReport comparison_from_json(const nlohmann::json& doc) {
  try {
    std::vector<FairnessReport> reports;
    for (const auto& r : doc.at("fairness_rows")) reports.push_back(fairness_report_from_json(r));
    std::optional<std::size_t> candidate;
    if (doc.contains("candidate") && doc.at("candidate").is_string()) {
      const auto name = doc.at("candidate").get<std::string>();
      for (std::size_t i = 0; i < reports.size(); ++i) {
        if (reports[i].dataset == name) candidate = i;
      }
      if (!candidate) throw Error(ErrorCode::ParseError, "candidate '" + name + "' is not among the reports");
    }
    std::vector<AuditSummary> audits;
    if (doc.contains("audit_rows")) {
      for (const auto& a : doc.at("audit_rows")) {
        audits.push_back({a.at("dataset").get<std::string>(), a.at("R").get<double>(), a.at("D").get<double>()});
      }
    }
    ComparisonReport out;
    out.reports = std::move(reports);
    out.candidate = candidate;
    out.audit_rows = std::move(audits);
    if (doc.contains("derived") && !doc.at("derived").is_null()) {
      const auto& d = doc.at("derived");
      HeadlineStats stats;
      stats.candidate = d.at("candidate").get<std::string>();
      auto read_gap = [](const nlohmann::json& g) {
        return GapReduction{g.at("best_baseline").get<std::string>(), g.at("candidate_gap").get<double>(),
                            g.at("baseline_gap").get<double>(), g.at("reduction_pct").get<double>()};
      };
      stats.female_gap = read_gap(d.at("tpr_gap_female"));
      stats.pooled_gap = read_gap(d.at("tpr_gap_pooled"));
      // object keys come back sorted; restore candidate-then-baselines order
      const auto& distances = d.at("mean_di_distance");
      std::vector<std::string> names{stats.candidate};
      for (const auto& r : out.reports) {
        if (r.dataset != stats.candidate) names.push_back(r.dataset);
      }
      for (const auto& name : names) {
        if (distances.contains(name)) stats.mean_di_distance.emplace_back(name, distances.at(name).get<double>());
      }
      stats.best_di_baseline = d.at("di_best_baseline").get<std::string>();
      stats.di_improvement_pct = d.at("di_improvement_pct").get<double>();
      for (const auto& [name, value] : stats.mean_di_distance) {
        if (name == stats.candidate) stats.candidate_di_distance = value;
        if (name == stats.best_di_baseline) stats.baseline_di_distance = value;
      }
      out.derived = std::move(stats);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed comparison report: ") + e.what());
  }
}

std::optional<ComparisonFormat> parse_comparison_format(std::string_view text) {
  if (text == "json") return ComparisonFormat::json;
  if (text == "markdown" || text == "md") return ComparisonFormat::markdown;
  if (text == "csv") return ComparisonFormat::csv;
  return std::nullopt;
}

std::string format_cell(const std::optional<double>& value) {
  if (!value) return "--";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.3f", *value);
  return buffer;
}

namespace {

std::string shortest(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::string percent(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.1f%%", value);
  return buffer;
}

/// Reference first, then groups in order of first appearance.
std::vector<std::string> group_order(const ComparisonReport& comparison) {
  const auto& reference = comparison.reports.front().reference;
  std::vector<std::string> order{reference};
  for (const auto& r : comparison.reports) {
    for (const auto& g : r.groups) {
      if (std::find(order.begin(), order.end(), g.name) == order.end()) order.push_back(g.name);
    }
  }
  return order;
}

struct Metric {
  const char* label;
  std::optional<double> GroupFairness::*field;
};

constexpr Metric kTableMetrics[] = {
    {"TPR (F)", &GroupFairness::tpr_f},
    {"TPR (M)", &GroupFairness::tpr_m},
    {"DI", &GroupFairness::di},
};

constexpr Metric kCsvMetrics[] = {
    {"TPR (F)", &GroupFairness::tpr_f},
    {"TPR (M)", &GroupFairness::tpr_m},
    {"POR", &GroupFairness::por},
    {"DI", &GroupFairness::di},
};

std::optional<double> optional_stat(auto&& compute) {
  try {
    return compute();
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string emit_markdown(const ComparisonReport& comparison) {
  std::ostringstream out;
  const auto& reports = comparison.reports;
  const auto& reference = reports.front().reference;

  out << "| Group | Metric |";
  for (const auto& r : reports) out << ' ' << r.dataset << " |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < reports.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& group : group_order(comparison)) {
    bool first_row = true;
    for (const auto& metric : kTableMetrics) {
      out << "| " << (first_row ? (group == reference ? group + " (Ref)" : group) : std::string{}) << " | "
          << metric.label << " |";
      for (const auto& r : reports) {
        const auto* row = r.find(group);
        out << ' ' << format_cell(row ? row->*metric.field : std::nullopt) << " |";
      }
      out << '\n';
      first_row = false;
    }
  }

  out << "\n| Summary |";
  for (const auto& r : reports) out << ' ' << r.dataset << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < reports.size(); ++i) out << "---:|";
  out << '\n';
  auto summary_row = [&](const char* label, auto&& stat) {
    out << "| " << label << " |";
    for (const auto& r : reports) out << ' ' << format_cell(optional_stat([&] { return stat(r); })) << " |";
    out << '\n';
  };
  summary_row("Max TPR gap (F)", [](const FairnessReport& r) { return report_tpr_gap(r, GapBasis::female); });
  summary_row("Max TPR gap (pooled)", [](const FairnessReport& r) { return report_tpr_gap(r, GapBasis::pooled); });
  summary_row("Mean DI distance", [](const FairnessReport& r) { return mean_di_distance(r); });
  summary_row("EO epsilon", [](const FairnessReport& r) {
    if (!r.eo_epsilon) throw Error(ErrorCode::UndefinedRate, "");
    return *r.eo_epsilon;
  });
  out << "| Four-fifths flags |";
  for (const auto& r : reports) {
    std::string flagged;
    for (const auto& g : r.groups) {
      if (g.flagged) flagged += (flagged.empty() ? "" : ", ") + g.name;
    }
    out << ' ' << (flagged.empty() ? "none" : flagged) << " |";
  }
  out << '\n';

  if (comparison.derived) {
    const auto& d = *comparison.derived;
    out << "\n| Headline (candidate: " << d.candidate << ") | Value |\n|---|---:|\n";
    out << "| Max TPR gap reduction (F) vs " << d.female_gap.best_baseline << " | "
        << percent(d.female_gap.reduction_pct) << " |\n";
    out << "| Max TPR gap reduction (pooled) vs " << d.pooled_gap.best_baseline << " | "
        << percent(d.pooled_gap.reduction_pct) << " |\n";
    out << "| Mean DI distance improvement vs " << d.best_di_baseline << " | " << percent(d.di_improvement_pct)
        << " |\n";
  }

  if (!comparison.audit_rows.empty()) {
    out << "\n| Dataset | Inclusivity R | Diversity D |\n|---|---:|---:|\n";
    for (const auto& a : comparison.audit_rows) {
      out << "| " << a.dataset << " | " << format_cell(a.R) << " | " << format_cell(a.D) << " |\n";
    }
  }
  return out.str();
}

std::string emit_csv(const ComparisonReport& comparison) {
  std::ostringstream out;
  csv::write_row(out, {"group", "metric", "dataset", "value"});
  for (const auto& group : group_order(comparison)) {
    for (const auto& metric : kCsvMetrics) {
      for (const auto& r : comparison.reports) {
        const auto* row = r.find(group);
        std::string text;
        if (row && (row->*metric.field).has_value()) text = shortest((row->*metric.field).value());
        csv::write_row(out, {group, metric.label, r.dataset, text});
      }
    }
  }
  return out.str();
}

}  // namespace

std::string emit_comparison(const ComparisonReport& comparison, ComparisonFormat format) {
  check_compatible(comparison.reports);
  switch (format) {
    case ComparisonFormat::json: return to_json(comparison).dump(2) + "\n";
    case ComparisonFormat::markdown: return emit_markdown(comparison);
    case ComparisonFormat::csv: return emit_csv(comparison);
  }
  return {};
}

std::vector<PlotPoint> plot_points_from_audits(std::span<const AuditSummary> audits) {
  std::vector<PlotPoint> out;
  for (const auto& a : audits) {
    out.push_back({a.dataset, "inclusivity_R", a.R});
    out.push_back({a.dataset, "diversity_D", a.D});
  }
  return out;
}

std::vector<PlotPoint> plot_points_from_accuracy(std::span<const FairnessReport> reports) {
  std::vector<PlotPoint> out;
  for (const auto& r : reports) {
    if (r.overall_accuracy) out.push_back({r.dataset, "accuracy", *r.overall_accuracy});
  }
  return out;
}

std::string emit_plot_data(std::vector<PlotPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const PlotPoint& a, const PlotPoint& b) {
    return std::tie(a.dataset, a.metric) < std::tie(b.dataset, b.metric);
  });
  std::ostringstream out;
  csv::write_row(out, {"dataset", "metric", "value"});
  for (const auto& p : points) csv::write_row(out, {p.dataset, p.metric, shortest(p.value)});
  return out.str();
}

}  // namespace fairaudit
