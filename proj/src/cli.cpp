#include "fairaudit/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fairaudit/audit.hpp"
#include "fairaudit/balance.hpp"
#include "fairaudit/fairness.hpp"
#include "fairaudit/manifest.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/taxonomy.hpp"

namespace fairaudit::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;
  bool verbose = false;

  void warn(const std::vector<Warning>& warnings) const {
    if (quiet) return;
    for (const auto& w : warnings) err << "WARN " << w.code << ' ' << w.detail << '\n';
  }
  void info(const std::string& message) const {
    if (verbose) err << "INFO " << message << '\n';
  }
};

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

/// `path` when given, otherwise the command's stdout.
void emit(const Context& ctx, const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    ctx.out << content;
  } else {
    write_file(path, content);
    ctx.info("wrote " + path);
  }
}

nlohmann::json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Prefixes errors with the file they came from.
template <typename F>
auto with_file(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

Manifest load_manifest(const Context& ctx, const std::string& path,
                       const std::shared_ptr<const DemographicTaxonomy>& taxonomy, ParseMode mode) {
  return with_file(path, [&] {
    auto in = open_in(path);
    auto parsed = parse_manifest(in, taxonomy, mode, stem(path));
    ctx.warn(parsed.warnings);
    if (parsed.remapped > 0) {
      ctx.info(path + ": remapped " + std::to_string(parsed.remapped) + " labels to fallback subgroups");
    }
    return std::move(parsed.manifest);
  });
}

std::shared_ptr<const DemographicTaxonomy> load_taxonomy_arg(const std::string& source) {
  return with_file(source, [&] { return std::make_shared<const DemographicTaxonomy>(resolve_taxonomy(source)); });
}

std::string default_reference(const Grouping& grouping) {
  if (grouping.attributes().size() == 1) {
    switch (grouping.attributes().front()) {
      case Attribute::race: return "White";
      case Attribute::age: return "20-29";
      case Attribute::gender: return "Male";
    }
  }
  throw Error(ErrorCode::InvalidArgument,
              "--reference is required for grouping '" + grouping.name() + "'");
}

// ---------------------------------------------------------------------------

struct AuditArgs {
  std::string manifest;
  std::string taxonomy = "table1";
  std::string out;
  std::string name;
  std::string diversity_over = "observed";
  bool lenient = false;
};

int do_audit(const Context& ctx, const AuditArgs& a) {
  const auto convention = parse_diversity_convention(a.diversity_over);
  if (!convention) throw Error(ErrorCode::InvalidArgument, "--diversity-over must be observed or all-cells");
  const auto taxonomy = load_taxonomy_arg(a.taxonomy);
  const auto manifest =
      load_manifest(ctx, a.manifest, taxonomy, a.lenient ? ParseMode::lenient : ParseMode::strict);
  const auto report = with_file(a.manifest, [&] { return audit(manifest, *convention); });
  emit(ctx, a.out, to_json(report, a.name.empty() ? stem(a.manifest) : a.name).dump(2) + "\n");
  return kExitOk;
}

struct BalanceArgs {
  std::vector<std::string> sources;
  std::string taxonomy = "table1";
  std::string quota = "median";
  std::size_t max_augment = 3;
  std::uint64_t seed = kDefaultSeed;
  std::string plan_out;
  bool lenient = false;
  bool no_undersample = false;
};

int do_balance(const Context& ctx, const BalanceArgs& a) {
  const auto policy = parse_quota_policy(a.quota, a.max_augment, !a.no_undersample);
  const auto taxonomy = load_taxonomy_arg(a.taxonomy);
  const auto mode = a.lenient ? ParseMode::lenient : ParseMode::strict;
  std::vector<Manifest> sources;
  for (const auto& path : a.sources) sources.push_back(load_manifest(ctx, path, taxonomy, mode));
  const auto plan = build_plan(sources, policy, a.seed, mode);
  std::size_t unfillable = 0;
  std::size_t short_cells = 0;
  for (const auto& action : plan.actions) {
    unfillable += action.unfillable() ? 1 : 0;
    short_cells += action.shortfall > 0 ? 1 : 0;
  }
  if (short_cells > 0 && !ctx.quiet) {
    ctx.err << "WARN SHORTFALL " << short_cells << " cells below quota " << plan.quota << " (" << unfillable
            << " with no records)\n";
  }
  emit(ctx, a.plan_out, to_json(plan).dump(2) + "\n");
  return kExitOk;
}

struct ApplyArgs {
  std::string plan;
  std::vector<std::string> sources;
  std::string out;
};

int do_apply(const Context& ctx, const ApplyArgs& a) {
  const auto plan = with_file(a.plan, [&] { return plan_from_json(read_json(a.plan)); });
  std::vector<Manifest> sources;
  for (const auto& path : a.sources) sources.push_back(load_manifest(ctx, path, plan.taxonomy, plan.source_mode));
  const auto balanced = apply_plan(plan, sources);
  emit(ctx, a.out, manifest_to_csv(balanced, LineageColumn::always));
  if (!a.out.empty() && a.out != "-") {
    nlohmann::ordered_json meta{{"command", "apply"},
                                {"seed", plan.seed},
                                {"plan", a.plan},
                                {"records", balanced.size()},
                                {"checksum", manifest_checksum(balanced)}};
    write_file(a.out + ".meta.json", meta.dump(2) + "\n");
  }
  return kExitOk;
}

struct SplitArgs {
  std::string manifest;
  std::string taxonomy = "table1";
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = kDefaultSeed;
  std::string out_prefix;
  bool lenient = false;
};

int do_split(const Context& ctx, const SplitArgs& a) {
  const auto taxonomy = load_taxonomy_arg(a.taxonomy);
  const auto manifest =
      load_manifest(ctx, a.manifest, taxonomy, a.lenient ? ParseMode::lenient : ParseMode::strict);
  SplitSpec spec{{a.train, a.val, a.test}, a.seed};
  const auto result = stratified_split(manifest, spec);
  ctx.warn(result.warnings);
  write_file(a.out_prefix + "train.csv", manifest_to_csv(result.train));
  write_file(a.out_prefix + "val.csv", manifest_to_csv(result.val));
  write_file(a.out_prefix + "test.csv", manifest_to_csv(result.test));
  nlohmann::ordered_json meta{{"command", "split"},
                              {"seed", a.seed},
                              {"fractions", {a.train, a.val, a.test}},
                              {"input", a.manifest},
                              {"counts", {{"train", result.train.size()},
                                          {"val", result.val.size()},
                                          {"test", result.test.size()}}}};
  write_file(a.out_prefix + "split.json", meta.dump(2) + "\n");
  ctx.info("wrote " + a.out_prefix + "{train,val,test}.csv");
  return kExitOk;
}

struct EvaluateArgs {
  std::string predictions;
  std::string taxonomy = "eval";
  std::string group = "race";
  std::string reference;
  std::string positive = "female";
  double threshold = 0.5;
  std::string dataset;
  std::string out;
};

int do_evaluate(const Context& ctx, const EvaluateArgs& a) {
  const auto grouping = Grouping::parse(a.group);
  const auto positive = PositiveClass::parse(a.positive);
  const auto reference = a.reference.empty() ? default_reference(grouping) : a.reference;
  const auto taxonomy = load_taxonomy_arg(a.taxonomy);
  auto parsed = with_file(a.predictions, [&] {
    auto in = open_in(a.predictions);
    return parse_predictions(in, *taxonomy, a.threshold);
  });
  ctx.warn(parsed.warnings);
  const auto report = with_file(a.predictions, [&] {
    return evaluate(parsed.records, *taxonomy, grouping, reference, positive,
                    a.dataset.empty() ? stem(a.predictions) : a.dataset);
  });
  emit(ctx, a.out, to_json(report).dump(2) + "\n");
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> reports;
  std::string candidate;
  std::string format = "markdown";
  std::string out;
  std::vector<std::string> audits;
  std::string plot_out;
};

int do_compare(const Context& ctx, const CompareArgs& a) {
  const auto format = parse_comparison_format(a.format);
  if (!format) throw Error(ErrorCode::InvalidArgument, "--format must be json, markdown or csv");
  std::vector<FairnessReport> reports;
  std::optional<std::size_t> candidate;
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    const auto& path = a.reports[i];
    auto report = with_file(path, [&] { return fairness_report_from_json(read_json(path)); });
    if (report.dataset.empty()) report.dataset = stem(path);
    if (!a.candidate.empty() && (path == a.candidate || report.dataset == a.candidate)) candidate = i;
    reports.push_back(std::move(report));
  }
  if (!a.candidate.empty() && !candidate) {
    throw Error(ErrorCode::InvalidArgument, "--candidate '" + a.candidate + "' is not one of --reports");
  }
  std::vector<AuditSummary> audits;
  for (const auto& path : a.audits) {
    audits.push_back(with_file(path, [&] { return audit_summary_from_json(read_json(path), stem(path)); }));
  }
  const auto comparison = build_comparison(reports, candidate, audits);
  if (auto problems = verify_comparison(comparison); !problems.empty()) {
    for (const auto& p : problems) ctx.err << "WARN VERIFY " << p << '\n';
  }
  emit(ctx, a.out, emit_comparison(comparison, *format));
  if (!a.plot_out.empty()) {
    auto points = plot_points_from_audits(audits);
    const auto accuracy = plot_points_from_accuracy(reports);
    points.insert(points.end(), accuracy.begin(), accuracy.end());
    write_file(a.plot_out, emit_plot_data(std::move(points)));
  }
  return kExitOk;
}

struct SynthArgs {
  std::string spec;
  std::string taxonomy = "eval";
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

int do_synth(const Context& ctx, const SynthArgs& a) {
  const auto taxonomy = load_taxonomy_arg(a.taxonomy);
  const auto spec = with_file(a.spec, [&] { return synth_spec_from_json(read_json(a.spec)); });
  const auto records = with_file(a.spec, [&] { return synthesize_predictions(spec, *taxonomy, a.seed); });
  std::ostringstream csv;
  write_predictions(csv, records);
  emit(ctx, a.out, csv.str());
  if (!a.out.empty() && a.out != "-") {
    nlohmann::ordered_json meta{{"command", "synth"}, {"seed", a.seed}, {"spec", a.spec}, {"records", records.size()}};
    write_file(a.out + ".meta.json", meta.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  if (const char* level = std::getenv("FAIRAUDIT_LOG")) {
    const std::string v(level);
    ctx.quiet = v == "quiet" || v == "error";
    ctx.verbose = v == "info" || v == "debug";
  }

  CLI::App app{"fairaudit: demographic audit, rebalancing and fairness evaluation for face-dataset manifests",
               "fairaudit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  const std::string taxonomy_help = "Taxonomy preset (table1, eval) or JSON document path";

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand("audit", "Inclusivity, Diversity and per-cell shares of one manifest");
  audit_cmd->add_option("--manifest", audit_args.manifest, "Manifest CSV")->required();
  audit_cmd->add_option("--taxonomy", audit_args.taxonomy, taxonomy_help)->capture_default_str();
  audit_cmd->add_option("--out", audit_args.out, "Audit report JSON (stdout when omitted)");
  audit_cmd->add_option("--name", audit_args.name, "Dataset name recorded in the report (default: file stem)");
  audit_cmd->add_option("--diversity-over", audit_args.diversity_over, "Cells entering D: observed or all-cells")
      ->capture_default_str();
  audit_cmd->add_flag("--lenient", audit_args.lenient, "Remap unknown gender/race labels to the fallback subgroup");

  BalanceArgs balance_args;
  auto* balance_cmd = app.add_subcommand("balance", "Build a per-cell balancing plan over merged sources");
  balance_cmd->add_option("--sources", balance_args.sources, "Source manifest CSVs")->required();
  balance_cmd->add_option("--taxonomy", balance_args.taxonomy, taxonomy_help)->capture_default_str();
  balance_cmd->add_option("--quota", balance_args.quota, "Per-cell target: median, min, max-fillable or a count")
      ->capture_default_str();
  balance_cmd->add_option("--max-augment", balance_args.max_augment, "Max appearances of one real record")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  balance_cmd->add_option("--seed", balance_args.seed, "Seed for sampling")->capture_default_str();
  balance_cmd->add_option("--plan-out", balance_args.plan_out, "Balance plan JSON")->required();
  balance_cmd->add_flag("--lenient", balance_args.lenient, "Remap unknown gender/race labels to the fallback subgroup");
  balance_cmd->add_flag("--no-undersample", balance_args.no_undersample, "Keep every record of over-full cells");

  ApplyArgs apply_args;
  auto* apply_cmd = app.add_subcommand("apply", "Realize a balance plan as a manifest CSV");
  apply_cmd->add_option("--plan", apply_args.plan, "Balance plan JSON")->required();
  apply_cmd->add_option("--sources", apply_args.sources, "The source CSVs the plan was built from, same order")
      ->required();
  apply_cmd->add_option("--out", apply_args.out, "Balanced manifest CSV")->required();

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "Per-cell stratified train/val/test split");
  split_cmd->add_option("--manifest", split_args.manifest, "Manifest CSV")->required();
  split_cmd->add_option("--taxonomy", split_args.taxonomy, taxonomy_help)->capture_default_str();
  split_cmd->add_option("--train", split_args.train, "Train fraction")->capture_default_str();
  split_cmd->add_option("--val", split_args.val, "Validation fraction")->capture_default_str();
  split_cmd->add_option("--test", split_args.test, "Test fraction")->capture_default_str();
  split_cmd->add_option("--seed", split_args.seed, "Seed for the within-cell shuffle")->capture_default_str();
  split_cmd->add_option("--out-prefix", split_args.out_prefix, "Writes <prefix>{train,val,test}.csv and <prefix>split.json")
      ->required();
  split_cmd->add_flag("--lenient", split_args.lenient, "Remap unknown gender/race labels to the fallback subgroup");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Group fairness report for a prediction log");
  eval_cmd->add_option("--predictions", eval_args.predictions, "Prediction log CSV")->required();
  eval_cmd->add_option("--taxonomy", eval_args.taxonomy, taxonomy_help)->capture_default_str();
  eval_cmd->add_option("--group", eval_args.group, "Grouping: race, age, gender or a '+' combination")
      ->capture_default_str();
  eval_cmd->add_option("--reference", eval_args.reference,
                       "Reference (privileged) group; defaults: race=White, age=20-29, gender=Male");
  eval_cmd->add_option("--positive", eval_args.positive, "Positive class: female (y=1) or male (y=0)")
      ->capture_default_str();
  eval_cmd->add_option("--threshold", eval_args.threshold, "Score threshold for the y_pred consistency check")
      ->capture_default_str();
  eval_cmd->add_option("--dataset", eval_args.dataset, "Dataset name recorded in the report (default: file stem)");
  eval_cmd->add_option("--out", eval_args.out, "Fairness report JSON (stdout when omitted)");

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "Side-by-side fairness table and headline statistics");
  compare_cmd->add_option("--reports", compare_args.reports, "Fairness report JSONs, one column each")->required();
  compare_cmd->add_option("--candidate", compare_args.candidate, "Report (path or dataset name) compared against the rest");
  compare_cmd->add_option("--format", compare_args.format, "json, markdown or csv")->capture_default_str();
  compare_cmd->add_option("--out", compare_args.out, "Output file (stdout when omitted)");
  compare_cmd->add_option("--audits", compare_args.audits, "Audit report JSONs for the R/D rows");
  compare_cmd->add_option("--plot-out", compare_args.plot_out, "Long-format plot CSV (dataset,metric,value)");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a prediction log with exact per-group rates");
  synth_cmd->add_option("--spec", synth_args.spec, "Synthesis spec JSON")->required();
  synth_cmd->add_option("--taxonomy", synth_args.taxonomy, taxonomy_help)->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Seed for row order")->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "Prediction log CSV (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*audit_cmd) return do_audit(ctx, audit_args);
    if (*balance_cmd) return do_balance(ctx, balance_args);
    if (*apply_cmd) return do_apply(ctx, apply_args);
    if (*split_cmd) return do_split(ctx, split_args);
    if (*eval_cmd) return do_evaluate(ctx, eval_args);
    if (*compare_cmd) return do_compare(ctx, compare_args);
    if (*synth_cmd) return do_synth(ctx, synth_args);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitValidation;
  }
  return kExitUsage;
}

}  // namespace fairaudit::cli
