#include "fairaudit/balance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "fairaudit/audit.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

void QuotaPolicy::validate() const {
  if (mode == QuotaMode::fixed && fixed_quota < 1) {
    throw Error(ErrorCode::InvalidArgument, "fixed quota must be >= 1");
  }
  if (max_augment_factor < 1) throw Error(ErrorCode::InvalidArgument, "max augment factor must be >= 1");
}

namespace {

std::string_view mode_name(QuotaMode mode) {
  switch (mode) {
    case QuotaMode::fixed: return "fixed";
    case QuotaMode::min_nonzero: return "min_nonzero";
    case QuotaMode::median: return "median";
    case QuotaMode::max_fillable: return "max_fillable";
  }
  return "?";
}

std::optional<QuotaMode> parse_mode_name(std::string_view name) {
  if (name == "fixed") return QuotaMode::fixed;
  if (name == "min_nonzero" || name == "min-nonzero" || name == "min") return QuotaMode::min_nonzero;
  if (name == "median") return QuotaMode::median;
  if (name == "max_fillable" || name == "max-fillable") return QuotaMode::max_fillable;
  return std::nullopt;
}

std::string_view kind_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::keep_all: return "keep_all";
    case ActionKind::undersample: return "undersample_to";
    case ActionKind::augment: return "augment";
  }
  return "?";
}

}  // namespace

QuotaPolicy parse_quota_policy(std::string_view quota, std::size_t max_augment_factor, bool allow_undersample) {
  QuotaPolicy policy;
  policy.max_augment_factor = max_augment_factor;
  policy.allow_undersample = allow_undersample;
  if (auto mode = parse_mode_name(quota); mode && *mode != QuotaMode::fixed) {
    policy.mode = *mode;
  } else {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(quota.data(), quota.data() + quota.size(), value);
    if (ec != std::errc{} || ptr != quota.data() + quota.size() || value == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "quota must be median, min, max-fillable or a positive integer, got '" + std::string(quota) + "'");
    }
    policy.mode = QuotaMode::fixed;
    policy.fixed_quota = value;
  }
  policy.validate();
  return policy;
}

std::vector<std::size_t> merged_cell_counts(std::span<const Manifest> sources) {
  if (sources.empty()) throw Error(ErrorCode::InvalidArgument, "at least one source manifest is required");
  const auto& taxonomy = sources.front().taxonomy();
  std::vector<std::size_t> counts(taxonomy.cell_count(), 0);
  for (const auto& source : sources) {
    if (!(source.taxonomy() == taxonomy)) {
      throw Error(ErrorCode::TaxonomyMismatch, "source '" + source.name() + "' uses a different taxonomy");
    }
    const auto dense = dense_cell_counts(source);
    for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += dense[c];
  }
  return counts;
}

namespace {

std::size_t quota_from_counts(std::span<const std::size_t> counts, const QuotaPolicy& policy) {
  policy.validate();
  std::vector<std::size_t> nonzero;
  for (auto c : counts) {
    if (c > 0) nonzero.push_back(c);
  }
  if (nonzero.empty()) throw Error(ErrorCode::EmptyLattice, "every lattice cell is empty across the sources");
  std::sort(nonzero.begin(), nonzero.end());
  switch (policy.mode) {
    case QuotaMode::fixed: return policy.fixed_quota;
    case QuotaMode::min_nonzero: return nonzero.front();
    case QuotaMode::median: return nonzero[(nonzero.size() - 1) / 2];
    case QuotaMode::max_fillable: return nonzero.front() * policy.max_augment_factor;
  }
  return 0;
}

}  // namespace

std::size_t resolve_quota(std::span<const Manifest> sources, const QuotaPolicy& policy) {
  return quota_from_counts(merged_cell_counts(sources), policy);
}

std::vector<std::size_t> even_multipliers(std::size_t available, std::size_t quota) {
  if (available == 0) return {};
  const std::size_t base = quota / available;
  const std::size_t extra = quota % available;
  std::vector<std::size_t> out(available, base);
  std::fill_n(out.begin(), extra, base + 1);
  return out;
}

SourceIdentity source_identity(const Manifest& manifest) {
  return {manifest.name(), manifest.size(), manifest_checksum(manifest)};
}

BalancePlan build_plan(std::span<const Manifest> sources, const QuotaPolicy& policy, std::uint64_t seed,
                       ParseMode source_mode) {
  const auto counts = merged_cell_counts(sources);
  BalancePlan plan;
  plan.policy = policy;
  plan.quota = quota_from_counts(counts, policy);
  plan.seed = seed;
  plan.source_mode = source_mode;
  plan.taxonomy = sources.front().shared_taxonomy();
  for (const auto& source : sources) plan.sources.push_back(source_identity(source));

  const std::size_t k = policy.max_augment_factor;
  const std::size_t quota = plan.quota;
  std::vector<std::size_t> resulting(counts.size(), 0);
  plan.actions.reserve(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    CellAction action;
    action.cell = plan.taxonomy->cell_key(c);
    action.available = counts[c];
    action.quota = quota;
    const std::size_t available = counts[c];
    if (available >= quota) {
      if (available > quota && policy.allow_undersample) {
        action.kind = ActionKind::undersample;
        action.undersample_to = quota;
        action.resulting = quota;
      } else {
        action.resulting = available;
      }
    } else if (available > 0 && k > 1) {
      const std::size_t target = std::min(quota, available * k);
      action.kind = ActionKind::augment;
      action.multipliers = even_multipliers(available, target);
      action.resulting = target;
    } else {
      action.resulting = available;
    }
    action.shortfall = quota > action.resulting ? quota - action.resulting : 0;
    resulting[c] = action.resulting;
    plan.actions.push_back(std::move(action));
  }
  plan.projected_D = diversity_from_counts(resulting, *plan.taxonomy, DiversityConvention::observed).D;
  return plan;
}

Manifest apply_plan(const BalancePlan& plan, std::span<const Manifest> sources) {
  if (sources.size() != plan.sources.size()) {
    throw Error(ErrorCode::SourceMismatch, "plan was built from " + std::to_string(plan.sources.size()) +
                                               " sources, got " + std::to_string(sources.size()));
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto identity = source_identity(sources[i]);
    if (!(identity == plan.sources[i])) {
      throw Error(ErrorCode::SourceMismatch,
                  "source " + std::to_string(i + 1) + " ('" + identity.name + "', " +
                      std::to_string(identity.records) + " records, checksum " + identity.checksum +
                      ") does not match the planned '" + plan.sources[i].name + "'");
    }
  }
  if (!plan.taxonomy || !(*plan.taxonomy == sources.front().taxonomy())) {
    throw Error(ErrorCode::TaxonomyMismatch, "plan taxonomy differs from the sources'");
  }
  const Manifest merged = merge_manifests(sources);
  const auto& taxonomy = merged.taxonomy();
  if (plan.actions.size() != taxonomy.cell_count()) {
    throw Error(ErrorCode::InvalidArgument, "plan has " + std::to_string(plan.actions.size()) +
                                                " actions for " + std::to_string(taxonomy.cell_count()) + " cells");
  }

  std::vector<std::vector<std::size_t>> members(taxonomy.cell_count());
  const auto cells = merged.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) members[cells[i]].push_back(i);

  // copies[i] = how many times merged record i appears in the output.
  std::vector<std::size_t> copies(merged.size(), 0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& action = plan.actions[c];
    auto& order = members[c];
    if (order.size() != action.available) {
      throw Error(ErrorCode::SourceMismatch, "cell count changed since the plan was built");
    }
    switch (action.kind) {
      case ActionKind::keep_all:
        for (auto i : order) copies[i] = 1;
        break;
      case ActionKind::undersample: {
        auto rng = Rng::stream(plan.seed, c);
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t j = 0; j < action.undersample_to && j < order.size(); ++j) copies[order[j]] = 1;
        break;
      }
      case ActionKind::augment: {
        if (action.multipliers.size() != order.size()) {
          throw Error(ErrorCode::InvalidArgument, "multiplier schedule does not match the cell size");
        }
        auto rng = Rng::stream(plan.seed, c);
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t j = 0; j < order.size(); ++j) copies[order[j]] = action.multipliers[j];
        break;
      }
    }
  }

  std::vector<FaceRecord> out;
  out.reserve(std::accumulate(copies.begin(), copies.end(), std::size_t{0}));
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (copies[i] == 0) continue;
    const auto& real = merged.records()[i];
    out.push_back(real);
    for (std::size_t j = 1; j < copies[i]; ++j) {
      FaceRecord copy = real;
      copy.id = real.id + "~aug" + std::to_string(j);
      copy.augmented_from = real.id;
      out.push_back(std::move(copy));
    }
  }
  return Manifest(merged.shared_taxonomy(), std::move(out), "balanced");
}

nlohmann::ordered_json to_json(const BalancePlan& plan) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json policy;
  policy["mode"] = mode_name(plan.policy.mode);
  policy["fixed_quota"] = plan.policy.mode == QuotaMode::fixed ? nlohmann::ordered_json(plan.policy.fixed_quota)
                                                                : nlohmann::ordered_json(nullptr);
  policy["max_augment_factor"] = plan.policy.max_augment_factor;
  policy["allow_undersample"] = plan.policy.allow_undersample;
  doc["policy"] = std::move(policy);
  doc["seed"] = plan.seed;
  doc["quota"] = plan.quota;
  doc["source_mode"] = plan.source_mode == ParseMode::strict ? "strict" : "lenient";
  doc["taxonomy"] = plan.taxonomy ? plan.taxonomy->to_json() : nlohmann::ordered_json(nullptr);
  auto sources = nlohmann::ordered_json::array();
  for (const auto& s : plan.sources) {
    sources.push_back({{"name", s.name}, {"records", s.records}, {"checksum", s.checksum}});
  }
  doc["sources"] = std::move(sources);
  auto actions = nlohmann::ordered_json::array();
  for (const auto& a : plan.actions) {
    nlohmann::ordered_json action{{"kind", kind_name(a.kind)}};
    if (a.kind == ActionKind::undersample) action["n"] = a.undersample_to;
    if (a.kind == ActionKind::augment) {
      action["base"] = a.available;
      action["multipliers"] = a.multipliers;
    }
    actions.push_back({{"cell", to_json(a.cell)},
                       {"available", a.available},
                       {"quota", a.quota},
                       {"action", std::move(action)},
                       {"resulting", a.resulting},
                       {"shortfall", a.shortfall},
                       {"unfillable", a.unfillable()}});
  }
  doc["actions"] = std::move(actions);
  doc["projected_D"] = plan.projected_D;
  return doc;
}

BalancePlan plan_from_json(const nlohmann::json& doc) {
  try {
    BalancePlan plan;
    const auto& policy = doc.at("policy");
    auto mode = parse_mode_name(policy.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::ParseError, "unknown quota mode in plan");
    plan.policy.mode = *mode;
    if (*mode == QuotaMode::fixed) plan.policy.fixed_quota = policy.at("fixed_quota").get<std::size_t>();
    plan.policy.max_augment_factor = policy.at("max_augment_factor").get<std::size_t>();
    plan.policy.allow_undersample = policy.at("allow_undersample").get<bool>();
    plan.policy.validate();
    plan.seed = doc.at("seed").get<std::uint64_t>();
    plan.quota = doc.at("quota").get<std::size_t>();
    plan.source_mode = doc.value("source_mode", std::string("strict")) == "lenient" ? ParseMode::lenient
                                                                                     : ParseMode::strict;
    plan.taxonomy = std::make_shared<const DemographicTaxonomy>(taxonomy_from_json(doc.at("taxonomy")));
    for (const auto& s : doc.at("sources")) {
      plan.sources.push_back({s.at("name").get<std::string>(), s.at("records").get<std::size_t>(),
                              s.at("checksum").get<std::string>()});
    }
    for (const auto& a : doc.at("actions")) {
      CellAction action;
      const auto& cell = a.at("cell");
      action.cell = {cell.at("gender").get<std::string>(), cell.at("race").get<std::string>(),
                     cell.at("age_bin").get<std::string>()};
      action.available = a.at("available").get<std::size_t>();
      action.quota = a.at("quota").get<std::size_t>();
      action.resulting = a.at("resulting").get<std::size_t>();
      action.shortfall = a.at("shortfall").get<std::size_t>();
      const auto& act = a.at("action");
      const auto kind = act.at("kind").get<std::string>();
      if (kind == "keep_all") {
        action.kind = ActionKind::keep_all;
      } else if (kind == "undersample_to") {
        action.kind = ActionKind::undersample;
        action.undersample_to = act.at("n").get<std::size_t>();
      } else if (kind == "augment") {
        action.kind = ActionKind::augment;
        action.multipliers = act.at("multipliers").get<std::vector<std::size_t>>();
      } else {
        throw Error(ErrorCode::ParseError, "unknown action kind '" + kind + "'");
      }
      const auto expected = plan.taxonomy->cell_index(action.cell);
      if (!expected || *expected != plan.actions.size()) {
        throw Error(ErrorCode::ParseError, "plan actions must list every lattice cell in taxonomy order");
      }
      plan.actions.push_back(std::move(action));
    }
    if (plan.actions.size() != plan.taxonomy->cell_count()) {
      throw Error(ErrorCode::ParseError, "plan must hold one action per lattice cell");
    }
    plan.projected_D = doc.at("projected_D").get<double>();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed balance plan: ") + e.what());
  }
}

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "split fractions must sum to 1");
}

std::array<std::size_t, 3> split_counts(std::size_t n, const std::array<double, 3>& fractions) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * fractions[i];
    // Absorb representation error so 20 * 0.15 lands on 3, not 2.999...
    const double whole = std::floor(exact + 1e-9);
    counts[i] = static_cast<std::size_t>(whole);
    remainders[i] = std::max(0.0, exact - whole);
    assigned += counts[i];
  }
  // Floors can only undershoot; overshoot would need fractions summing > 1.
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b] + 1e-12; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % 3) {
    ++counts[order[i]];
    ++assigned;
  }
  while (assigned > n) {
    for (std::size_t i = 3; i-- > 0 && assigned > n;) {
      if (counts[i] > 0) {
        --counts[i];
        --assigned;
      }
    }
  }
  return counts;
}

SplitResult stratified_split(const Manifest& manifest, const SplitSpec& spec) {
  spec.validate();
  const auto& taxonomy = manifest.taxonomy();
  std::vector<std::vector<std::size_t>> members(taxonomy.cell_count());
  const auto cells = manifest.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) members[cells[i]].push_back(i);

  std::vector<Split> assignment(manifest.size(), Split::train);
  std::vector<Warning> warnings;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& order = members[c];
    if (order.empty()) continue;
    auto rng = Rng::stream(spec.seed, c);
    rng.shuffle(std::span<std::size_t>(order));
    const auto counts = split_counts(order.size(), spec.fractions);
    std::size_t j = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < counts[s]; ++k) assignment[order[j++]] = static_cast<Split>(s);
      if (counts[s] == 0 && spec.fractions[s] > 0.0) {
        const auto key = taxonomy.cell_key(c);
        warnings.push_back({"THIN_CELL", key.gender + "|" + key.race + "|" + key.age_bin + " n=" +
                                             std::to_string(order.size()) + " leaves " +
                                             std::string(to_string(static_cast<Split>(s))) + " empty"});
      }
    }
  }

  std::array<std::vector<FaceRecord>, 3> parts;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    FaceRecord record = manifest.records()[i];
    record.split = assignment[i];
    parts[static_cast<std::size_t>(assignment[i])].push_back(std::move(record));
  }
  const auto& shared = manifest.shared_taxonomy();
  return SplitResult{Manifest(shared, std::move(parts[0]), manifest.name() + "_train"),
                     Manifest(shared, std::move(parts[1]), manifest.name() + "_val"),
                     Manifest(shared, std::move(parts[2]), manifest.name() + "_test"), std::move(warnings)};
}

}  // namespace fairaudit
