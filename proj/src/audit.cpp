#include "fairaudit/audit.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

template <typename T>
T field(const nlohmann::json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::InvalidArgument, fmt::format("config field '{}' has the wrong type", key));
  }
}

void only_keys(const nlohmann::json& doc, std::initializer_list<const char*> known,
               std::string_view where) {
  if (!doc.is_object()) fail(ErrorCode::InvalidArgument, fmt::format("{} must be an object", where));
  for (const auto& [key, value] : doc.items()) {
    if (std::ranges::none_of(known, [&](const char* k) { return key == k; })) {
      fail(ErrorCode::InvalidArgument, fmt::format("unknown {} field '{}'", where, key));
    }
  }
}

GroupPolicy policy_from_json(const std::string& attribute, const nlohmann::json& doc) {
  only_keys(doc, {"drop", "collapse", "keep", "rest"}, "policy");
  GroupPolicy p;
  p.attribute = attribute;
  p.drop_values = field(doc, "drop", p.drop_values);
  p.collapse_map = field(doc, "collapse", p.collapse_map);
  p.keep_values = field(doc, "keep", p.keep_values);
  p.rest_value = field(doc, "rest", p.rest_value);
  validate_policy(p);
  return p;
}

nlohmann::json policy_to_json(const GroupPolicy& p) {
  return {{"drop", p.drop_values},
          {"collapse", p.collapse_map},
          {"keep", p.keep_values},
          {"rest", p.rest_value}};
}

// Outcome codes per record.
enum Outcome : std::uint8_t { kTp, kFn, kTn, kFp };

using Counts = std::array<std::uint64_t, 4>;

ConfusionCounts to_confusion(const Counts& c) { return {c[kTp], c[kFp], c[kTn], c[kFn]}; }

struct Slot {
  std::size_t attribute = 0;  // index into the task's attribute list
  std::string subgroup;
  GapKind kind = GapKind::Recall;
};

struct AttributeGroups {
  std::string name;
  std::vector<std::string> groups;     // sorted
  std::vector<std::int32_t> group_of;  // per test record, -1 when dropped
};

std::optional<GapValue> slot_value(const Slot& slot, const AttributeGroups& attr,
                                   const std::vector<Counts>& counts) {
  std::vector<GroupRates> rates;
  bool present = false;
  for (std::size_t g = 0; g < attr.groups.size(); ++g) {
    auto r = rate_of(slot.kind, to_confusion(counts[g]), attr.groups[g]);
    if (r.total == 0) continue;
    present = present || attr.groups[g] == slot.subgroup;
    rates.push_back(std::move(r));
  }
  if (!present || rates.size() < 2) return std::nullopt;
  return multi_group_gap(slot.kind, rates, slot.subgroup);
}

std::string percent_label(double level) { return fmt::format("{:g}%", level * 100.0); }

}  // namespace

GroupPolicy AuditConfig::policy_for(const std::string& attribute) const {
  const auto it = policies.find(attribute);
  return it != policies.end() ? it->second : default_policy(attribute);
}

void validate(const AuditConfig& c) {
  if (c.attributes.empty()) fail(ErrorCode::InvalidArgument, "attributes: need at least one");
  if (c.gap_kinds.empty()) fail(ErrorCode::InvalidArgument, "gaps: need at least one gap kind");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    fail(ErrorCode::InvalidArgument, fmt::format("alpha: {} is not in (0, 1)", c.alpha));
  }
  if (c.threshold && !(*c.threshold >= 0.0 && *c.threshold <= 1.0)) {
    fail(ErrorCode::InvalidArgument, fmt::format("threshold: {} is not in [0, 1]", *c.threshold));
  }
  for (const auto& f : c.formats) {
    if (f != "csv" && f != "markdown") {
      fail(ErrorCode::InvalidArgument, fmt::format("format: unknown format '{}'", f));
    }
  }
  if (c.formats.empty()) fail(ErrorCode::InvalidArgument, "format: need csv and/or markdown");
  for (const auto& [attr, policy] : c.policies) validate_policy(policy);
  validate(c.bootstrap);
}

AuditConfig audit_config_from_json(const nlohmann::json& doc) {
  only_keys(doc,
            {"predictions", "attributes", "policies", "gaps", "bootstrap", "alpha", "fdr",
             "threshold", "out", "formats"},
            "audit config");
  AuditConfig c;
  c.predictions = field(doc, "predictions", std::string());
  c.attributes = field(doc, "attributes", c.attributes);
  if (doc.contains("policies")) {
    const auto& p = doc.at("policies");
    if (!p.is_object()) fail(ErrorCode::InvalidArgument, "policies must be an object");
    for (const auto& [attr, value] : p.items()) c.policies[attr] = policy_from_json(attr, value);
  }
  c.alpha = field(doc, "alpha", c.alpha);
  c.fdr = field(doc, "fdr", c.fdr);
  c.out_dir = field(doc, "out", c.out_dir.string());
  c.formats = field(doc, "formats", c.formats);
  if (doc.contains("gaps")) {
    c.gap_kinds.clear();
    for (const auto& g : field(doc, "gaps", std::vector<std::string>{})) {
      try {
        c.gap_kinds.push_back(parse_gap_kind(g));
      } catch (const Error&) {
        fail(ErrorCode::InvalidArgument, fmt::format("gaps: unknown gap kind '{}'", g));
      }
    }
  }
  if (doc.contains("threshold")) {
    const auto& t = doc.at("threshold");
    if (t.is_number()) {
      c.threshold = t.get<double>();
    } else if (!(t.is_string() && t.get<std::string>() == "f1")) {
      fail(ErrorCode::InvalidArgument, "threshold: expected a number or \"f1\"");
    }
  }
  if (doc.contains("bootstrap")) {
    const auto& b = doc.at("bootstrap");
    only_keys(b, {"replicates", "level", "seed", "unit", "threads"}, "bootstrap");
    c.bootstrap.replicates = field(b, "replicates", c.bootstrap.replicates);
    c.bootstrap.level = field(b, "level", c.bootstrap.level);
    c.bootstrap.master_seed = field(b, "seed", c.bootstrap.master_seed);
    c.bootstrap.threads = field(b, "threads", c.bootstrap.threads);
    if (b.contains("unit")) {
      try {
        c.bootstrap.unit = parse_resample_unit(field(b, "unit", std::string()));
      } catch (const Error& e) {
        fail(ErrorCode::InvalidArgument, fmt::format("bootstrap.unit: {}", e.what()));
      }
    }
  }
  return c;
}

nlohmann::json to_json(const AuditConfig& c) {
  nlohmann::json policies = nlohmann::json::object();
  for (const auto& a : c.attributes) policies[a] = policy_to_json(c.policy_for(a));
  std::vector<std::string> gaps;
  for (auto k : c.gap_kinds) gaps.emplace_back(to_string(k));
  nlohmann::json doc{{"predictions", c.predictions.string()},
                     {"attributes", c.attributes},
                     {"policies", policies},
                     {"gaps", gaps},
                     {"bootstrap",
                      {{"replicates", c.bootstrap.replicates},
                       {"level", c.bootstrap.level},
                       {"seed", c.bootstrap.master_seed},
                       {"unit", to_string(c.bootstrap.unit)}}},
                     {"alpha", c.alpha},
                     {"fdr", c.fdr},
                     {"out", c.out_dir.string()},
                     {"formats", c.formats}};
  if (c.threshold) {
    doc["threshold"] = *c.threshold;
  } else {
    doc["threshold"] = "f1";
  }
  return doc;
}

AuditResult run_audit(const std::vector<PredictionRecord>& records, const AuditConfig& config) {
  validate(config);
  validate_predictions(records);
  if (records.empty()) fail(ErrorCode::EmptyInput, "no prediction records");
  for (const auto& a : config.attributes) {
    if (!records.front().attributes.contains(a)) {
      fail(ErrorCode::UnknownAttribute, fmt::format("attribute '{}' not present in data", a));
    }
  }

  AuditResult result;
  std::map<std::string, std::vector<std::size_t>> test_rows, validation_rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!test_rows.contains(r.task_id)) {
      result.tasks.push_back(r.task_id);
      test_rows[r.task_id];
      validation_rows[r.task_id];
    }
    if (r.split == Split::Test) test_rows[r.task_id].push_back(i);
    if (r.split == Split::Validation) validation_rows[r.task_id].push_back(i);
  }

  std::vector<GroupPolicy> policies;
  for (const auto& a : config.attributes) policies.push_back(config.policy_for(a));

  for (const auto& task : result.tasks) {
    // Decision threshold.
    double threshold = 0.5;
    if (config.threshold) {
      threshold = *config.threshold;
    } else {
      std::vector<double> p;
      std::vector<int> y;
      for (auto i : validation_rows[task]) {
        p.push_back(records[i].probability);
        y.push_back(records[i].label);
      }
      if (p.empty()) {
        fail(ErrorCode::EmptyInput,
             fmt::format("task '{}': no validation rows to pick a threshold (set --threshold)", task));
      }
      try {
        threshold = select_threshold_f1(p, y).threshold;
      } catch (const Error& e) {
        fail(e.code(), fmt::format("task '{}': {}", task, e.what()));
      }
    }
    result.thresholds[task] = threshold;

    const auto& rows = test_rows[task];
    if (rows.empty()) {
      result.warnings.push_back(fmt::format("task '{}': no test rows, skipped", task));
      continue;
    }
    std::vector<std::uint8_t> outcome(rows.size());
    std::vector<std::string> keys;
    keys.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = records[rows[k]];
      const bool pred = r.probability >= threshold;
      outcome[k] = r.label == 1 ? (pred ? kTp : kFn) : (pred ? kFp : kTn);
      keys.push_back(r.patient_id);
    }

    std::vector<AttributeGroups> attrs;
    std::vector<Slot> slots;
    for (std::size_t a = 0; a < config.attributes.size(); ++a) {
      AttributeGroups ag;
      ag.name = config.attributes[a];
      std::vector<std::optional<std::string>> labels(rows.size());
      std::set<std::string> names;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = records[rows[k]];
        const auto it = r.attributes.find(ag.name);
        if (it == r.attributes.end()) {
          fail(ErrorCode::UnknownAttribute,
               fmt::format("attribute '{}' missing for patient {}", ag.name, r.patient_id));
        }
        labels[k] = apply_policy(policies[a], it->second);
        if (labels[k]) names.insert(*labels[k]);
      }
      ag.groups.assign(names.begin(), names.end());
      ag.group_of.assign(rows.size(), -1);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (labels[k]) {
          ag.group_of[k] = static_cast<std::int32_t>(
              std::ranges::lower_bound(ag.groups, *labels[k]) - ag.groups.begin());
        }
      }
      if (ag.groups.size() < 2) {
        result.warnings.push_back(fmt::format("task '{}' attribute '{}': fewer than two groups, skipped",
                                              task, ag.name));
      } else {
        for (const auto& g : ag.groups) {
          for (auto kind : config.gap_kinds) slots.push_back({attrs.size(), g, kind});
        }
      }
      attrs.push_back(std::move(ag));
    }
    if (slots.empty()) continue;

    auto tally = [&](std::span<const std::size_t> indices) {
      std::vector<std::vector<Counts>> counts(attrs.size());
      for (std::size_t a = 0; a < attrs.size(); ++a) counts[a].assign(attrs[a].groups.size(), Counts{});
      for (auto k : indices) {
        for (std::size_t a = 0; a < attrs.size(); ++a) {
          const auto g = attrs[a].group_of[k];
          if (g >= 0) ++counts[a][static_cast<std::size_t>(g)][outcome[k]];
        }
      }
      return counts;
    };

    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), 0);
    const auto full_counts = tally(all);
    std::vector<std::optional<GapValue>> points;
    for (const auto& s : slots) {
      points.push_back(slot_value(s, attrs[s.attribute], full_counts[s.attribute]));
    }

    const auto summaries = bootstrap_statistics(
        keys, slots.size(),
        [&](std::span<const std::size_t> indices) {
          const auto counts = tally(indices);
          std::vector<std::optional<double>> out;
          out.reserve(slots.size());
          for (const auto& s : slots) {
            const auto v = slot_value(s, attrs[s.attribute], counts[s.attribute]);
            out.push_back(v ? std::optional(v->value) : std::nullopt);
          }
          return out;
        },
        config.bootstrap);

    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto& slot = slots[s];
      const auto& attr = attrs[slot.attribute].name;
      const auto where = fmt::format("task '{}' {}={} {} gap", task, attr, slot.subgroup,
                                     to_string(slot.kind));
      if (!points[s]) {
        result.warnings.push_back(where + ": undefined on the full sample, skipped");
        continue;
      }
      const auto& sum = summaries[s];
      if (sum.degenerate(config.bootstrap.replicates)) {
        result.warnings.push_back(fmt::format("{}: {} of {} replicates undefined, skipped", where,
                                              sum.discarded, config.bootstrap.replicates));
        continue;
      }
      GapRow row;
      auto& e = row.estimate;
      e.point = *points[s];
      e.ci_low = sum.ci_low;
      e.ci_high = sum.ci_high;
      e.significant = sum.significant;
      e.p_value = sum.p_value;
      e.task_id = task;
      e.attribute = attr;
      e.subgroup = slot.subgroup;
      e.discarded = sum.discarded;
      result.rows.push_back(std::move(row));
    }
  }

  if (config.fdr) {
    std::map<std::tuple<std::string, std::string, GapKind>, std::vector<std::size_t>> families;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      const auto& e = result.rows[i].estimate;
      families[{e.attribute, e.subgroup, e.point.kind}].push_back(i);
    }
    for (const auto& [key, members] : families) {
      std::vector<double> p;
      for (auto i : members) p.push_back(*result.rows[i].estimate.p_value);
      const auto bh = bh_adjust(p, config.alpha);
      for (std::size_t k = 0; k < members.size(); ++k) {
        result.rows[members[k]].significant_bh = static_cast<bool>(bh.rejected[k]);
      }
    }
  }
  return result;
}

std::map<std::string, std::string> render_audit(const AuditResult& result,
                                                const AuditConfig& config) {
  std::map<std::string, std::string> files;
  const auto ci = percent_label(config.bootstrap.level);
  const auto plain = summarize_all(result.rows, false);
  std::vector<SummaryRow> corrected;
  if (config.fdr) corrected = summarize_all(result.rows, true);

  if (config.formats.contains("csv")) {
    std::ostringstream gaps;
    write_gaps_csv(gaps, result.rows);
    files["gaps.csv"] = gaps.str();
    files["summary.csv"] = render_summary_csv(plain, config.gap_kinds);
    if (config.fdr) files["summary_bh.csv"] = render_summary_csv(corrected, config.gap_kinds);
  }
  if (config.formats.contains("markdown")) {
    files["gaps.md"] = "## Gap estimates\n\n" + render_gaps_markdown(result.rows);
    std::string md = "## Significant differences by fairness definition\n\n";
    md += fmt::format("Tasks audited: {}. Cells: significant tasks (% of those favoring the group).\n\n",
                      result.tasks.size());
    md += render_summary_markdown(plain, config.gap_kinds,
                                  fmt::format("Bootstrap {} CI excludes zero", ci));
    if (config.fdr) {
      md += "\n";
      md += render_summary_markdown(
          corrected, config.gap_kinds,
          fmt::format("Benjamini-Hochberg corrected (alpha = {:g})", config.alpha));
    }
    files["summary.md"] = md;
  }

  nlohmann::json meta{{"config", to_json(config)}, {"tasks", result.tasks},
                      {"thresholds", result.thresholds}, {"warnings", result.warnings},
                      {"estimates", result.rows.size()}};
  files["audit.json"] = meta.dump(2) + "\n";
  return files;
}

MergeResult merge_notes(const std::vector<PredictionRecord>& records,
                        std::optional<double> scaling, std::span<const double> grid) {
  if (scaling && !(*scaling > 0.0)) {
    fail(ErrorCode::InvalidArgument, fmt::format("scaling factor must be > 0, got {}", *scaling));
  }
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::string> tasks;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto [it, inserted] = index.emplace(Key{r.task_id, r.patient_id, r.note_id}, members.size());
    if (inserted) {
      members.emplace_back();
      if (std::ranges::find(tasks, r.task_id) == tasks.end()) tasks.push_back(r.task_id);
    }
    auto& m = members[it->second];
    if (!m.empty() && records[m.front()].label != r.label) {
      fail(ErrorCode::MalformedRow,
           fmt::format("row {}: label differs from earlier rows of note {} (task {})", i + 2,
                       r.note_id, r.task_id));
    }
    m.push_back(i);
  }

  auto probs_of = [&](const std::vector<std::size_t>& m) {
    std::vector<double> p;
    for (auto i : m) p.push_back(records[i].probability);
    return p;
  };

  MergeResult out;
  for (const auto& task : tasks) {
    if (scaling) {
      out.scaling[task] = *scaling;
      continue;
    }
    std::vector<NoteProbabilities> validation;
    for (const auto& m : members) {
      const auto& first = records[m.front()];
      if (first.task_id == task && first.split == Split::Validation) {
        validation.push_back({probs_of(m), first.label});
      }
    }
    try {
      out.scaling[task] = tune_scaling_factor(validation, grid);
    } catch (const Error& e) {
      fail(e.code(), fmt::format("task '{}': {}", task, e.what()));
    }
  }
  for (const auto& m : members) {
    auto note = records[m.front()];
    note.subsequence_index = 0;
    note.probability = merge_subsequence_probs(probs_of(m), out.scaling.at(note.task_id));
    out.notes.push_back(std::move(note));
  }
  return out;
}

}  // namespace fairaudit
