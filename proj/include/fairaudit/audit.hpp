#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/groups.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/records.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

struct AuditConfig {
  std::filesystem::path predictions;
  std::vector<std::string> attributes = standard_attributes();
  std::map<std::string, GroupPolicy> policies;  // missing attributes use default_policy
  std::vector<GapKind> gap_kinds{std::begin(kAllGapKinds), std::end(kAllGapKinds)};
  BootstrapConfig bootstrap;
  double alpha = 0.05;
  bool fdr = true;
  std::optional<double> threshold;  // nullopt: best-F1 threshold on each task's validation rows
  std::filesystem::path out_dir = "audit_out";
  std::set<std::string> formats{"csv", "markdown"};

  GroupPolicy policy_for(const std::string& attribute) const;
};

/// Throws InvalidArgument naming the offending field.
void validate(const AuditConfig& config);

/// Reads a JSON config. Keys: predictions, attributes, policies, gaps,
/// bootstrap {replicates, level, seed, unit, threads}, alpha, fdr, threshold
/// (number or "f1"), out, formats. Unknown keys are rejected.
AuditConfig audit_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AuditConfig& config);

struct AuditResult {
  std::vector<GapRow> rows;                    // task, attribute, subgroup, kind order
  std::vector<std::string> tasks;              // first-appearance order
  std::map<std::string, double> thresholds;    // per task
  std::vector<std::string> warnings;
};

/// Bootstraps every (task, attribute, subgroup, gap kind) on the test split,
/// then applies Benjamini-Hochberg within each (attribute, subgroup, kind)
/// family across tasks. Gaps undefined on the full sample, or with more than
/// half the replicates undefined, are skipped with a warning.
AuditResult run_audit(const std::vector<PredictionRecord>& records, const AuditConfig& config);

/// Markdown and CSV files produced by an audit, keyed by file name.
std::map<std::string, std::string> render_audit(const AuditResult& result,
                                                const AuditConfig& config);

struct MergeResult {
  std::vector<PredictionRecord> notes;      // one per (patient, note, task)
  std::map<std::string, double> scaling;    // per task
};

/// Merges subsequence rows into note rows with a fixed scaling factor, or,
/// when `scaling` is nullopt, with the factor tuned per task on that task's
/// validation notes over `grid`.
MergeResult merge_notes(const std::vector<PredictionRecord>& records,
                        std::optional<double> scaling,
                        std::span<const double> grid = default_scaling_grid());

}  // namespace fairaudit
