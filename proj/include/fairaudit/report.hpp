#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/stats.hpp"

namespace fairaudit {

/// One audited gap as written to gaps.csv.
struct GapRow {
  GapEstimate estimate;
  std::optional<bool> significant_bh;  // unset when FDR correction is off

  bool operator==(const GapRow&) const = default;
};

/// Columns: task, attribute, subgroup, gap_kind, value, ci_low, ci_high,
/// significant, favored, p_value, significant_bh.
void write_gaps_csv(std::ostream& out, std::span<const GapRow> rows);
std::vector<GapRow> read_gaps_csv(std::istream& in);
std::string render_gaps_markdown(std::span<const GapRow> rows);

/// Significant-task count and how many of those favor the subgroup.
struct SummaryCell {
  std::size_t significant = 0;
  std::size_t favoring = 0;

  /// "13 (62%)"; "0 (0%)" when nothing is significant.
  std::string text() const;
  bool operator==(const SummaryCell&) const = default;
};

struct SummaryRow {
  std::string attribute;
  std::string subgroup;
  std::string label;  // "M vs. F (% of Tasks Favoring M)"
  std::map<GapKind, SummaryCell> cells;
};

/// Counts significant tasks for one (attribute, subgroup) per gap kind.
SummaryRow summarize_gaps(std::span<const GapEstimate> estimates, const std::string& attribute,
                          const std::string& subgroup);

/// Summary rows for every (attribute, subgroup) in the rows. Attributes with
/// exactly two groups get a single row for their reference group (M for
/// gender, English for language, else the first name). With `use_bh` the
/// corrected flags decide significance.
std::vector<SummaryRow> summarize_all(std::span<const GapRow> rows, bool use_bh);

std::string render_summary_markdown(std::span<const SummaryRow> rows,
                                    std::span<const GapKind> kinds, const std::string& title);
std::string render_summary_csv(std::span<const SummaryRow> rows, std::span<const GapKind> kinds);

/// Gap kinds present in the rows, recall first.
std::vector<GapKind> kinds_present(std::span<const GapRow> rows);

}  // namespace fairaudit
