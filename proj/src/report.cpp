#include "fairaudit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

const csv::Row kGapColumns{"task",    "attribute", "subgroup", "gap_kind",
                           "value",   "ci_low",    "ci_high",  "significant",
                           "favored", "p_value",   "significant_bh"};

std::string flag(bool b) { return b ? "true" : "false"; }

std::string kind_title(GapKind kind) {
  switch (kind) {
    case GapKind::Recall: return "Recall Gap";
    case GapKind::Parity: return "Parity Gap";
    case GapKind::Specificity: return "Specificity Gap";
  }
  return {};
}

// Reference group for a two-group attribute.
std::string reference_group(const std::string& attribute, const std::vector<std::string>& groups) {
  const std::string preferred = attribute == "gender" ? "M" : attribute == "language" ? "English" : "";
  if (std::ranges::find(groups, preferred) != groups.end()) return preferred;
  return groups.front();
}

std::size_t attribute_rank(const std::string& attribute) {
  const auto& std_attrs = standard_attributes();
  const auto it = std::ranges::find(std_attrs, attribute);
  return static_cast<std::size_t>(it - std_attrs.begin());
}

double parse_number(const std::string& text, std::size_t row, const char* field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::MalformedRow, fmt::format("row {} field '{}': not a number: '{}'", row, field, text));
  }
  return v;
}

bool parse_flag(const std::string& text, std::size_t row, const char* field) {
  if (text == "true") return true;
  if (text == "false") return false;
  fail(ErrorCode::MalformedRow,
       fmt::format("row {} field '{}': expected true or false, got '{}'", row, field, text));
}

}  // namespace

void write_gaps_csv(std::ostream& out, std::span<const GapRow> rows) {
  csv::write_row(out, kGapColumns);
  for (const auto& row : rows) {
    const auto& e = row.estimate;
    csv::write_row(out, {e.task_id, e.attribute, e.subgroup, std::string(to_string(e.point.kind)),
                         fmt::format("{}", e.point.value), fmt::format("{}", e.ci_low),
                         fmt::format("{}", e.ci_high), flag(e.significant),
                         e.point.favored_group.value_or(""),
                         e.p_value ? fmt::format("{}", *e.p_value) : "",
                         row.significant_bh ? flag(*row.significant_bh) : ""});
  }
}

std::vector<GapRow> read_gaps_csv(std::istream& in) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) return {};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col[(*header)[i]] = i;
  for (std::size_t i = 0; i < 9; ++i) {
    if (!col.contains(kGapColumns[i])) {
      fail(ErrorCode::MalformedRow, fmt::format("row 1: missing column '{}'", kGapColumns[i]));
    }
  }
  std::vector<GapRow> rows;
  std::size_t index = 1;
  while (auto fields = reader.next()) {
    ++index;
    if (fields->size() != header->size()) {
      fail(ErrorCode::MalformedRow, fmt::format("row {}: expected {} fields, found {}", index,
                                                header->size(), fields->size()));
    }
    auto get = [&](const std::string& name) -> const std::string& { return (*fields)[col.at(name)]; };
    auto optional_field = [&](const std::string& name) -> std::string {
      return col.contains(name) ? get(name) : std::string();
    };
    GapRow row;
    auto& e = row.estimate;
    e.task_id = get("task");
    e.attribute = get("attribute");
    e.subgroup = get("subgroup");
    try {
      e.point.kind = parse_gap_kind(get("gap_kind"));
    } catch (const Error&) {
      fail(ErrorCode::MalformedRow,
           fmt::format("row {} field 'gap_kind': unknown kind '{}'", index, get("gap_kind")));
    }
    e.point.value = parse_number(get("value"), index, "value");
    e.ci_low = parse_number(get("ci_low"), index, "ci_low");
    e.ci_high = parse_number(get("ci_high"), index, "ci_high");
    e.significant = parse_flag(get("significant"), index, "significant");
    if (!get("favored").empty()) e.point.favored_group = get("favored");
    if (const auto p = optional_field("p_value"); !p.empty()) e.p_value = parse_number(p, index, "p_value");
    if (const auto b = optional_field("significant_bh"); !b.empty()) {
      row.significant_bh = parse_flag(b, index, "significant_bh");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_gaps_markdown(std::span<const GapRow> rows) {
  std::string out =
      "| Task | Attribute | Subgroup | Gap | Value | 95% CI | Significant | Favored | p | "
      "Significant (BH) |\n|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    const auto& e = row.estimate;
    out += fmt::format("| {} | {} | {} | {} | {:.3f} | [{:.3f}, {:.3f}] | {} | {} | {} | {} |\n",
                       e.task_id, e.attribute, e.subgroup, to_string(e.point.kind), e.point.value,
                       e.ci_low, e.ci_high, e.significant ? "yes" : "no",
                       e.point.favored_group.value_or("-"),
                       e.p_value ? fmt::format("{:.3f}", *e.p_value) : "-",
                       row.significant_bh ? (*row.significant_bh ? "yes" : "no") : "-");
  }
  return out;
}

std::string SummaryCell::text() const {
  const auto percent =
      significant == 0 ? 0
                       : std::llround(100.0 * static_cast<double>(favoring) / static_cast<double>(significant));
  return fmt::format("{} ({}%)", significant, percent);
}

SummaryRow summarize_gaps(std::span<const GapEstimate> estimates, const std::string& attribute,
                          const std::string& subgroup) {
  SummaryRow row;
  row.attribute = attribute;
  row.subgroup = subgroup;
  for (auto kind : kAllGapKinds) row.cells[kind];
  std::map<GapKind, std::set<std::string>> significant, favoring;
  for (const auto& e : estimates) {
    if (e.attribute != attribute || e.subgroup != subgroup) continue;
    if (!e.significant) continue;
    significant[e.point.kind].insert(e.task_id);
    if (e.point.favored_group == subgroup) favoring[e.point.kind].insert(e.task_id);
  }
  for (auto& [kind, cell] : row.cells) {
    cell.significant = significant[kind].size();
    cell.favoring = favoring[kind].size();
  }
  return row;
}

std::vector<SummaryRow> summarize_all(std::span<const GapRow> rows, bool use_bh) {
  std::vector<GapEstimate> estimates;
  std::map<std::string, std::set<std::string>> groups;
  for (const auto& r : rows) {
    auto e = r.estimate;
    if (use_bh) e.significant = r.significant_bh.value_or(false);
    groups[e.attribute].insert(e.subgroup);
    estimates.push_back(std::move(e));
  }
  std::vector<std::string> attributes;
  for (const auto& [a, g] : groups) attributes.push_back(a);
  std::ranges::stable_sort(attributes, [](const auto& a, const auto& b) {
    return attribute_rank(a) < attribute_rank(b);
  });

  std::vector<SummaryRow> out;
  for (const auto& attribute : attributes) {
    const std::vector<std::string> names(groups[attribute].begin(), groups[attribute].end());
    if (names.size() == 2) {
      const auto ref = reference_group(attribute, names);
      const auto& other = names[0] == ref ? names[1] : names[0];
      auto row = summarize_gaps(estimates, attribute, ref);
      row.label = fmt::format("{} vs. {} (% of Tasks Favoring {})", ref, other, ref);
      out.push_back(std::move(row));
      continue;
    }
    for (const auto& g : names) {
      auto row = summarize_gaps(estimates, attribute, g);
      row.label = fmt::format("{} vs. Other (% of Tasks Favoring {})", g, g);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string render_summary_markdown(std::span<const SummaryRow> rows,
                                    std::span<const GapKind> kinds, const std::string& title) {
  std::string out = fmt::format("### {}\n\n| Attribute | Comparison |", title);
  std::string rule = "|---|---|";
  for (auto k : kinds) {
    out += fmt::format(" {} |", kind_title(k));
    rule += "---|";
  }
  out += "\n" + rule + "\n";
  std::string last;
  for (const auto& row : rows) {
    std::string attr;
    if (row.attribute != last) {
      attr = row.attribute;
      if (!attr.empty()) attr[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(attr[0])));
      last = row.attribute;
    }
    out += fmt::format("| {} | {} |", attr, row.label);
    for (auto k : kinds) {
      const auto it = row.cells.find(k);
      out += fmt::format(" {} |", it == row.cells.end() ? "-" : it->second.text());
    }
    out += "\n";
  }
  return out;
}

std::string render_summary_csv(std::span<const SummaryRow> rows, std::span<const GapKind> kinds) {
  std::ostringstream out;
  csv::Row header{"attribute", "subgroup", "comparison"};
  for (auto k : kinds) {
    header.push_back(fmt::format("{}_significant", to_string(k)));
    header.push_back(fmt::format("{}_favoring", to_string(k)));
    header.push_back(fmt::format("{}_cell", to_string(k)));
  }
  csv::write_row(out, header);
  for (const auto& row : rows) {
    csv::Row fields{row.attribute, row.subgroup, row.label};
    for (auto k : kinds) {
      const auto it = row.cells.find(k);
      const SummaryCell cell = it == row.cells.end() ? SummaryCell{} : it->second;
      fields.push_back(std::to_string(cell.significant));
      fields.push_back(std::to_string(cell.favoring));
      fields.push_back(cell.text());
    }
    csv::write_row(out, fields);
  }
  return out.str();
}

std::vector<GapKind> kinds_present(std::span<const GapRow> rows) {
  std::vector<GapKind> out;
  for (auto k : kAllGapKinds) {
    if (std::ranges::any_of(rows, [&](const GapRow& r) { return r.estimate.point.kind == k; })) {
      out.push_back(k);
    }
  }
  return out;
}

}  // namespace fairaudit
