#include "fairaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

void check_binary_input(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size()) {
    fail(ErrorCode::LengthMismatch, fmt::format("{} probabilities vs {} labels",
                                                probabilities.size(), labels.size()));
  }
  if (probabilities.empty()) fail(ErrorCode::EmptyInput, "no predictions");
}

std::pair<std::size_t, std::size_t> class_sizes(std::span<const int> labels) {
  const auto pos = static_cast<std::size_t>(std::ranges::count(labels, 1));
  return {pos, labels.size() - pos};
}

void require_both_classes(std::span<const int> labels, std::string_view what) {
  auto [pos, neg] = class_sizes(labels);
  if (pos == 0 || neg == 0) {
    fail(ErrorCode::SingleClassInput, fmt::format("{}: need both label classes ({} positive, "
                                                  "{} negative)",
                                                  what, pos, neg));
  }
}

// Indices sorted by descending probability.
std::vector<std::size_t> descending_order(std::span<const double> probabilities) {
  std::vector<std::size_t> order(probabilities.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return probabilities[a] > probabilities[b];
  });
  return order;
}

__extension__ typedef __int128 i128;

}  // namespace

std::string_view to_string(GapKind kind) {
  switch (kind) {
    case GapKind::Parity: return "parity";
    case GapKind::Recall: return "recall";
    case GapKind::Specificity: return "specificity";
  }
  return "recall";
}

GapKind parse_gap_kind(std::string_view text) {
  if (text == "parity") return GapKind::Parity;
  if (text == "recall") return GapKind::Recall;
  if (text == "specificity") return GapKind::Specificity;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown gap kind '{}'", text));
}

GroupRates rate_of(GapKind kind, const ConfusionCounts& c, std::string group) {
  switch (kind) {
    case GapKind::Parity: return {std::move(group), c.tp + c.fp, c.n()};
    case GapKind::Recall: return {std::move(group), c.tp, c.tp + c.fn};
    case GapKind::Specificity: return {std::move(group), c.tn, c.tn + c.fp};
  }
  return {};
}

ConfusionCounts confusion(std::span<const double> probabilities, std::span<const int> labels,
                          double threshold) {
  check_binary_input(probabilities, labels);
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::InvalidArgument, fmt::format("threshold {} outside [0, 1]", threshold));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

GapValue pairwise_gap(GapKind kind, const ConfusionCounts& g1, const ConfusionCounts& g2,
                      std::string_view name1, std::string_view name2) {
  const GroupRates rates[] = {rate_of(kind, g1, std::string(name1)),
                              rate_of(kind, g2, std::string(name2))};
  for (const auto& r : rates) {
    if (r.total == 0) {
      fail(ErrorCode::UndefinedRate,
           fmt::format("{} rate undefined for group {} (zero denominator)", to_string(kind),
                       r.group));
    }
  }
  GapValue gap{kind, rates[0].rate() - rates[1].rate(), std::nullopt};
  // Sign from exact cross-multiplication so equal rates give no favored group.
  const i128 lhs = static_cast<i128>(rates[0].count) * rates[1].total;
  const i128 rhs = static_cast<i128>(rates[1].count) * rates[0].total;
  if (lhs > rhs) {
    gap.favored_group = rates[0].group;
  } else if (lhs < rhs) {
    gap.favored_group = rates[1].group;
  } else {
    gap.value = 0.0;
  }
  return gap;
}

GapValue multi_group_gap(GapKind kind, std::span<const GroupRates> rates, std::string_view j) {
  if (rates.size() < 2) fail(ErrorCode::GroupNotFound, "multi_group_gap needs at least 2 groups");
  for (const auto& r : rates) {
    if (r.total == 0) {
      fail(ErrorCode::UndefinedRate,
           fmt::format("{} rate undefined for group {} (zero denominator)", to_string(kind),
                       r.group));
    }
    if (r.count > r.total) fail(ErrorCode::InvalidArgument, "group count exceeds total");
  }
  const auto self = std::ranges::find(rates, j, &GroupRates::group);
  if (self == rates.end()) fail(ErrorCode::GroupNotFound, fmt::format("group '{}' absent", j));

  // |c_j/n_j - c_i/n_i| = |c_j n_i - c_i n_j| / (n_j n_i); compared exactly.
  auto diff_num = [&](const GroupRates& r) {
    return static_cast<i128>(self->count) * r.total - static_cast<i128>(r.count) * self->total;
  };
  auto abs128 = [](i128 v) { return v < 0 ? -v : v; };

  const GroupRates* best = nullptr;
  for (const auto& r : rates) {
    if (&r == &*self) continue;
    if (!best) {
      best = &r;
      continue;
    }
    // Compare |d_r| / (n_j n_r) against |d_best| / (n_j n_best).
    const i128 lhs = abs128(diff_num(r)) * best->total;
    const i128 rhs = abs128(diff_num(*best)) * r.total;
    const bool higher_rate =
        static_cast<i128>(r.count) * best->total > static_cast<i128>(best->count) * r.total;
    if (lhs > rhs || (lhs == rhs && higher_rate)) best = &r;
  }

  GapValue gap{kind, self->rate() - best->rate(), std::nullopt};
  const i128 d = diff_num(*best);
  if (d > 0) {
    gap.favored_group = self->group;
  } else if (d < 0) {
    gap.favored_group = best->group;
  } else {
    gap.value = 0.0;
  }
  return gap;
}

double merge_subsequence_probs(std::span<const double> probabilities, double scaling) {
  if (probabilities.empty()) fail(ErrorCode::EmptyInput, "merge: no subsequence probabilities");
  if (!(scaling > 0.0) || !std::isfinite(scaling)) {
    fail(ErrorCode::InvalidArgument, fmt::format("merge: scaling factor {} must be > 0", scaling));
  }
  double max = probabilities.front();
  double min = probabilities.front();
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorCode::InvalidArgument, fmt::format("merge: probability {} outside [0, 1]", p));
    }
    max = std::max(max, p);
    min = std::min(min, p);
    sum += p;
  }
  const double n = static_cast<double>(probabilities.size());
  const double mean = std::clamp(sum / n, min, max);
  // (max + mean n/c) / (1 + n/c) == max + w (mean - max) with w = n / (n + c).
  const double w = n / (n + scaling);
  return std::clamp(max + w * (mean - max), min, max);
}

double tune_scaling_factor(std::span<const NoteProbabilities> validation,
                           std::span<const double> candidates) {
  if (candidates.empty()) fail(ErrorCode::InvalidArgument, "no scaling-factor candidates");
  std::vector<int> labels;
  labels.reserve(validation.size());
  for (const auto& note : validation) labels.push_back(note.label);
  require_both_classes(labels, "scaling-factor validation");

  std::vector<double> sorted(candidates.begin(), candidates.end());
  std::ranges::sort(sorted);
  double best_c = sorted.front();
  double best_ap = -1.0;
  std::vector<double> merged(validation.size());
  for (double c : sorted) {
    for (std::size_t i = 0; i < validation.size(); ++i) {
      merged[i] = merge_subsequence_probs(validation[i].probabilities, c);
    }
    const double ap = compute_auprc(merged, labels);
    if (ap > best_ap + 1e-12) {
      best_ap = ap;
      best_c = c;
    }
  }
  return best_c;
}

ThresholdChoice select_threshold_f1(std::span<const double> probabilities,
                                    std::span<const int> labels) {
  check_binary_input(probabilities, labels);
  require_both_classes(labels, "threshold selection");
  const auto [total_pos, total_neg] = class_sizes(labels);
  (void)total_neg;
  const auto order = descending_order(probabilities);

  // Walk thresholds from high to low; F1 = 2TP / (2TP + FP + FN).
  std::uint64_t tp = 0, fp = 0;
  std::uint64_t best_num = 0, best_den = 1;
  double best_t = probabilities[order.front()];
  for (std::size_t k = 0; k < order.size();) {
    const double t = probabilities[order[k]];
    while (k < order.size() && probabilities[order[k]] == t) {
      labels[order[k]] == 1 ? ++tp : ++fp;
      ++k;
    }
    const std::uint64_t num = 2 * tp;
    const std::uint64_t den = 2 * tp + fp + (total_pos - tp);
    // Strictly better only: thresholds are visited in decreasing order.
    if (static_cast<i128>(num) * best_den > static_cast<i128>(best_num) * den) {
      best_num = num;
      best_den = den;
      best_t = t;
    }
  }
  return {best_t, static_cast<double>(best_num) / static_cast<double>(best_den)};
}

double compute_auroc(std::span<const double> probabilities, std::span<const int> labels) {
  check_binary_input(probabilities, labels);
  require_both_classes(labels, "AUROC");
  const std::size_t n = probabilities.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
    return probabilities[a] < probabilities[b];
  });
  // Twice the rank sum of positives, in integers (average ranks are halves).
  std::uint64_t rank_sum2 = 0;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    while (end < n && probabilities[order[end]] == probabilities[order[k]]) ++end;
    const std::uint64_t avg_rank2 = (k + 1) + end;  // 2 * (first + last) / 2
    for (std::size_t m = k; m < end; ++m) {
      if (labels[order[m]] == 1) rank_sum2 += avg_rank2;
    }
    k = end;
  }
  const auto [pos, neg] = class_sizes(labels);
  const std::uint64_t u2 = rank_sum2 - static_cast<std::uint64_t>(pos) * (pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double compute_auprc(std::span<const double> probabilities, std::span<const int> labels) {
  check_binary_input(probabilities, labels);
  require_both_classes(labels, "AUPRC");
  const auto [total_pos, total_neg] = class_sizes(labels);
  (void)total_neg;
  const auto order = descending_order(probabilities);
  std::uint64_t tp = 0, seen = 0;
  double area = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double t = probabilities[order[k]];
    std::uint64_t gained = 0;
    while (k < order.size() && probabilities[order[k]] == t) {
      if (labels[order[k]] == 1) ++gained;
      ++seen;
      ++k;
    }
    tp += gained;
    if (gained) {
      area += (static_cast<double>(gained) / static_cast<double>(total_pos)) *
              (static_cast<double>(tp) / static_cast<double>(seen));
    }
  }
  return area;
}

}  // namespace fairaudit
