#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

enum class GapKind { Parity, Recall, Specificity };

std::string_view to_string(GapKind kind);
GapKind parse_gap_kind(std::string_view text);
inline constexpr GapKind kAllGapKinds[] = {GapKind::Recall, GapKind::Parity, GapKind::Specificity};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t n() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Event count c and population n for one group under one gap kind.
struct GroupRates {
  std::string group;
  std::uint64_t count = 0;
  std::uint64_t total = 0;

  double rate() const { return static_cast<double>(count) / static_cast<double>(total); }
};

/// Parity: (TP+FP)/N. Recall: TP/(TP+FN). Specificity: TN/(TN+FP).
GroupRates rate_of(GapKind kind, const ConfusionCounts& counts, std::string group = {});

struct GapValue {
  GapKind kind = GapKind::Recall;
  double value = 0.0;
  std::optional<std::string> favored_group;

  bool operator==(const GapValue&) const = default;
};

/// A record is predicted positive iff probability >= threshold.
ConfusionCounts confusion(std::span<const double> probabilities, std::span<const int> labels,
                          double threshold);

/// rate(g1) - rate(g2); favors the group with the higher rate.
GapValue pairwise_gap(GapKind kind, const ConfusionCounts& g1, const ConfusionCounts& g2,
                      std::string_view name1 = "g1", std::string_view name2 = "g2");

/// Signed gap between group `j` and the group whose rate differs most from
/// it. The comparison is done in exact integer arithmetic; a tie between two
/// candidates goes to the one with the higher rate.
GapValue multi_group_gap(GapKind kind, std::span<const GroupRates> rates, std::string_view j);

/// Note-level probability from subsequence probabilities:
///   (P_max + P_mean * n / c) / (1 + n / c)
double merge_subsequence_probs(std::span<const double> probabilities, double scaling);

struct NoteProbabilities {
  std::vector<double> probabilities;
  int label = 0;
};

inline const std::vector<double>& default_scaling_grid() {
  static const std::vector<double> grid{0.5, 1, 2, 4, 8, 16, 32};
  return grid;
}

/// Candidate maximizing AUPRC of merged note probabilities; ties go to the
/// smallest candidate.
double tune_scaling_factor(std::span<const NoteProbabilities> validation,
                           std::span<const double> candidates);

struct ThresholdChoice {
  double threshold = 0.5;
  double f1 = 0.0;
};

/// Best-F1 threshold among the unique observed probabilities; ties go to the
/// largest threshold.
ThresholdChoice select_threshold_f1(std::span<const double> probabilities,
                                    std::span<const int> labels);

/// Mann-Whitney rank statistic with average ranks for ties.
double compute_auroc(std::span<const double> probabilities, std::span<const int> labels);

/// Step-wise average precision: sum over distinct score thresholds of
/// (recall gain) x (precision at that threshold). No interpolation.
double compute_auprc(std::span<const double> probabilities, std::span<const int> labels);

}  // namespace fairaudit
