#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/metrics.hpp"
#include "fairaudit/records.hpp"

namespace fairaudit {

// ---------------------------------------------------------------------------
// Random streams

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Engine for stream `stream` under `master_seed`. Replicate r of a bootstrap
/// always draws from stream r, whatever thread runs it.
std::mt19937_64 stream_engine(std::uint64_t master_seed, std::uint64_t stream);

/// Uniform integer in [0, bound) by rejection; identical on every platform
/// (std::uniform_int_distribution is not).
std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound);

/// Uniform real in [0, 1) from the top 53 bits of one draw.
double uniform_unit(std::mt19937_64& engine);

// ---------------------------------------------------------------------------
// Bootstrap

enum class ResampleUnit { Record, Patient };

std::string_view to_string(ResampleUnit unit);
ResampleUnit parse_resample_unit(std::string_view text);

struct BootstrapConfig {
  std::size_t replicates = 1000;
  double level = 0.95;
  std::uint64_t master_seed = 0;
  ResampleUnit unit = ResampleUnit::Patient;
  unsigned threads = 1;  // results do not depend on this
};

void validate(const BootstrapConfig& config);

/// Evaluates every statistic on one resample, given as record indices (with
/// repeats). nullopt marks a statistic undefined on that resample.
using MultiStatistic =
    std::function<std::vector<std::optional<double>>(std::span<const std::size_t>)>;

struct BootstrapSummary {
  std::optional<double> point;     // on the full sample
  std::vector<double> replicates;  // defined replicates, in replicate order
  std::size_t discarded = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;  // 0 outside [ci_low, ci_high]
  double p_value = 1.0;      // 2 * min(frac <= 0, frac >= 0), capped at 1

  // More than half the replicates undefined.
  bool degenerate(std::size_t total) const { return 2 * discarded > total; }
};

/// Resamples units with replacement (each replicate the original unit count),
/// evaluating all statistics on the shared resample. `unit_keys[i]` names the
/// resampling unit of record i; ignored for ResampleUnit::Record.
std::vector<BootstrapSummary> bootstrap_statistics(std::span<const std::string> unit_keys,
                                                   std::size_t statistic_count,
                                                   const MultiStatistic& statistic,
                                                   const BootstrapConfig& config);

/// Type-1 (nearest-rank) quantile of sorted values.
double nearest_rank_quantile(std::span<const double> sorted, double q);

struct GapEstimate {
  GapValue point;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;
  std::optional<double> p_value;
  std::string task_id;
  std::string attribute;
  std::string subgroup;
  std::size_t discarded = 0;

  bool operator==(const GapEstimate&) const = default;
};

/// Group label of a record, or nullopt when the record is excluded.
using GroupExtractor = std::function<std::optional<std::string>(const PredictionRecord&)>;

/// A gap statistic over records already split into groups.
struct GroupedSample {
  std::vector<std::string> groups;                            // sorted labels
  std::vector<std::vector<const PredictionRecord*>> members;  // per group
};
using GapStatistic = std::function<std::optional<GapValue>(const GroupedSample&)>;

/// multi_group_gap of `subgroup` under `kind` at a fixed decision threshold.
/// Groups whose rate denominator is zero are excluded; undefined when the
/// subgroup is excluded or fewer than two groups remain.
GapStatistic make_gap_statistic(GapKind kind, std::string subgroup, double threshold);

/// Percentile bootstrap of one gap statistic. Throws EmptyInput,
/// UndefinedRate (statistic undefined on the full sample) or
/// TooManyDegenerateReplicates.
GapEstimate bootstrap_gap(std::span<const PredictionRecord> records, const GroupExtractor& groups,
                          const GapStatistic& statistic, const BootstrapConfig& config);

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

enum class WilcoxonMethod { Exact, NormalApprox };

std::string_view to_string(WilcoxonMethod method);

struct WilcoxonResult {
  std::size_t n_effective = 0;
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_two_sided = 1.0;
  WilcoxonMethod method = WilcoxonMethod::Exact;
};

inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Ranks of |d| with average ranks for ties. Zeros must already be removed.
std::vector<double> absolute_ranks(std::span<const double> differences);

/// P(min(W+, W-) <= w) under the null, by convolving the sign distribution of
/// the given ranks (halves allowed).
double wilcoxon_exact_p(std::span<const double> ranks, double w);

/// Normal approximation with continuity and tie-variance corrections.
double wilcoxon_normal_p(std::span<const double> ranks, double w);

/// Paired two-sided test on x - y. Zero differences are dropped; exact when at
/// most 25 differences remain. Throws DegenerateSample if none remain.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Benjamini-Hochberg

struct BhResult {
  std::vector<bool> rejected;   // input order
  std::vector<double> adjusted;  // input order, capped at 1
};

BhResult bh_adjust(std::span<const double> p_values, double alpha);

}  // namespace fairaudit
