#include "fairaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_engine(std::uint64_t master_seed, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(mix_seed(master_seed) ^ mix_seed(stream + 1)));
}

std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = engine();
  } while (x > limit);
  return x % bound;
}

double uniform_unit(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ResampleUnit unit) {
  return unit == ResampleUnit::Record ? "record" : "patient";
}

ResampleUnit parse_resample_unit(std::string_view text) {
  if (text == "record") return ResampleUnit::Record;
  if (text == "patient") return ResampleUnit::Patient;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown resample unit '{}'", text));
}

void validate(const BootstrapConfig& config) {
  if (config.replicates < 1) fail(ErrorCode::InvalidArgument, "bootstrap needs >= 1 replicate");
  if (!(config.level > 0.0 && config.level < 1.0)) {
    fail(ErrorCode::InvalidArgument, fmt::format("confidence level {} not in (0, 1)", config.level));
  }
}

double nearest_rank_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::EmptyInput, "quantile of empty sample");
  const double m = static_cast<double>(sorted.size());
  // The epsilon keeps 0.025 * 1000 at rank 25 despite 0.05 / 2 rounding up.
  auto rank = static_cast<std::ptrdiff_t>(std::ceil(q * m - 1e-9));
  rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

std::vector<BootstrapSummary> bootstrap_statistics(std::span<const std::string> unit_keys,
                                                   std::size_t statistic_count,
                                                   const MultiStatistic& statistic,
                                                   const BootstrapConfig& config) {
  validate(config);
  const std::size_t n = unit_keys.size();
  if (n == 0) fail(ErrorCode::EmptyInput, "bootstrap over an empty sample");

  // Record indices grouped by unit, units in first-appearance order.
  std::vector<std::vector<std::size_t>> units;
  if (config.unit == ResampleUnit::Patient) {
    std::unordered_map<std::string_view, std::size_t> unit_of;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = unit_of.emplace(unit_keys[i], units.size());
      if (inserted) units.emplace_back();
      units[it->second].push_back(i);
    }
  }

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto point = statistic(all);
  if (point.size() != statistic_count) {
    fail(ErrorCode::DimensionMismatch, "statistic returned the wrong number of values");
  }

  const std::size_t b = config.replicates;
  std::vector<std::vector<std::optional<double>>> values(b);
  auto run = [&](std::size_t worker, std::size_t workers) {
    std::vector<std::size_t> sample;
    sample.reserve(n);
    for (std::size_t r = worker; r < b; r += workers) {
      auto engine = stream_engine(config.master_seed, r);
      sample.clear();
      if (config.unit == ResampleUnit::Record) {
        for (std::size_t k = 0; k < n; ++k) sample.push_back(uniform_below(engine, n));
      } else {
        for (std::size_t k = 0; k < units.size(); ++k) {
          const auto& members = units[uniform_below(engine, units.size())];
          sample.insert(sample.end(), members.begin(), members.end());
        }
      }
      values[r] = statistic(sample);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, b);
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }

  const double tail = (1.0 - config.level) / 2.0;
  std::vector<BootstrapSummary> out(statistic_count);
  for (std::size_t s = 0; s < statistic_count; ++s) {
    auto& summary = out[s];
    summary.point = point[s];
    for (std::size_t r = 0; r < b; ++r) {
      if (values[r].size() != statistic_count) {
        fail(ErrorCode::DimensionMismatch, "statistic returned the wrong number of values");
      }
      if (values[r][s]) {
        summary.replicates.push_back(*values[r][s]);
      } else {
        ++summary.discarded;
      }
    }
    if (summary.replicates.empty()) continue;
    std::vector<double> sorted = summary.replicates;
    std::ranges::sort(sorted);
    summary.ci_low = nearest_rank_quantile(sorted, tail);
    summary.ci_high = nearest_rank_quantile(sorted, 1.0 - tail);
    summary.significant = summary.ci_low > 0.0 || summary.ci_high < 0.0;
    const double m = static_cast<double>(sorted.size());
    const auto le = static_cast<double>(std::ranges::count_if(sorted, [](double v) { return v <= 0; }));
    const auto ge = static_cast<double>(std::ranges::count_if(sorted, [](double v) { return v >= 0; }));
    summary.p_value = std::min(1.0, 2.0 * std::min(le, ge) / m);
  }
  return out;
}

GapStatistic make_gap_statistic(GapKind kind, std::string subgroup, double threshold) {
  return [kind, subgroup = std::move(subgroup), threshold](const GroupedSample& sample)
             -> std::optional<GapValue> {
    std::vector<GroupRates> rates;
    rates.reserve(sample.groups.size());
    bool has_subgroup = false;
    for (std::size_t g = 0; g < sample.groups.size(); ++g) {
      ConfusionCounts counts;
      for (const auto* rec : sample.members[g]) {
        const bool predicted = rec->probability >= threshold;
        if (rec->label == 1) {
          predicted ? ++counts.tp : ++counts.fn;
        } else {
          predicted ? ++counts.fp : ++counts.tn;
        }
      }
      auto r = rate_of(kind, counts, sample.groups[g]);
      if (r.total == 0) continue;
      has_subgroup = has_subgroup || r.group == subgroup;
      rates.push_back(std::move(r));
    }
    if (!has_subgroup || rates.size() < 2) return std::nullopt;
    return multi_group_gap(kind, rates, subgroup);
  };
}

GapEstimate bootstrap_gap(std::span<const PredictionRecord> records, const GroupExtractor& groups,
                          const GapStatistic& statistic, const BootstrapConfig& config) {
  if (records.empty()) fail(ErrorCode::EmptyInput, "bootstrap_gap: no records");

  std::map<std::string, std::size_t> group_index;
  std::vector<std::optional<std::size_t>> group_of(records.size());
  std::vector<std::optional<std::string>> labels(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    labels[i] = groups(records[i]);
    if (labels[i]) group_index.emplace(*labels[i], 0);
  }
  std::vector<std::string> names;
  for (auto& [name, idx] : group_index) {
    idx = names.size();
    names.push_back(name);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (labels[i]) group_of[i] = group_index.at(*labels[i]);
  }

  auto evaluate = [&](std::span<const std::size_t> indices) -> std::optional<GapValue> {
    GroupedSample sample{names, std::vector<std::vector<const PredictionRecord*>>(names.size())};
    for (std::size_t i : indices) {
      if (group_of[i]) sample.members[*group_of[i]].push_back(&records[i]);
    }
    return statistic(sample);
  };

  std::vector<std::size_t> all(records.size());
  std::iota(all.begin(), all.end(), 0);
  const auto full = evaluate(all);
  if (!full) fail(ErrorCode::UndefinedRate, "gap statistic undefined on full sample");

  std::vector<std::string> keys;
  keys.reserve(records.size());
  for (const auto& r : records) keys.push_back(r.patient_id);

  auto summary = bootstrap_statistics(
      keys, 1,
      [&](std::span<const std::size_t> indices) {
        auto gap = evaluate(indices);
        return std::vector<std::optional<double>>{gap ? std::optional(gap->value) : std::nullopt};
      },
      config);
  const auto& s = summary.front();
  if (s.degenerate(config.replicates)) {
    fail(ErrorCode::TooManyDegenerateReplicates,
         fmt::format("{} of {} replicates undefined", s.discarded, config.replicates));
  }
  GapEstimate est;
  est.point = *full;
  est.ci_low = s.ci_low;
  est.ci_high = s.ci_high;
  est.significant = s.significant;
  est.p_value = s.p_value;
  est.discarded = s.discarded;
  return est;
}

// ---------------------------------------------------------------------------

std::string_view to_string(WilcoxonMethod method) {
  return method == WilcoxonMethod::Exact ? "exact" : "normal_approx";
}

std::vector<double> absolute_ranks(std::span<const double> differences) {
  const std::size_t n = differences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
    return std::abs(differences[a]) < std::abs(differences[b]);
  });
  std::vector<double> ranks(n);
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    const double v = std::abs(differences[order[k]]);
    while (end < n && std::abs(differences[order[end]]) == v) ++end;
    const double avg = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t m = k; m < end; ++m) ranks[order[m]] = avg;
    k = end;
  }
  return ranks;
}

double wilcoxon_exact_p(std::span<const double> ranks, double w) {
  // Doubled ranks are integers even with average ranks.
  std::vector<std::size_t> doubled;
  std::size_t total = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<double> count(total + 1, 0.0);
  count[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t r : doubled) {
    for (std::size_t s = reach + 1; s-- > 0;) {
      if (count[s] != 0.0) count[s + r] += count[s];
    }
    reach += r;
  }
  const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w));
  double hits = 0.0;
  for (std::size_t s = 0; s <= total; ++s) {
    if (std::min(s, total - s) <= w2) hits += count[s];
  }
  return std::min(1.0, std::ldexp(hits, -static_cast<int>(ranks.size())));
}

double wilcoxon_normal_p(std::span<const double> ranks, double w) {
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::map<double, double> ties;
  for (double r : ranks) ties[r] += 1.0;
  for (const auto& [rank, t] : ties) var -= (t * t * t - t) / 48.0;
  const double diff = w - mean;
  // Continuity correction towards the mean.
  const double corrected = diff < 0 ? std::min(0.0, diff + 0.5) : std::max(0.0, diff - 0.5);
  const double z = corrected / std::sqrt(var);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::LengthMismatch, fmt::format("wilcoxon: {} vs {} values", x.size(), y.size()));
  }
  if (x.empty()) fail(ErrorCode::EmptyInput, "wilcoxon: no pairs");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (!std::isfinite(diff)) fail(ErrorCode::InvalidArgument, "wilcoxon: non-finite difference");
    if (diff != 0.0) d.push_back(diff);
  }
  if (d.empty()) fail(ErrorCode::DegenerateSample, "wilcoxon: all differences are zero");

  const auto ranks = absolute_ranks(d);
  WilcoxonResult res;
  res.n_effective = d.size();
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];
  res.statistic = std::min(res.w_plus, res.w_minus);
  if (res.n_effective <= kWilcoxonExactMaxN) {
    res.method = WilcoxonMethod::Exact;
    res.p_two_sided = wilcoxon_exact_p(ranks, res.statistic);
  } else {
    res.method = WilcoxonMethod::NormalApprox;
    res.p_two_sided = wilcoxon_normal_p(ranks, res.statistic);
  }
  return res;
}

// ---------------------------------------------------------------------------

BhResult bh_adjust(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::InvalidArgument, fmt::format("alpha {} not in (0, 1)", alpha));
  }
  const std::size_t m = p_values.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0)) {
      fail(ErrorCode::OutOfRangeP, fmt::format("p-value #{} = {} outside [0, 1]", i, p_values[i]));
    }
  }
  BhResult out{std::vector<bool>(m, false), std::vector<double>(m, 1.0)};
  if (m == 0) return out;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return p_values[a] < p_values[b];
  });
  const double md = static_cast<double>(m);
  std::size_t k = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    if (p_values[order[i - 1]] <= static_cast<double>(i) * alpha / md) k = i;
  }
  for (std::size_t i = 0; i < k; ++i) out.rejected[order[i]] = true;

  double running = 1.0;
  for (std::size_t i = m; i >= 1; --i) {
    running = std::min(running, md * p_values[order[i - 1]] / static_cast<double>(i));
    out.adjusted[order[i - 1]] = std::min(1.0, running);
  }
  return out;
}

}  // namespace fairaudit
