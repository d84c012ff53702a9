#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/oracle.hpp"
#include "fairaudit/preprocess.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

inline constexpr std::string_view kAttributeMarker = "[ATTR]";
inline constexpr std::string_view kTargetMarker = "[TGT]";
inline constexpr std::string_view kTargetMarkerAlias = "[GEND]";

/// Probe templates for one topic. Each template holds exactly one attribute
/// marker and one target marker.
struct TemplateSpec {
  std::string topic;
  std::vector<std::string> templates;
  std::vector<std::string> attributes;
  std::vector<std::string> male_words;
  std::vector<std::string> female_words;
};

/// Throws BadTemplate when a marker count is not exactly one, a word list is
/// empty, or the gender word lists overlap.
void validate(const TemplateSpec& spec);
TemplateSpec parse_template_spec(std::string_view json_text);
TemplateSpec load_template_spec(const std::filesystem::path& path);

enum class Gender { Male, Female };

/// One (template, attribute filler, gender side, target word) combination.
struct PlannedProbe {
  std::size_t template_index = 0;
  std::size_t attribute_index = 0;
  Gender side = Gender::Male;
  std::string target_word;
  std::string prior_text;        // attribute filled, target masked
  std::string both_masked_text;  // attribute and target masked
  std::size_t target_mask_index = 0;  // target's ordinal among masks in both_masked_text
};

/// |T| * |W_a| * (|W_m| + |W_f|) plans, in template / filler / side / word order.
std::vector<PlannedProbe> expand_templates(const TemplateSpec& spec);

enum class ProbeMode {
  Literal,          // prior: target masked; target: word inserted and pseudo-likelihood scored
  BothMaskedPrior,  // prior: attribute and target masked; target: target masked
};

std::string_view to_string(ProbeMode mode);
ProbeMode parse_probe_mode(std::string_view text);

struct ScoreSample {
  std::size_t template_index = 0;
  std::size_t attribute_index = 0;
  std::string target_word;
  Gender side = Gender::Male;
  double log_p_prior = 0.0;
  double log_p_target = 0.0;
  double score = 0.0;  // log_p_target - log_p_prior
};

struct LogScores {
  std::vector<ScoreSample> male;
  std::vector<ScoreSample> female;
};

/// The two oracle queries issued for a plan, with ids 2k and 2k+1.
std::pair<OracleQuery, OracleQuery> probe_queries(const PlannedProbe& plan, ProbeMode mode,
                                                  std::int64_t plan_index);

/// Prior-adjusted log probability bias scores for every plan.
LogScores calc_log_score(const TemplateSpec& spec, Oracle& oracle,
                         ProbeMode mode = ProbeMode::Literal);

struct GenderComparison {
  double mean_male = 0.0;
  double mean_female = 0.0;
  std::size_t pairs = 0;
  WilcoxonResult test;
  bool significant = false;
};

/// Pairs scores by (template, filler), averaging each gender's words, and
/// runs the signed-rank test. Throws DegenerateSample if every pair ties.
GenderComparison compare_gender_scores(const LogScores& scores, double alpha = 0.01);

/// "0.616*" style cell: three decimals, star when significant.
std::string format_score_cell(double mean, bool significant);

struct GenderRatio {
  std::size_t matching_notes = 0;
  std::size_t positive_patients = 0;
  std::optional<double> percent_male;
  std::optional<double> percent_female;
};

/// Counts discharge summaries containing any attribute string
/// (case-insensitive), then the gender split of label-positive patients.
GenderRatio corpus_gender_ratio(std::span<const NoteDocument> notes,
                                std::span<const std::string> attribute_strings,
                                const std::map<std::string, std::string>& patient_genders,
                                const std::map<std::string, int>& patient_labels);

/// "64.6%, 35.4%", or "n/a" when undefined.
std::string format_gender_ratio(const GenderRatio& ratio);

/// One row of the topic-level report.
struct ProbeRow {
  std::string topic;
  std::optional<GenderComparison> comparison;  // nullopt when degenerate
  double mean_male = 0.0;
  double mean_female = 0.0;
  std::size_t sample_count = 0;
  std::optional<GenderRatio> gender_ratio;
  std::string sample_template;
};

ProbeRow probe_topic(const TemplateSpec& spec, Oracle& oracle, ProbeMode mode, double alpha);

/// First template with its first filler, target shown as [GEND].
std::string sample_template(const TemplateSpec& spec);

std::string render_probe_markdown(std::span<const ProbeRow> rows);
std::string render_probe_csv(std::span<const ProbeRow> rows);

struct Completion {
  std::vector<std::string> words;
  double log_prob = 0.0;
};

/// Top-k completions of a text with one or two [MASK] sentinels over the
/// given candidate vocabulary. Two masks decode greedily: the first mask's
/// top k, then the second mask's top k under each, ranked by summed
/// log-probability. Ties break lexicographically.
std::vector<Completion> fill_blank_topk(Oracle& oracle, const std::string& text,
                                        std::span<const std::string> candidates, std::size_t k);

}  // namespace fairaudit
