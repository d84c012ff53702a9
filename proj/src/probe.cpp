#include "fairaudit/probe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

std::size_t count_of(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string replace_first(std::string text, std::string_view needle, std::string_view with) {
  const auto pos = text.find(needle);
  if (pos != std::string::npos) text.replace(pos, needle.size(), with);
  return text;
}

std::size_t target_position(const std::string& tmpl) {
  const auto pos = tmpl.find(kTargetMarker);
  return pos != std::string::npos ? pos : tmpl.find(kTargetMarkerAlias);
}

std::string with_target(const std::string& tmpl, std::string_view with) {
  return tmpl.find(kTargetMarker) != std::string::npos ? replace_first(tmpl, kTargetMarker, with)
                                                       : replace_first(tmpl, kTargetMarkerAlias, with);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::ranges::transform(out, out.begin(),
                         [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double mean_of(const std::vector<ScoreSample>& samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) sum += s.score;
  return sum / static_cast<double>(samples.size());
}

}  // namespace

void validate(const TemplateSpec& spec) {
  auto bad = [&](const std::string& why) {
    fail(ErrorCode::BadTemplate, fmt::format("topic '{}': {}", spec.topic, why));
  };
  if (spec.templates.empty()) bad("no templates");
  if (spec.attributes.empty()) bad("no attribute fillers");
  if (spec.male_words.empty() || spec.female_words.empty()) bad("empty gender word list");
  for (std::size_t i = 0; i < spec.templates.size(); ++i) {
    const auto& t = spec.templates[i];
    const auto attrs = count_of(t, kAttributeMarker);
    const auto targets = count_of(t, kTargetMarker) + count_of(t, kTargetMarkerAlias);
    if (attrs != 1 || targets != 1) {
      bad(fmt::format("template {} '{}' has {} attribute and {} target markers (need 1 each)", i,
                      t, attrs, targets));
    }
    if (count_masks(t) != 0) bad(fmt::format("template {} already contains {}", i, kMaskToken));
  }
  for (const auto& a : spec.attributes) {
    if (count_masks(a) != 0) bad("attribute filler contains " + std::string(kMaskToken));
  }
  const std::set<std::string> male(spec.male_words.begin(), spec.male_words.end());
  for (const auto& w : spec.female_words) {
    if (male.contains(w)) bad("word '" + w + "' is in both gender lists");
  }
}

TemplateSpec parse_template_spec(std::string_view json_text) {
  TemplateSpec spec;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    spec.topic = doc.at("topic").get<std::string>();
    spec.templates = doc.at("templates").get<std::vector<std::string>>();
    spec.attributes = doc.at("attributes").get<std::vector<std::string>>();
    spec.male_words = doc.at("male_words").get<std::vector<std::string>>();
    spec.female_words = doc.at("female_words").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadTemplate, fmt::format("bad template file: {}", e.what()));
  }
  validate(spec);
  return spec;
}

TemplateSpec load_template_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open template file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_template_spec(buf.str());
}

std::vector<PlannedProbe> expand_templates(const TemplateSpec& spec) {
  validate(spec);
  std::vector<PlannedProbe> plans;
  plans.reserve(spec.templates.size() * spec.attributes.size() *
                (spec.male_words.size() + spec.female_words.size()));
  for (std::size_t t = 0; t < spec.templates.size(); ++t) {
    const auto& tmpl = spec.templates[t];
    const std::size_t target_mask_index = target_position(tmpl) < tmpl.find(kAttributeMarker) ? 0 : 1;
    const auto both_masked = with_target(replace_first(tmpl, kAttributeMarker, kMaskToken), kMaskToken);
    for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
      const auto prior = with_target(replace_first(tmpl, kAttributeMarker, spec.attributes[a]), kMaskToken);
      for (Gender side : {Gender::Male, Gender::Female}) {
        const auto& words = side == Gender::Male ? spec.male_words : spec.female_words;
        for (const auto& w : words) {
          plans.push_back({t, a, side, w, prior, both_masked, target_mask_index});
        }
      }
    }
  }
  return plans;
}

std::string_view to_string(ProbeMode mode) {
  return mode == ProbeMode::Literal ? "literal" : "both_masked_prior";
}

ProbeMode parse_probe_mode(std::string_view text) {
  if (text == "literal") return ProbeMode::Literal;
  if (text == "both_masked_prior") return ProbeMode::BothMaskedPrior;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown probe mode '{}'", text));
}

std::pair<OracleQuery, OracleQuery> probe_queries(const PlannedProbe& plan, ProbeMode mode,
                                                  std::int64_t plan_index) {
  OracleQuery prior{2 * plan_index, plan.prior_text, {plan.target_word}, ScoringMode::Masked, 0};
  OracleQuery target{2 * plan_index + 1, plan.prior_text, {plan.target_word},
                     ScoringMode::PseudoLikelihood, 0};
  if (mode == ProbeMode::BothMaskedPrior) {
    prior.text = plan.both_masked_text;
    prior.mask_index = plan.target_mask_index;
    target.mode = ScoringMode::Masked;
  }
  return {std::move(prior), std::move(target)};
}

LogScores calc_log_score(const TemplateSpec& spec, Oracle& oracle, ProbeMode mode) {
  const auto plans = expand_templates(spec);
  std::vector<OracleQuery> queries;
  queries.reserve(2 * plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    auto [prior, target] = probe_queries(plans[i], mode, static_cast<std::int64_t>(i));
    queries.push_back(std::move(prior));
    queries.push_back(std::move(target));
  }
  const auto responses = ask(oracle, queries);

  LogScores out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& plan = plans[i];
    ScoreSample s;
    s.template_index = plan.template_index;
    s.attribute_index = plan.attribute_index;
    s.target_word = plan.target_word;
    s.side = plan.side;
    s.log_p_prior = responses[2 * i].log_probs.at(plan.target_word);
    s.log_p_target = responses[2 * i + 1].log_probs.at(plan.target_word);
    s.score = s.log_p_target - s.log_p_prior;
    if (!std::isfinite(s.score)) {
      fail(ErrorCode::NonFiniteScore, fmt::format("plan {} ('{}', '{}') gave score {}", i,
                                                  plan.prior_text, plan.target_word, s.score));
    }
    (plan.side == Gender::Male ? out.male : out.female).push_back(std::move(s));
  }
  return out;
}

GenderComparison compare_gender_scores(const LogScores& scores, double alpha) {
  using Key = std::pair<std::size_t, std::size_t>;
  std::map<Key, std::pair<double, std::size_t>> male, female;
  for (const auto& s : scores.male) {
    auto& [sum, n] = male[{s.template_index, s.attribute_index}];
    sum += s.score;
    ++n;
  }
  for (const auto& s : scores.female) {
    auto& [sum, n] = female[{s.template_index, s.attribute_index}];
    sum += s.score;
    ++n;
  }
  std::vector<double> x, y;
  for (const auto& [key, m] : male) {
    auto f = female.find(key);
    if (f == female.end()) continue;
    x.push_back(m.first / static_cast<double>(m.second));
    y.push_back(f->second.first / static_cast<double>(f->second.second));
  }
  if (x.size() != male.size() || x.size() != female.size()) {
    fail(ErrorCode::LengthMismatch, "male and female scores do not cover the same (template, "
                                    "filler) pairs");
  }
  GenderComparison out;
  out.mean_male = mean_of(scores.male);
  out.mean_female = mean_of(scores.female);
  out.pairs = x.size();
  out.test = wilcoxon_signed_rank(x, y);
  out.significant = out.test.p_two_sided < alpha;
  return out;
}

std::string format_score_cell(double mean, bool significant) {
  auto text = fmt::format("{:.3f}", mean);
  if (text == "-0.000") text = "0.000";
  if (significant) text += "*";
  return text;
}

GenderRatio corpus_gender_ratio(std::span<const NoteDocument> notes,
                                std::span<const std::string> attribute_strings,
                                const std::map<std::string, std::string>& patient_genders,
                                const std::map<std::string, int>& patient_labels) {
  std::vector<std::string> needles;
  for (const auto& a : attribute_strings) {
    if (!a.empty()) needles.push_back(lower(a));
  }
  GenderRatio out;
  for (const auto& note : notes) {
    if (lower(note.category) != "discharge summary") continue;
    const auto text = lower(note.text);
    if (std::ranges::any_of(needles, [&](const auto& n) { return text.find(n) != std::string::npos; })) {
      ++out.matching_notes;
    }
  }
  std::size_t male = 0, female = 0;
  for (const auto& [patient, label] : patient_labels) {
    if (label != 1) continue;
    auto g = patient_genders.find(patient);
    if (g == patient_genders.end()) continue;
    if (g->second == "M") ++male;
    else if (g->second == "F") ++female;
  }
  out.positive_patients = male + female;
  if (out.positive_patients > 0) {
    out.percent_male = 100.0 * static_cast<double>(male) / static_cast<double>(out.positive_patients);
    out.percent_female = 100.0 - *out.percent_male;
  }
  return out;
}

std::string format_gender_ratio(const GenderRatio& ratio) {
  if (!ratio.percent_male) return "n/a";
  return fmt::format("{:.1f}%, {:.1f}%", *ratio.percent_male, *ratio.percent_female);
}

std::string sample_template(const TemplateSpec& spec) {
  if (spec.templates.empty() || spec.attributes.empty()) return {};
  return with_target(replace_first(spec.templates.front(), kAttributeMarker, spec.attributes.front()),
                     kTargetMarkerAlias);
}

ProbeRow probe_topic(const TemplateSpec& spec, Oracle& oracle, ProbeMode mode, double alpha) {
  const auto scores = calc_log_score(spec, oracle, mode);
  ProbeRow row;
  row.topic = spec.topic;
  row.mean_male = mean_of(scores.male);
  row.mean_female = mean_of(scores.female);
  row.sample_count = scores.male.size() + scores.female.size();
  row.sample_template = sample_template(spec);
  try {
    row.comparison = compare_gender_scores(scores, alpha);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSample) throw;
  }
  return row;
}

std::string render_probe_markdown(std::span<const ProbeRow> rows) {
  std::string out =
      "| Topic | M | F | # of Templates | Gender Ratio (M, F) | Sample Template |\n"
      "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const bool sig = r.comparison && r.comparison->significant;
    out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", r.topic,
                       format_score_cell(r.mean_male, sig), format_score_cell(r.mean_female, sig),
                       r.sample_count,
                       r.gender_ratio ? format_gender_ratio(*r.gender_ratio) : "n/a",
                       r.sample_template);
  }
  out += "\n*Denotes a significant male/female difference (Wilcoxon signed-rank).\n";
  return out;
}

std::string render_probe_csv(std::span<const ProbeRow> rows) {
  std::ostringstream out;
  csv::write_row(out, {"topic", "mean_male", "mean_female", "p_value", "method", "significant",
                       "pairs", "samples", "gender_ratio", "sample_template"});
  for (const auto& r : rows) {
    csv::write_row(
        out, {r.topic, fmt::format("{:.6f}", r.mean_male), fmt::format("{:.6f}", r.mean_female),
              r.comparison ? fmt::format("{:.6g}", r.comparison->test.p_two_sided) : "",
              r.comparison ? std::string(to_string(r.comparison->test.method)) : "",
              r.comparison && r.comparison->significant ? "true" : "false",
              std::to_string(r.comparison ? r.comparison->pairs : 0),
              std::to_string(r.sample_count),
              r.gender_ratio ? format_gender_ratio(*r.gender_ratio) : "", r.sample_template});
  }
  return out.str();
}

std::vector<Completion> fill_blank_topk(Oracle& oracle, const std::string& text,
                                        std::span<const std::string> candidates, std::size_t k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "fill: k must be >= 1");
  const auto masks = count_masks(text);
  if (masks != 1 && masks != 2) {
    fail(ErrorCode::InvalidArgument, fmt::format("fill: text needs one or two {} (found {})",
                                                 kMaskToken, masks));
  }
  if (candidates.empty()) fail(ErrorCode::InvalidArgument, "fill: empty candidate vocabulary");
  const std::vector<std::string> vocab(candidates.begin(), candidates.end());

  auto ranked = [](const OracleResponse& r) {
    std::vector<std::pair<std::string, double>> v(r.log_probs.begin(), r.log_probs.end());
    std::ranges::sort(v, [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return v;
  };
  auto by_score = [](const Completion& a, const Completion& b) {
    return a.log_prob != b.log_prob ? a.log_prob > b.log_prob : a.words < b.words;
  };

  const OracleQuery first{0, text, vocab, ScoringMode::Masked, 0};
  const auto first_ranked = ranked(ask(oracle, std::span(&first, 1)).front());
  const std::size_t keep = std::min(k, first_ranked.size());

  std::vector<Completion> out;
  if (masks == 1) {
    for (std::size_t i = 0; i < keep; ++i) out.push_back({{first_ranked[i].first}, first_ranked[i].second});
    return out;
  }
  std::vector<OracleQuery> second;
  for (std::size_t i = 0; i < keep; ++i) {
    second.push_back({static_cast<std::int64_t>(i + 1),
                      replace_first(text, kMaskToken, first_ranked[i].first), vocab,
                      ScoringMode::Masked, 0});
  }
  const auto responses = ask(oracle, second);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto next = ranked(responses[i]);
    for (std::size_t j = 0; j < std::min(k, next.size()); ++j) {
      out.push_back({{first_ranked[i].first, next[j].first}, first_ranked[i].second + next[j].second});
    }
  }
  std::ranges::sort(out, by_score);
  return out;
}

}  // namespace fairaudit
