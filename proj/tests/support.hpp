#pragma once

// Shared helpers for the unit suites and the acceptance runner.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "fairaudit/cohort.hpp"
#include "fairaudit/oracle.hpp"
#include "fairaudit/probe.hpp"
#include "fairaudit/records.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path source_dir() { return FAIRAUDIT_SOURCE_DIR; }
inline fs::path cli_path() { return FAIRAUDIT_CLI; }

/// Reference values computed by tests/oracles/derive_values.py.
inline const nlohmann::json& derived() {
  static const nlohmann::json doc = [] {
    std::ifstream in(source_dir() / "tests/oracles/derived_values.json");
    return nlohmann::json::parse(in);
  }();
  return doc;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("fairaudit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs the CLI with a shell-quoted argument string.
inline RunResult run_cli(const std::string& args) {
  const std::string cmd = "'" + cli_path().string() + "' " + args + " 2>&1";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

// ---------------------------------------------------------------------------
// Probe fixtures

/// `n` templates with one attribute and one word per gender side.
inline fairaudit::TemplateSpec simple_spec(std::size_t n) {
  fairaudit::TemplateSpec spec;
  spec.topic = "Fixture";
  for (std::size_t i = 0; i < n; ++i) {
    spec.templates.push_back("case " + std::to_string(i) + " [TGT] with a hx of [ATTR]");
  }
  spec.attributes = {"cvd"};
  spec.male_words = {"he"};
  spec.female_words = {"she"};
  return spec;
}

/// Table oracle for literal mode: every prior is `prior`, and the target
/// probability is prior * male_ratio (male words) or prior * female_ratio.
inline fairaudit::TableOracle ratio_oracle(const fairaudit::TemplateSpec& spec, double prior,
                                           double male_ratio, double female_ratio) {
  using fairaudit::ScoringMode;
  fairaudit::TableOracle oracle;
  for (const auto& plan : fairaudit::expand_templates(spec)) {
    const double ratio = plan.side == fairaudit::Gender::Male ? male_ratio : female_ratio;
    oracle.set(ScoringMode::Masked, 0, plan.prior_text, plan.target_word, prior);
    oracle.set(ScoringMode::PseudoLikelihood, 0, plan.prior_text, plan.target_word, prior * ratio);
  }
  return oracle;
}

/// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Table oracle answering every literal-mode query of the given specs with a
/// probability derived from a hash of the query.
inline fairaudit::TableOracle hashed_oracle(const std::vector<fairaudit::TemplateSpec>& specs) {
  using fairaudit::ScoringMode;
  fairaudit::TableOracle oracle;
  auto prob = [](const std::string& key) {
    return 0.01 + 0.98 * static_cast<double>(fnv1a(key) % 100000) / 100000.0;
  };
  for (const auto& spec : specs) {
    for (const auto& plan : fairaudit::expand_templates(spec)) {
      oracle.set(ScoringMode::Masked, 0, plan.prior_text, plan.target_word,
                 prob("m|" + plan.prior_text + "|" + plan.target_word));
      oracle.set(ScoringMode::PseudoLikelihood, 0, plan.prior_text, plan.target_word,
                 prob("p|" + plan.prior_text + "|" + plan.target_word));
    }
  }
  return oracle;
}

// ---------------------------------------------------------------------------
// Bootstrap calibration fixture

/// Two groups of `per_group` positive test patients. Each patient is
/// predicted positive with probability equal to its group's true recall, so
/// the sample recall gap varies around recall_a - recall_b from seed to seed.
inline std::vector<fairaudit::PredictionRecord> recall_gap_records(std::size_t per_group,
                                                                   double recall_a, double recall_b,
                                                                   std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::bernoulli_distribution hit_a(recall_a), hit_b(recall_b);
  std::vector<fairaudit::PredictionRecord> rows;
  for (int g = 0; g < 2; ++g) {
    for (std::size_t i = 0; i < per_group; ++i) {
      fairaudit::PredictionRecord r;
      r.patient_id = (g == 0 ? "A" : "B") + std::to_string(i);
      r.note_id = r.patient_id + "-n";
      r.task_id = "T";
      r.split = fairaudit::Split::Test;
      r.label = 1;
      r.probability = (g == 0 ? hit_a(engine) : hit_b(engine)) ? 0.9 : 0.1;
      r.attributes = {{"gender", g == 0 ? "A" : "B"}};
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace testing
