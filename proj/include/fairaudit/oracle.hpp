#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

/// Mask sentinel on the wire; the oracle maps it to its own mask token.
inline constexpr std::string_view kMaskToken = "[MASK]";

enum class ScoringMode {
  Masked,            // log P(candidate | context) at the masked position
  PseudoLikelihood,  // candidate inserted at the position, then scored
};

std::string_view to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(std::string_view text);

/// One question for a masked-LM oracle. `mask_index` is the ordinal (0-based)
/// of the target among the [MASK] sentinels in `text`.
struct OracleQuery {
  std::int64_t id = 0;
  std::string text;
  std::vector<std::string> candidates;
  ScoringMode mode = ScoringMode::Masked;
  std::size_t mask_index = 0;

  bool operator==(const OracleQuery&) const = default;
};

struct OracleResponse {
  std::int64_t id = 0;
  std::map<std::string, double> log_probs;  // natural log, <= 0
  std::optional<std::string> error;

  bool operator==(const OracleResponse&) const = default;
};

/// Number of [MASK] sentinels in `text`.
std::size_t count_masks(std::string_view text);

// Line-delimited JSON wire format.
std::string encode_query(const OracleQuery& query);
OracleQuery decode_query(std::string_view line);
std::string encode_response(const OracleResponse& response);
OracleResponse decode_response(std::string_view line);

/// Anything that answers token-probability queries. Responses may come back
/// in any order; callers match them by id.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::vector<OracleResponse> query(std::span<const OracleQuery> queries) = 0;
};

/// Runs the queries and checks every response: one per id, no error, every
/// candidate covered with a finite log-probability <= 0. Throws OracleFailure
/// naming the offending query id. Result is in query order.
std::vector<OracleResponse> ask(Oracle& oracle, std::span<const OracleQuery> queries);

/// Deterministic lookup oracle. Keys are (mode, mask_index, text); values are
/// candidate probabilities in (0, 1]. A missing key or candidate is an error,
/// never a default.
class TableOracle final : public Oracle {
 public:
  TableOracle() = default;

  static TableOracle load(const std::filesystem::path& path);
  static TableOracle parse(std::string_view json_text);
  void save(const std::filesystem::path& path) const;
  std::string dump() const;

  void set(ScoringMode mode, std::size_t mask_index, const std::string& text,
           const std::string& candidate, double probability);
  /// Probability or MissingEntry.
  double lookup(ScoringMode mode, std::size_t mask_index, const std::string& text,
                const std::string& candidate) const;

  /// Every candidate stored under any key, sorted.
  std::vector<std::string> vocabulary() const;
  /// Candidates stored under one key (sorted); empty if the key is absent.
  std::vector<std::string> candidates_for(ScoringMode mode, std::size_t mask_index,
                                          const std::string& text) const;

  std::vector<OracleResponse> query(std::span<const OracleQuery> queries) override;

  /// Answers one query in wire form; unknown keys become error responses.
  OracleResponse answer(const OracleQuery& query) const;

  static std::string context_key(ScoringMode mode, std::size_t mask_index,
                                 const std::string& text);

 private:
  std::map<std::string, std::map<std::string, double>> table_;
};

/// Oracle running as a child process (`/bin/sh -c command`) that speaks the
/// wire format over stdin/stdout. Requests are written from a separate thread
/// so a chatty child cannot deadlock the pipe.
class ProcessOracle final : public Oracle {
 public:
  explicit ProcessOracle(const std::string& command);
  ~ProcessOracle() override;
  ProcessOracle(const ProcessOracle&) = delete;
  ProcessOracle& operator=(const ProcessOracle&) = delete;

  std::vector<OracleResponse> query(std::span<const OracleQuery> queries) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fairaudit
