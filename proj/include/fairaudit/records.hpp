#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

enum class Split { Train, Validation, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

inline constexpr std::string_view kUnknown = "UNKNOWN";

/// Protected attributes carried by every prediction file.
inline const std::vector<std::string>& standard_attributes() {
  static const std::vector<std::string> names{"gender", "language", "ethnicity", "insurance"};
  return names;
}

/// One (patient, task, subsequence) prediction row.
struct PredictionRecord {
  std::string patient_id;
  std::string note_id;
  std::uint32_t subsequence_index = 0;
  std::string task_id;
  Split split = Split::Test;
  double probability = 0.0;
  int label = 0;
  std::map<std::string, std::string> attributes;

  const std::string& attribute(const std::string& name) const;

  bool operator==(const PredictionRecord&) const = default;
};

enum class FileFormat { Csv, Jsonl };

/// csv unless the extension is .jsonl / .json / .ndjson.
FileFormat format_from_path(const std::filesystem::path& path);

std::vector<PredictionRecord> parse_predictions(std::istream& in, FileFormat format);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               FileFormat format);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

/// Checks PredictionRecord invariants across a whole file: key uniqueness and
/// one split per patient. Row-level bounds are checked while parsing.
void validate_predictions(const std::vector<PredictionRecord>& records);

/// Writes records in the same column layout load_predictions reads. Each
/// entry of `comments` is emitted as a leading "# ..." line (CSV only).
void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records,
                       FileFormat format, const std::vector<std::string>& comments = {});

/// The 57 task identifiers: in-hospital mortality plus 28 phenotypes for the
/// all-notes (PA) and first-note (PF) cohorts.
const std::vector<std::string>& standard_task_ids();

}  // namespace fairaudit
