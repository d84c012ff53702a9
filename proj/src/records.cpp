#include "fairaudit/records.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

const std::vector<std::string> kRequired{"patient_id", "note_id", "subsequence_index", "task_id",
                                         "split",      "probability", "label"};

[[noreturn]] void malformed(std::size_t row, std::string_view field, const std::string& why) {
  fail(ErrorCode::MalformedRow, fmt::format("row {} field '{}': {}", row, field, why));
}

double parse_probability(std::string_view text, std::size_t row) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    malformed(row, "probability", fmt::format("not a number: '{}'", text));
  }
  if (value < 0.0 || value > 1.0) {
    malformed(row, "probability", fmt::format("{} outside [0, 1]", text));
  }
  return value;
}

int parse_label(std::string_view text, std::size_t row) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  malformed(row, "label", fmt::format("expected 0 or 1, got '{}'", text));
}

std::uint32_t parse_index(std::string_view text, std::size_t row) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    malformed(row, "subsequence_index", fmt::format("not a non-negative integer: '{}'", text));
  }
  return value;
}

Split parse_split_at(std::string_view text, std::size_t row) {
  try {
    return parse_split(text);
  } catch (const Error&) {
    malformed(row, "split", fmt::format("unknown split '{}'", text));
  }
}

std::string attribute_or_unknown(std::string value) {
  return value.empty() ? std::string(kUnknown) : value;
}

std::vector<PredictionRecord> parse_csv(std::istream& in) {
  csv::Reader reader(in);
  std::optional<csv::Row> header;
  while ((header = reader.next())) {
    if (!header->empty() && !(*header)[0].empty() && (*header)[0][0] == '#') continue;
    break;
  }
  if (!header) fail(ErrorCode::MalformedRow, "missing header row");

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header->size(); ++i) column.emplace((*header)[i], i);
  for (const auto& name : kRequired) {
    if (!column.contains(name)) fail(ErrorCode::MalformedRow, "header lacks column '" + name + "'");
  }

  std::vector<PredictionRecord> records;
  std::size_t row_index = 0;
  while (auto row = reader.next()) {
    if (row->size() == 1 && (*row)[0].empty()) continue;  // blank line
    ++row_index;
    if (row->size() != header->size()) {
      malformed(row_index, "*",
                fmt::format("expected {} fields, found {}", header->size(), row->size()));
    }
    auto get = [&](const std::string& name) -> std::string& { return (*row)[column.at(name)]; };

    PredictionRecord rec;
    rec.patient_id = get("patient_id");
    rec.note_id = get("note_id");
    rec.subsequence_index = parse_index(get("subsequence_index"), row_index);
    rec.task_id = get("task_id");
    rec.split = parse_split_at(get("split"), row_index);
    rec.probability = parse_probability(get("probability"), row_index);
    rec.label = parse_label(get("label"), row_index);
    if (rec.patient_id.empty()) malformed(row_index, "patient_id", "empty");
    if (rec.task_id.empty()) malformed(row_index, "task_id", "empty");
    for (const auto& attr : standard_attributes()) {
      auto it = column.find(attr);
      rec.attributes[attr] =
          it == column.end() ? std::string(kUnknown) : attribute_or_unknown((*row)[it->second]);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string json_text(const nlohmann::json& obj, std::string_view key, std::size_t row) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(row, key, "missing");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  malformed(row, key, "expected string or number");
}

std::vector<PredictionRecord> parse_jsonl(std::istream& in) {
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row_index;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      malformed(row_index, "*", e.what());
    }
    if (!obj.is_object()) malformed(row_index, "*", "expected a JSON object");

    PredictionRecord rec;
    rec.patient_id = json_text(obj, "patient_id", row_index);
    rec.note_id = json_text(obj, "note_id", row_index);
    rec.subsequence_index = parse_index(json_text(obj, "subsequence_index", row_index), row_index);
    rec.task_id = json_text(obj, "task_id", row_index);
    rec.split = parse_split_at(json_text(obj, "split", row_index), row_index);

    const auto& prob = obj.contains("probability") ? obj["probability"] : nlohmann::json();
    if (!prob.is_number()) malformed(row_index, "probability", "missing or not a number");
    rec.probability = prob.get<double>();
    if (!(rec.probability >= 0.0 && rec.probability <= 1.0)) {
      malformed(row_index, "probability", fmt::format("{} outside [0, 1]", rec.probability));
    }
    rec.label = parse_label(json_text(obj, "label", row_index), row_index);
    if (rec.patient_id.empty()) malformed(row_index, "patient_id", "empty");
    for (const auto& attr : standard_attributes()) {
      auto it = obj.find(attr);
      rec.attributes[attr] = (it == obj.end() || it->is_null())
                                 ? std::string(kUnknown)
                                 : attribute_or_unknown(json_text(obj, attr, row_index));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "test";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "validation") return Split::Validation;
  if (text == "test") return Split::Test;
  fail(ErrorCode::MalformedRow, fmt::format("unknown split '{}'", text));
}

const std::string& PredictionRecord::attribute(const std::string& name) const {
  static const std::string unknown(kUnknown);
  auto it = attributes.find(name);
  return it == attributes.end() ? unknown : it->second;
}

FileFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return FileFormat::Jsonl;
  return FileFormat::Csv;
}

void validate_predictions(const std::vector<PredictionRecord>& records) {
  std::set<std::tuple<std::string_view, std::string_view, std::uint32_t, std::string_view>> keys;
  std::unordered_map<std::string_view, Split> patient_split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!keys.emplace(r.patient_id, r.note_id, r.subsequence_index, r.task_id).second) {
      fail(ErrorCode::DuplicateKey,
           fmt::format("row {}: duplicate (patient_id={}, note_id={}, subsequence_index={}, "
                       "task_id={})",
                       i + 1, r.patient_id, r.note_id, r.subsequence_index, r.task_id));
    }
    auto [it, inserted] = patient_split.emplace(r.patient_id, r.split);
    if (!inserted && it->second != r.split) {
      fail(ErrorCode::SplitLeak,
           fmt::format("row {}: patient {} appears in both {} and {}", i + 1, r.patient_id,
                       to_string(it->second), to_string(r.split)));
    }
  }
}

std::vector<PredictionRecord> parse_predictions(std::istream& in, FileFormat format) {
  auto records = format == FileFormat::Csv ? parse_csv(in) : parse_jsonl(in);
  validate_predictions(records);
  return records;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               FileFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open predictions file " + path.string());
  return parse_predictions(in, format);
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  return load_predictions(path, format_from_path(path));
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records,
                       FileFormat format, const std::vector<std::string>& comments) {
  if (format == FileFormat::Jsonl) {
    for (const auto& r : records) {
      nlohmann::ordered_json obj;
      obj["patient_id"] = r.patient_id;
      obj["note_id"] = r.note_id;
      obj["subsequence_index"] = r.subsequence_index;
      obj["task_id"] = r.task_id;
      obj["split"] = to_string(r.split);
      obj["probability"] = r.probability;
      obj["label"] = r.label;
      for (const auto& attr : standard_attributes()) obj[attr] = r.attribute(attr);
      out << obj.dump() << '\n';
    }
    return;
  }
  for (const auto& c : comments) out << "# " << c << '\n';
  csv::Row header = kRequired;
  header.insert(header.end(), standard_attributes().begin(), standard_attributes().end());
  csv::write_row(out, header);
  for (const auto& r : records) {
    csv::Row row{r.patient_id,
                 r.note_id,
                 std::to_string(r.subsequence_index),
                 r.task_id,
                 std::string(to_string(r.split)),
                 fmt::format("{}", r.probability),
                 std::to_string(r.label)};
    for (const auto& attr : standard_attributes()) row.push_back(r.attribute(attr));
    csv::write_row(out, row);
  }
}

const std::vector<std::string>& standard_task_ids() {
  static const std::vector<std::string> ids = [] {
    const std::vector<std::string> phenotypes{
        "Acute Renal",      "Cerebrovascular", "Myocardial",       "Dysrhythmias",
        "Chronic Kidney",   "COPD",            "Comp. Surgical",   "Conduction",
        "Heart Failure",    "Atherosclerosis", "Diabetes Comp",    "Diabetes No Comp",
        "Lipid Metabolism", "Hypertension",    "Fluid Disorder",   "GI Hemorrhage",
        "Hypertension Comp", "Other Liver",    "Lower Resp",       "Upper Resp",
        "Pleurisy",         "Pneumonia",       "Resp Failure",     "Septicemia",
        "Shock",            "Chronic",         "Acute",            "Disease"};
    std::vector<std::string> out{"Inhosp Mort"};
    for (const auto& p : phenotypes) out.push_back("PA " + p);
    for (const auto& p : phenotypes) out.push_back("PF " + p);
    return out;
  }();
  return ids;
}

}  // namespace fairaudit
