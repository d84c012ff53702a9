#include "fairaudit/groups.hpp"

#include <optional>

#include "fairaudit/error.hpp"

namespace fairaudit {

void validate_policy(const GroupPolicy& policy) {
  for (const auto& [from, to] : policy.collapse_map) {
    if (policy.drop_values.contains(from)) {
      fail(ErrorCode::InvalidArgument, "group policy for '" + policy.attribute +
                                           "': value '" + from +
                                           "' is both dropped and collapsed");
    }
  }
}

std::optional<std::string> apply_policy(const GroupPolicy& policy, const std::string& value) {
  if (policy.drop_values.contains(value)) return std::nullopt;
  std::string out = value;
  if (auto it = policy.collapse_map.find(value); it != policy.collapse_map.end()) out = it->second;
  if (!policy.rest_value.empty() && !policy.keep_values.contains(out)) out = policy.rest_value;
  return out;
}

std::vector<PredictionRecord> filter_groups(const std::vector<PredictionRecord>& records,
                                            const GroupPolicy& policy) {
  validate_policy(policy);
  if (!records.empty() && !records.front().attributes.contains(policy.attribute)) {
    fail(ErrorCode::UnknownAttribute, "attribute '" + policy.attribute + "' not present in data");
  }
  if (policy.empty()) return records;
  std::vector<PredictionRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    auto it = rec.attributes.find(policy.attribute);
    if (it == rec.attributes.end()) {
      fail(ErrorCode::UnknownAttribute, "attribute '" + policy.attribute +
                                            "' missing for patient " + rec.patient_id);
    }
    auto value = apply_policy(policy, it->second);
    if (!value) continue;
    auto copy = rec;
    copy.attributes[policy.attribute] = std::move(*value);
    out.push_back(std::move(copy));
  }
  return out;
}

GroupPolicy default_policy(const std::string& attribute) {
  GroupPolicy p;
  p.attribute = attribute;
  if (attribute == "gender") {
    p.drop_values = {std::string(kUnknown)};
  } else if (attribute == "language") {
    p.drop_values = {std::string(kUnknown)};
    p.keep_values = {"English"};
    p.rest_value = "Other";
  } else if (attribute == "ethnicity") {
    p.drop_values = {std::string(kUnknown)};
  } else if (attribute == "insurance") {
    p.drop_values = {std::string(kUnknown), "Self Pay", "Government"};
  }
  return p;
}

}  // namespace fairaudit
