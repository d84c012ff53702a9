#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

/// How one protected attribute is cleaned before analysis.
struct GroupPolicy {
  std::string attribute;
  std::set<std::string> drop_values;
  std::map<std::string, std::string> collapse_map;
  // When rest_value is set, every surviving value that is not in keep_values
  // (checked after collapse_map) becomes rest_value.
  std::set<std::string> keep_values;
  std::string rest_value;

  bool empty() const {
    return drop_values.empty() && collapse_map.empty() && rest_value.empty();
  }
};

/// Throws InvalidArgument when drop_values and collapse_map overlap.
void validate_policy(const GroupPolicy& policy);

/// Drops records whose value is in drop_values and recodes the rest. Only the
/// policy's attribute is touched.
std::vector<PredictionRecord> filter_groups(const std::vector<PredictionRecord>& records,
                                            const GroupPolicy& policy);

/// Recodes a single value; nullopt when the value is dropped.
std::optional<std::string> apply_policy(const GroupPolicy& policy, const std::string& value);

/// Defaults used by the audit: UNKNOWN dropped for language and ethnicity,
/// non-English collapsed to "Other", and the small Self Pay / Government
/// insurance groups dropped.
GroupPolicy default_policy(const std::string& attribute);

}  // namespace fairaudit
