#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

/// A synthetic prediction cohort built from exact per-cell quotas.
///
/// Test patients form a full factorial over gender x language x ethnicity x
/// insurance, with `cell_positives` + `cell_negatives` patients per cell. In
/// every cell exactly round(recall * positives) positives and
/// round(specificity * negatives) negatives land on the right side of the
/// threshold, so every subgroup of every attribute has the same rates except
/// on planted tasks, where female recall drops to `planted_recall`. Null tasks
/// therefore have gaps of exactly zero and planted tasks a gender recall gap of
/// exactly recall - planted_recall.
///
/// Validation patients are perfectly separated with the smallest positive
/// probability equal to `threshold`, so F1 tuning recovers it.
struct CohortSpec {
  std::size_t tasks = 10;
  std::vector<std::size_t> planted{2, 5, 8};  // task indices
  std::size_t cell_positives = 20;
  std::size_t cell_negatives = 30;
  double recall = 0.9;
  double planted_recall = 0.6;
  double specificity = 0.8;
  double threshold = 0.6;
  std::size_t validation_patients = 200;
  std::uint64_t seed = 2024;
};

void validate(const CohortSpec& spec);

/// Task names: "Task 01", "Task 02", ...
std::vector<std::string> cohort_task_ids(const CohortSpec& spec);

/// One record per (patient, task); validation rows first, then test rows.
std::vector<PredictionRecord> synthesize_cohort(const CohortSpec& spec);

}  // namespace fairaudit
