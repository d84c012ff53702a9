#include "fairaudit/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "fairaudit/error.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

namespace {

const std::vector<std::string> kGenders{"M", "F"};
const std::vector<std::string> kLanguages{"English", "Spanish"};
const std::vector<std::string> kEthnicities{"White", "Black", "Hispanic", "Asian", "Other"};
const std::vector<std::string> kInsurance{"Medicare", "Medicaid", "Private", "Self Pay"};

std::size_t quota(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

double draw(std::mt19937_64& engine, double lo, double hi) {
  // Two decimals keep files short and round-trip exactly.
  const double v = lo + (hi - lo) * uniform_unit(engine);
  return std::round(v * 100.0) / 100.0;
}

void shuffle(std::vector<int>& v, std::mt19937_64& engine) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(engine, i)]);
}

}  // namespace

void validate(const CohortSpec& spec) {
  if (spec.tasks < 1) fail(ErrorCode::InvalidArgument, "cohort needs at least one task");
  for (auto t : spec.planted) {
    if (t >= spec.tasks) {
      fail(ErrorCode::InvalidArgument, fmt::format("planted task {} out of range", t));
    }
  }
  if (spec.cell_positives < 1 || spec.cell_negatives < 1) {
    fail(ErrorCode::InvalidArgument, "cells need positives and negatives");
  }
  for (double r : {spec.recall, spec.planted_recall, spec.specificity}) {
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::InvalidArgument, "rates must be in [0, 1]");
  }
  if (!(spec.threshold > 0.4 && spec.threshold <= 0.95)) {
    fail(ErrorCode::InvalidArgument, "threshold must be in (0.4, 0.95]");
  }
  if (spec.validation_patients < 2) {
    fail(ErrorCode::InvalidArgument, "need at least two validation patients");
  }
}

std::vector<std::string> cohort_task_ids(const CohortSpec& spec) {
  std::vector<std::string> ids;
  for (std::size_t t = 0; t < spec.tasks; ++t) ids.push_back(fmt::format("Task {:02}", t + 1));
  return ids;
}

std::vector<PredictionRecord> synthesize_cohort(const CohortSpec& spec) {
  validate(spec);
  const auto tasks = cohort_task_ids(spec);
  const std::set<std::size_t> planted(spec.planted.begin(), spec.planted.end());
  const double t = spec.threshold;
  std::vector<PredictionRecord> out;

  auto base = [&](std::string patient, Split split, std::size_t cell) {
    PredictionRecord r;
    r.patient_id = std::move(patient);
    r.split = split;
    std::size_t c = cell;
    r.attributes["insurance"] = kInsurance[c % kInsurance.size()];
    c /= kInsurance.size();
    r.attributes["ethnicity"] = kEthnicities[c % kEthnicities.size()];
    c /= kEthnicities.size();
    r.attributes["language"] = kLanguages[c % kLanguages.size()];
    c /= kLanguages.size();
    r.attributes["gender"] = kGenders[c % kGenders.size()];
    return r;
  };
  const std::size_t cells =
      kGenders.size() * kLanguages.size() * kEthnicities.size() * kInsurance.size();

  // Validation: alternating labels, perfectly separated, minimum positive = t.
  for (std::size_t task = 0; task < spec.tasks; ++task) {
    auto engine = stream_engine(spec.seed, 1000 + task);
    bool placed_min = false;
    for (std::size_t p = 0; p < spec.validation_patients; ++p) {
      auto r = base(fmt::format("V{:04}", p + 1), Split::Validation, p % cells);
      r.note_id = fmt::format("{}-n1", r.patient_id);
      r.task_id = tasks[task];
      r.label = p % 2 == 0 ? 1 : 0;
      if (r.label == 1) {
        r.probability = placed_min ? draw(engine, t, 0.95) : t;
        placed_min = true;
      } else {
        r.probability = draw(engine, 0.05, 0.4);
      }
      out.push_back(std::move(r));
    }
  }

  // Test: per cell and task, a shuffled block of outcome codes.
  // 0 = TP, 1 = FN, 2 = TN, 3 = FP.
  const std::size_t per_cell = spec.cell_positives + spec.cell_negatives;
  for (std::size_t task = 0; task < spec.tasks; ++task) {
    auto engine = stream_engine(spec.seed, task);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const bool female = cell / (cells / kGenders.size()) == 1;
      const double recall = planted.contains(task) && female ? spec.planted_recall : spec.recall;
      const auto tp = quota(recall, spec.cell_positives);
      const auto tn = quota(spec.specificity, spec.cell_negatives);
      std::vector<int> codes;
      codes.insert(codes.end(), tp, 0);
      codes.insert(codes.end(), spec.cell_positives - tp, 1);
      codes.insert(codes.end(), tn, 2);
      codes.insert(codes.end(), spec.cell_negatives - tn, 3);
      shuffle(codes, engine);
      for (std::size_t k = 0; k < per_cell; ++k) {
        auto r = base(fmt::format("P{:05}", cell * per_cell + k + 1), Split::Test, cell);
        r.note_id = fmt::format("{}-n1", r.patient_id);
        r.task_id = tasks[task];
        r.label = codes[k] <= 1 ? 1 : 0;
        const bool positive = codes[k] == 0 || codes[k] == 3;
        r.probability = positive ? draw(engine, t, 0.95) : draw(engine, 0.05, 0.4);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace fairaudit
