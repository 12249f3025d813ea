// Copyright 2025 Scenforge Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "scenforge/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::metrics {

namespace {

std::vector<rep::TrafficParticipant> sorted_participants(
    const rep::ScenarioRepresentation& r) {
  std::vector<rep::TrafficParticipant> list = r.traffic_participants;
  std::stable_sort(list.begin(), list.end(),
                   [](const rep::TrafficParticipant& a, const rep::TrafficParticipant& b) {
                     if (a.participant_type != b.participant_type)
                       return a.participant_type < b.participant_type;
                     return a.position_relation < b.position_relation;
                   });
  return list;
}

}  // namespace

ElementAccuracy element_accuracy(
    const std::vector<std::pair<rep::ScenarioRepresentation, GroundTruthCase>>& results) {
  if (results.empty()) throw DomainError("element_accuracy: no results");
  ElementAccuracy out;
  const auto& names = rep::slot_names();
  std::map<std::string, int> correct;
  for (const std::string& slot : names) correct[slot] = 0;

  for (const auto& [parsed, truth] : results) {
    const auto got = sorted_participants(parsed);
    const auto want = sorted_participants(truth.expected);
    for (const std::string& slot : names) {
      bool ok;
      if (rep::is_participant_slot(slot)) {
        ok = got.size() == want.size();
        if (ok) {
          for (size_t i = 0; i < got.size(); ++i) {
            if (rep::get_participant_slot(got[i], slot) !=
                rep::get_participant_slot(want[i], slot)) {
              ok = false;
              break;
            }
          }
        }
      } else {
        ok = rep::get_slot(parsed, slot) == rep::get_slot(truth.expected, slot);
      }
      if (ok) correct[slot] += 1;
    }
  }

  double sum = 0.0;
  for (const std::string& slot : names) {
    double frac = static_cast<double>(correct[slot]) / static_cast<double>(results.size());
    out.per_slot[slot] = frac;
    sum += frac;
  }
  out.mean = sum / static_cast<double>(names.size());
  return out;
}

double matching_accuracy(double success_rate, double avg_element_accuracy) {
  if (success_rate < 0.0 || success_rate > 1.0 || avg_element_accuracy < 0.0 ||
      avg_element_accuracy > 1.0) {
    throw DomainError("matching_accuracy: arguments must lie in [0, 1]");
  }
  return success_rate * avg_element_accuracy;
}

// ---------------------------------------------------------------------------
// ICC
// ---------------------------------------------------------------------------

RatingMatrix RatingMatrix::from_csv_text(const std::string& text) {
  RatingMatrix m;
  for (const std::string& raw_line : util::split(text, '\n')) {
    const std::string line = util::trim(raw_line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    bool numeric = true;
    for (const std::string& cell : util::split(line, ',')) {
      try {
        row.push_back(std::stod(util::trim(cell)));
      } catch (...) {
        numeric = false;
        break;
      }
    }
    if (!numeric) continue;  // header row
    if (!row.empty()) m.scores.push_back(std::move(row));
  }
  m.check();
  return m;
}

RatingMatrix RatingMatrix::from_csv(const std::string& path) {
  return from_csv_text(util::read_file(path));
}

void RatingMatrix::check() const {
  if (subjects() < 2) throw SchemaError("rating matrix: need at least 2 subjects");
  if (raters() < 2) throw SchemaError("rating matrix: need at least 2 raters");
  for (const auto& row : scores) {
    if (row.size() != raters()) throw SchemaError("rating matrix: ragged rows");
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw SchemaError("rating matrix: entries must be finite and in [0, 1]");
      }
    }
  }
}

double icc_two_way_random(const RatingMatrix& m, IccForm form) {
  m.check();
  const size_t n = m.subjects();
  const size_t k = m.raters();
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);

  double grand = 0.0;
  for (const auto& row : m.scores)
    for (double v : row) grand += v;
  grand /= dn * dk;

  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(k, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < k; ++j) {
      row_mean[i] += m.scores[i][j];
      col_mean[j] += m.scores[i][j];
    }
  }
  for (double& v : row_mean) v /= dk;
  for (double& v : col_mean) v /= dn;

  double ss_rows = 0.0;
  for (double v : row_mean) ss_rows += (v - grand) * (v - grand);
  ss_rows *= dk;
  double ss_cols = 0.0;
  for (double v : col_mean) ss_cols += (v - grand) * (v - grand);
  ss_cols *= dn;
  double ss_err = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < k; ++j) {
      double resid = m.scores[i][j] - row_mean[i] - col_mean[j] + grand;
      ss_err += resid * resid;
    }
  }

  const double msr = ss_rows / (dn - 1.0);
  const double msc = ss_cols / (dk - 1.0);
  const double mse = ss_err / ((dn - 1.0) * (dk - 1.0));

  // All entries equal: perfect agreement by convention.
  bool all_equal = true;
  for (const auto& row : m.scores) {
    for (double v : row) {
      if (v != m.scores[0][0]) {
        all_equal = false;
        break;
      }
    }
  }
  if (all_equal) return 1.0;

  double denom;
  double numer = msr - mse;
  if (form == IccForm::Single) {
    denom = msr + (dk - 1.0) * mse + dk * (msc - mse) / dn;
  } else {
    denom = msr + (msc - mse) / dn;
  }
  if (std::abs(denom) < 1e-15) {
    throw DomainError("icc: denominator degenerates to zero for this matrix");
  }
  return numer / denom;
}

FeasibilityProportions feasibility_tally(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw DomainError("feasibility_tally: no outcomes");
  FeasibilityProportions p;
  const double total = static_cast<double>(outcomes.size());
  for (Outcome o : outcomes) {
    switch (o) {
      case Outcome::Executable: p.executable += 1.0; break;
      case Outcome::ReadError: p.read_error += 1.0; break;
      case Outcome::RuntimeError: p.runtime_error += 1.0; break;
    }
  }
  p.executable /= total;
  p.read_error /= total;
  p.runtime_error /= total;
  return p;
}

}  // namespace scenforge::metrics
