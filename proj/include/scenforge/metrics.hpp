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

#ifndef SCENFORGE_METRICS_HPP
#define SCENFORGE_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "scenforge/representation.hpp"

namespace scenforge::metrics {

struct GroundTruthCase {
  std::string text;
  rep::ScenarioRepresentation expected;
};

struct ElementAccuracy {
  std::map<std::string, double> per_slot;  // 17 slot names -> fraction correct
  double mean = 0.0;                       // unweighted over the 17 slots
};

// Per-slot parsing accuracy against ground truth. Participant lists are
// aligned with the same (type, position_relation) sort used by the
// self-consistency vote; a participant slot counts as correct only when both
// lists have the same length and agree at every aligned index.
ElementAccuracy element_accuracy(
    const std::vector<std::pair<rep::ScenarioRepresentation, GroundTruthCase>>& results);

// Success rate of execution times average element accuracy.
double matching_accuracy(double success_rate, double avg_element_accuracy);

struct RatingMatrix {
  // n subjects x k raters, entries in [0, 1]
  std::vector<std::vector<double>> scores;

  size_t subjects() const { return scores.size(); }
  size_t raters() const { return scores.empty() ? 0 : scores.front().size(); }

  static RatingMatrix from_csv(const std::string& path);
  static RatingMatrix from_csv_text(const std::string& text);
  void check() const;  // n >= 2, k >= 2, rectangular, finite, in range
};

enum class IccForm { Single, Average };

// Two-way random-effects intraclass correlation (consistency of absolute
// agreement across raters): ICC(2,1) for Single, ICC(2,k) for Average,
// computed from the two-way ANOVA mean squares. A matrix with all entries
// equal returns 1.0; other degenerate denominators raise DomainError.
double icc_two_way_random(const RatingMatrix& m, IccForm form);

enum class Outcome { Executable, ReadError, RuntimeError };

struct FeasibilityProportions {
  double executable = 0.0;
  double read_error = 0.0;
  double runtime_error = 0.0;
};

FeasibilityProportions feasibility_tally(const std::vector<Outcome>& outcomes);

}  // namespace scenforge::metrics

#endif  // SCENFORGE_METRICS_HPP
