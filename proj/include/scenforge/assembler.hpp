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

#ifndef SCENFORGE_ASSEMBLER_HPP
#define SCENFORGE_ASSEMBLER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scenforge/backend.hpp"
#include "scenforge/corpus.hpp"
#include "scenforge/document.hpp"
#include "scenforge/executor.hpp"
#include "scenforge/representation.hpp"

namespace scenforge::assembler {

// Behavior -> ordered standard actions. Loaded from JSON; the builtin table
// covers the bundled vocabulary.
class DecompositionTable {
public:
  static DecompositionTable from_file(const std::string& path);
  static DecompositionTable from_json_text(const std::string& text);
  static DecompositionTable builtin();

  const std::vector<doc::StandardAction>* find(const std::string& behavior) const;
  void set(const std::string& behavior, std::vector<doc::StandardAction> actions);

private:
  std::map<std::string, std::vector<doc::StandardAction>> table_;
};

// Table lookup first; a behavior that already names a standard action maps to
// itself; otherwise one constrained model call (when a backend is given) whose
// output is re-validated against the standard action set.
std::vector<doc::StandardAction> decompose(const std::string& behavior,
                                           const DecompositionTable& table,
                                           pipeline::ModelBackend* backend = nullptr);

// A point on a lane, by arc position.
struct LanePoint {
  std::string lane_id;
  double s = 0.0;
};

// Places a point relative to a reference lane position: front/behind on the
// same lane by +-gap arc length; left/right on the adjacent lane at the
// nearest arc-length match; opposite on the closest anti-parallel lane
// (approach lanes preferred), gap meters further from its end.
LanePoint position_relative(const corpus::MiniMap& map, const LanePoint& ego,
                            const std::string& relation, double gap);

struct AssemblyReport {
  // slot name -> chosen fragment/map/route description
  std::map<std::string, std::string> chosen;
  std::vector<std::string> unresolved_slots;  // sentinel-valued, defaults applied
  std::vector<std::string> notes;
  std::vector<rep::ConsistencyFinding> findings;  // forwarded warnings

  std::string to_json() const;
};

struct AssemblyContext {
  const corpus::DslCorpus& corpus;
  const repo::RepositoryConfig& config;
  const rep::RuleSet& rules;
  DecompositionTable table = DecompositionTable::builtin();
  exec::MonitorSpec monitors;
  pipeline::ModelBackend* backend = nullptr;  // optional, for decompose misses
};

struct AssembleResult {
  doc::TargetDocument document;
  AssemblyReport report;
};

// Static element matching in priority order, then dynamic action-chain
// concatenation. Deterministic for fixed (representation, corpus, seed);
// seeded choices draw from independent per-tier streams so lower-priority
// slots can never disturb higher-priority picks.
AssembleResult assemble(const rep::ScenarioRepresentation& representation,
                        const AssemblyContext& context, std::uint64_t seed);

}  // namespace scenforge::assembler

#endif  // SCENFORGE_ASSEMBLER_HPP
