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

#ifndef SCENFORGE_REPRESENTATION_HPP
#define SCENFORGE_REPRESENTATION_HPP

#include <string>
#include <vector>

#include "scenforge/repository.hpp"

namespace scenforge::rep {

struct TrafficParticipant {
  std::string participant_type = repo::kNone;
  std::string position_relation = repo::kNone;
  std::string longitudinal_oracle = repo::kNone;
  std::string lateral_oracle = repo::kNone;
  std::string global_behavior = repo::kNone;
  int count = 1;

  bool operator==(const TrafficParticipant&) const = default;
};

// The structured 6-tier, 17-slot element dictionary bridging description text
// and scenario assembly. Absent elements hold the "none" sentinel.
struct ScenarioRepresentation {
  struct RoadTopology {
    std::string topology = repo::kNone;
    std::string lanes = repo::kNone;
    bool operator==(const RoadTopology&) const = default;
  } road_topology;

  struct TransportationFacilities {
    std::string road_marker = repo::kNone;
    std::string traffic_sign = repo::kNone;
    bool operator==(const TransportationFacilities&) const = default;
  } transportation_facilities;

  struct TemporaryChanges {
    std::string change_type = repo::kNone;
    std::string position_relation = repo::kNone;
    bool operator==(const TemporaryChanges&) const = default;
  } temporary_changes;

  std::vector<TrafficParticipant> traffic_participants;

  struct Climate {
    std::string weather_type = repo::kNone;
    std::string density = repo::kNone;
    std::string time_of_day = repo::kNone;
    bool operator==(const Climate&) const = default;
  } climate;

  struct EgoVehicle {
    std::string vehicle_type = repo::kNone;
    std::string position = repo::kNone;
    std::string global_behavior = repo::kNone;
    bool operator==(const EgoVehicle&) const = default;
  } ego_vehicle;

  std::string source_text;

  bool operator==(const ScenarioRepresentation&) const = default;
};

// The 17 slot names of the repository, in canonical declaration order.
const std::vector<std::string>& slot_names();

// Reads/writes a non-participant slot by name ("RT.topology", "C.density", ...).
// Participant slots ("TP.*") address one participant entry.
std::string get_slot(const ScenarioRepresentation& r, const std::string& slot_name);
void set_slot(ScenarioRepresentation& r, const std::string& slot_name,
              const std::string& value);
std::string get_participant_slot(const TrafficParticipant& p, const std::string& slot_name);
void set_participant_slot(TrafficParticipant& p, const std::string& slot_name,
                          const std::string& value);
bool is_participant_slot(const std::string& slot_name);

enum class Severity { Contradiction, Warning };

struct ConsistencyFinding {
  std::string rule_id;
  Severity severity;
  std::string message;
  std::vector<std::string> slots_involved;
};

bool has_contradiction(const std::vector<ConsistencyFinding>& findings);

// A registered consistency rule; the predicate is data, loaded from JSON.
struct Rule;
class RuleSet {
public:
  static RuleSet from_file(const std::string& path);
  static RuleSet from_json_text(const std::string& text);
  static RuleSet builtin();  // the four mandatory bundled rules

  RuleSet();
  RuleSet(const RuleSet&);
  RuleSet(RuleSet&&) noexcept;
  RuleSet& operator=(const RuleSet&);
  RuleSet& operator=(RuleSet&&) noexcept;
  ~RuleSet();

  size_t size() const;
  const std::vector<Rule>& rules() const;

private:
  std::vector<Rule>* rules_;
};

// Evaluates all registered rules, emitting findings ordered by the highest
// tier priority a rule touches (then rule declaration order). An empty result
// means the representation is assembly-ready.
std::vector<ConsistencyFinding> validate(const ScenarioRepresentation& r,
                                         const repo::RepositoryConfig& config,
                                         const RuleSet& rules);

// JSON serialization with fixed key order (tier priority order) so golden
// files are byte-stable. Round-trip identity holds on valid values.
std::string serialize(const ScenarioRepresentation& r);
ScenarioRepresentation deserialize(const std::string& bytes);

}  // namespace scenforge::rep

#endif  // SCENFORGE_REPRESENTATION_HPP
