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

#include "scenforge/representation.hpp"

#include <algorithm>
#include <json.hpp>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::rep {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::vector<std::string>& slot_names() {
  static const std::vector<std::string> kNames = {
      "RT.topology",       "RT.lanes",
      "TF.road_marker",    "TF.traffic_sign",
      "TC.type",           "TC.position_relation",
      "TP.type",           "TP.position_relation",
      "TP.longitudinal_oracle", "TP.lateral_oracle", "TP.global_behavior",
      "C.type",            "C.density",          "C.time",
      "EV.type",           "EV.position",        "EV.global_behavior",
  };
  return kNames;
}

bool is_participant_slot(const std::string& slot_name) {
  return slot_name.rfind("TP.", 0) == 0;
}

std::string get_slot(const ScenarioRepresentation& r, const std::string& slot_name) {
  if (slot_name == "RT.topology") return r.road_topology.topology;
  if (slot_name == "RT.lanes") return r.road_topology.lanes;
  if (slot_name == "TF.road_marker") return r.transportation_facilities.road_marker;
  if (slot_name == "TF.traffic_sign") return r.transportation_facilities.traffic_sign;
  if (slot_name == "TC.type") return r.temporary_changes.change_type;
  if (slot_name == "TC.position_relation") return r.temporary_changes.position_relation;
  if (slot_name == "C.type") return r.climate.weather_type;
  if (slot_name == "C.density") return r.climate.density;
  if (slot_name == "C.time") return r.climate.time_of_day;
  if (slot_name == "EV.type") return r.ego_vehicle.vehicle_type;
  if (slot_name == "EV.position") return r.ego_vehicle.position;
  if (slot_name == "EV.global_behavior") return r.ego_vehicle.global_behavior;
  throw SchemaError("unknown or participant slot '" + slot_name + "'");
}

void set_slot(ScenarioRepresentation& r, const std::string& slot_name,
              const std::string& value) {
  if (slot_name == "RT.topology") r.road_topology.topology = value;
  else if (slot_name == "RT.lanes") r.road_topology.lanes = value;
  else if (slot_name == "TF.road_marker") r.transportation_facilities.road_marker = value;
  else if (slot_name == "TF.traffic_sign") r.transportation_facilities.traffic_sign = value;
  else if (slot_name == "TC.type") r.temporary_changes.change_type = value;
  else if (slot_name == "TC.position_relation") r.temporary_changes.position_relation = value;
  else if (slot_name == "C.type") r.climate.weather_type = value;
  else if (slot_name == "C.density") r.climate.density = value;
  else if (slot_name == "C.time") r.climate.time_of_day = value;
  else if (slot_name == "EV.type") r.ego_vehicle.vehicle_type = value;
  else if (slot_name == "EV.position") r.ego_vehicle.position = value;
  else if (slot_name == "EV.global_behavior") r.ego_vehicle.global_behavior = value;
  else throw SchemaError("unknown or participant slot '" + slot_name + "'");
}

std::string get_participant_slot(const TrafficParticipant& p, const std::string& slot_name) {
  if (slot_name == "TP.type") return p.participant_type;
  if (slot_name == "TP.position_relation") return p.position_relation;
  if (slot_name == "TP.longitudinal_oracle") return p.longitudinal_oracle;
  if (slot_name == "TP.lateral_oracle") return p.lateral_oracle;
  if (slot_name == "TP.global_behavior") return p.global_behavior;
  throw SchemaError("unknown participant slot '" + slot_name + "'");
}

void set_participant_slot(TrafficParticipant& p, const std::string& slot_name,
                          const std::string& value) {
  if (slot_name == "TP.type") p.participant_type = value;
  else if (slot_name == "TP.position_relation") p.position_relation = value;
  else if (slot_name == "TP.longitudinal_oracle") p.longitudinal_oracle = value;
  else if (slot_name == "TP.lateral_oracle") p.lateral_oracle = value;
  else if (slot_name == "TP.global_behavior") p.global_behavior = value;
  else throw SchemaError("unknown participant slot '" + slot_name + "'");
}

bool has_contradiction(const std::vector<ConsistencyFinding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const ConsistencyFinding& f) {
    return f.severity == Severity::Contradiction;
  });
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

namespace {

// Predicate expression tree over slot values. Participant slots quantify
// existentially over the participant list.
struct Predicate {
  enum class Kind { All, Any, Not, Eq, In, NovelInClosed } kind;
  std::vector<Predicate> operands;       // All/Any/Not
  std::string slot;                      // Eq/In
  std::vector<std::string> values;       // Eq (1 value) / In

  static Predicate parse(const json& j);
  bool eval(const ScenarioRepresentation& r, const repo::RepositoryConfig& config) const;
};

Predicate Predicate::parse(const json& j) {
  Predicate p;
  if (j.contains("all")) {
    p.kind = Kind::All;
    for (const auto& sub : j.at("all")) p.operands.push_back(parse(sub));
  } else if (j.contains("any")) {
    p.kind = Kind::Any;
    for (const auto& sub : j.at("any")) p.operands.push_back(parse(sub));
  } else if (j.contains("not")) {
    p.kind = Kind::Not;
    p.operands.push_back(parse(j.at("not")));
  } else if (j.contains("novel_in_closed")) {
    p.kind = Kind::NovelInClosed;
  } else if (j.contains("slot")) {
    p.slot = j.at("slot").get<std::string>();
    if (j.contains("eq")) {
      p.kind = Kind::Eq;
      p.values.push_back(j.at("eq").get<std::string>());
    } else if (j.contains("in")) {
      p.kind = Kind::In;
      for (const auto& v : j.at("in")) p.values.push_back(v.get<std::string>());
    } else {
      throw ParseError("rule predicate: slot clause needs 'eq' or 'in'");
    }
  } else {
    throw ParseError("rule predicate: unknown clause " + j.dump());
  }
  return p;
}

bool value_matches(const std::string& value, Predicate::Kind kind,
                   const std::vector<std::string>& targets) {
  if (kind == Predicate::Kind::Eq) return value == targets.front();
  return std::find(targets.begin(), targets.end(), value) != targets.end();
}

bool Predicate::eval(const ScenarioRepresentation& r,
                     const repo::RepositoryConfig& config) const {
  switch (kind) {
    case Kind::All:
      return std::all_of(operands.begin(), operands.end(),
                         [&](const Predicate& p) { return p.eval(r, config); });
    case Kind::Any:
      return std::any_of(operands.begin(), operands.end(),
                         [&](const Predicate& p) { return p.eval(r, config); });
    case Kind::Not:
      return !operands.front().eval(r, config);
    case Kind::Eq:
    case Kind::In:
      if (is_participant_slot(slot)) {
        return std::any_of(r.traffic_participants.begin(), r.traffic_participants.end(),
                           [&](const TrafficParticipant& p) {
                             return value_matches(get_participant_slot(p, slot), kind, values);
                           });
      }
      return value_matches(get_slot(r, slot), kind, values);
    case Kind::NovelInClosed: {
      for (const std::string& name : slot_names()) {
        const repo::ElementSlot* es = config.find_slot(name);
        if (!es || es->allows_novel) continue;
        if (is_participant_slot(name)) {
          for (const TrafficParticipant& p : r.traffic_participants) {
            if (!repo::is_canonical(
                    repo::canonicalize(config, *es, get_participant_slot(p, name))))
              return true;
          }
        } else if (!repo::is_canonical(repo::canonicalize(config, *es, get_slot(r, name)))) {
          return true;
        }
      }
      return false;
    }
  }
  return false;
}

}  // namespace

struct Rule {
  std::string rule_id;
  Severity severity;
  std::string message;
  std::vector<std::string> slots_involved;
  Predicate predicate;
};

RuleSet::RuleSet() : rules_(new std::vector<Rule>()) {}
RuleSet::RuleSet(const RuleSet& o) : rules_(new std::vector<Rule>(*o.rules_)) {}
RuleSet::RuleSet(RuleSet&& o) noexcept : rules_(o.rules_) { o.rules_ = nullptr; }
RuleSet& RuleSet::operator=(const RuleSet& o) {
  if (this != &o) *rules_ = *o.rules_;
  return *this;
}
RuleSet& RuleSet::operator=(RuleSet&& o) noexcept {
  std::swap(rules_, o.rules_);
  return *this;
}
RuleSet::~RuleSet() { delete rules_; }

size_t RuleSet::size() const { return rules_->size(); }
const std::vector<Rule>& RuleSet::rules() const { return *rules_; }

RuleSet RuleSet::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("rules: ") + e.what());
  }
  RuleSet set;
  try {
    for (const auto& jr : doc.at("rules")) {
      Rule rule;
      rule.rule_id = jr.at("rule_id").get<std::string>();
      const std::string sev = jr.at("severity").get<std::string>();
      if (sev == "Contradiction") rule.severity = Severity::Contradiction;
      else if (sev == "Warning") rule.severity = Severity::Warning;
      else throw ParseError("rules: unknown severity '" + sev + "'");
      rule.message = jr.at("message").get<std::string>();
      for (const auto& s : jr.at("slots")) rule.slots_involved.push_back(s.get<std::string>());
      rule.predicate = Predicate::parse(jr.at("when"));
      set.rules_->push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("rules: ") + e.what());
  }
  return set;
}

RuleSet RuleSet::from_file(const std::string& path) {
  return from_json_text(util::read_file(path));
}

RuleSet RuleSet::builtin() {
  static const char* kBuiltin = R"JSON({
  "rules": [
    {
      "rule_id": "R1",
      "severity": "Contradiction",
      "message": "broken line marking is not used at an intersection",
      "slots": ["RT.topology", "TF.road_marker"],
      "when": {"all": [
        {"slot": "RT.topology", "eq": "intersection"},
        {"slot": "TF.road_marker", "eq": "broken_line"}
      ]}
    },
    {
      "rule_id": "R2",
      "severity": "Warning",
      "message": "a participant changes lane across a solid marking",
      "slots": ["TF.road_marker", "TP.lateral_oracle"],
      "when": {"all": [
        {"slot": "TP.lateral_oracle",
         "in": ["change_lane", "change_lane_left", "change_lane_right"]},
        {"slot": "TF.road_marker", "in": ["solid_line", "double_solid_line"]}
      ]}
    },
    {
      "rule_id": "R3",
      "severity": "Warning",
      "message": "traffic light placed away from an intersection or T-junction",
      "slots": ["TF.traffic_sign", "RT.topology"],
      "when": {"all": [
        {"slot": "TF.traffic_sign", "eq": "traffic_light"},
        {"not": {"slot": "RT.topology", "in": ["intersection", "t_junction"]}}
      ]}
    },
    {
      "rule_id": "R4",
      "severity": "Contradiction",
      "message": "novel value in a closed slot",
      "slots": ["*"],
      "when": {"novel_in_closed": true}
    }
  ]
})JSON";
  return from_json_text(kBuiltin);
}

std::vector<ConsistencyFinding> validate(const ScenarioRepresentation& r,
                                         const repo::RepositoryConfig& config,
                                         const RuleSet& rules) {
  // Rank each rule by the highest-priority tier it touches so findings come
  // out in repository priority order.
  auto slot_rank = [&config](const std::string& slot_name) {
    if (slot_name == "*") return 0;
    const repo::ElementSlot* s = config.find_slot(slot_name);
    return s ? config.tier_priority(s->tier) : 99;
  };
  std::vector<std::pair<int, const Rule*>> ranked;
  int decl = 0;
  for (const Rule& rule : rules.rules()) {
    int best = 99;
    for (const std::string& s : rule.slots_involved) best = std::min(best, slot_rank(s));
    ranked.emplace_back(best * 1000 + decl++, &rule);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<ConsistencyFinding> findings;
  for (const auto& [rank, rule] : ranked) {
    (void)rank;
    if (rule->predicate.eval(r, config)) {
      findings.push_back({rule->rule_id, rule->severity, rule->message,
                          rule->slots_involved});
    }
  }
  return findings;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json participant_to_json(const TrafficParticipant& p) {
  ordered_json j;
  j["participant_type"] = p.participant_type;
  j["position_relation"] = p.position_relation;
  j["longitudinal_oracle"] = p.longitudinal_oracle;
  j["lateral_oracle"] = p.lateral_oracle;
  j["global_behavior"] = p.global_behavior;
  j["count"] = p.count;
  return j;
}

std::string require_string(const json& obj, const std::string& section,
                           const std::string& key) {
  if (!obj.contains(key)) {
    throw SchemaError("representation: missing key '" + section + "." + key + "'");
  }
  if (!obj.at(key).is_string()) {
    throw SchemaError("representation: key '" + section + "." + key +
                      "' must be a string");
  }
  return obj.at(key).get<std::string>();
}

}  // namespace

std::string serialize(const ScenarioRepresentation& r) {
  ordered_json j;
  j["climate"] = {{"weather_type", r.climate.weather_type},
                  {"density", r.climate.density},
                  {"time_of_day", r.climate.time_of_day}};
  j["road_topology"] = {{"topology", r.road_topology.topology},
                        {"lanes", r.road_topology.lanes}};
  j["transportation_facilities"] = {
      {"road_marker", r.transportation_facilities.road_marker},
      {"traffic_sign", r.transportation_facilities.traffic_sign}};
  j["temporary_changes"] = {{"change_type", r.temporary_changes.change_type},
                            {"position_relation", r.temporary_changes.position_relation}};
  j["ego_vehicle"] = {{"vehicle_type", r.ego_vehicle.vehicle_type},
                      {"position", r.ego_vehicle.position},
                      {"global_behavior", r.ego_vehicle.global_behavior}};
  j["traffic_participants"] = ordered_json::array();
  for (const TrafficParticipant& p : r.traffic_participants) {
    j["traffic_participants"].push_back(participant_to_json(p));
  }
  j["source_text"] = r.source_text;
  return j.dump(2) + "\n";
}

ScenarioRepresentation deserialize(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("representation: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("representation: top level must be an object");

  static const std::vector<std::string> kRequired = {
      "climate", "road_topology", "transportation_facilities",
      "temporary_changes", "ego_vehicle", "traffic_participants"};
  for (const std::string& key : kRequired) {
    if (!doc.contains(key)) throw SchemaError("representation: missing key '" + key + "'");
  }
  for (const auto& [key, val] : doc.items()) {
    (void)val;
    if (std::find(kRequired.begin(), kRequired.end(), key) == kRequired.end() &&
        key != "source_text") {
      throw SchemaError("representation: unknown key '" + key + "'");
    }
  }

  ScenarioRepresentation r;
  const json& climate = doc.at("climate");
  r.climate.weather_type = require_string(climate, "climate", "weather_type");
  r.climate.density = require_string(climate, "climate", "density");
  r.climate.time_of_day = require_string(climate, "climate", "time_of_day");

  const json& rt = doc.at("road_topology");
  r.road_topology.topology = require_string(rt, "road_topology", "topology");
  r.road_topology.lanes = require_string(rt, "road_topology", "lanes");

  const json& tf = doc.at("transportation_facilities");
  r.transportation_facilities.road_marker =
      require_string(tf, "transportation_facilities", "road_marker");
  r.transportation_facilities.traffic_sign =
      require_string(tf, "transportation_facilities", "traffic_sign");

  const json& tc = doc.at("temporary_changes");
  r.temporary_changes.change_type = require_string(tc, "temporary_changes", "change_type");
  r.temporary_changes.position_relation =
      require_string(tc, "temporary_changes", "position_relation");

  const json& ev = doc.at("ego_vehicle");
  r.ego_vehicle.vehicle_type = require_string(ev, "ego_vehicle", "vehicle_type");
  r.ego_vehicle.position = require_string(ev, "ego_vehicle", "position");
  r.ego_vehicle.global_behavior = require_string(ev, "ego_vehicle", "global_behavior");

  if (!doc.at("traffic_participants").is_array()) {
    throw SchemaError("representation: 'traffic_participants' must be an array");
  }
  for (const json& jp : doc.at("traffic_participants")) {
    TrafficParticipant p;
    p.participant_type = require_string(jp, "traffic_participants", "participant_type");
    p.position_relation = require_string(jp, "traffic_participants", "position_relation");
    p.longitudinal_oracle =
        require_string(jp, "traffic_participants", "longitudinal_oracle");
    p.lateral_oracle = require_string(jp, "traffic_participants", "lateral_oracle");
    p.global_behavior = require_string(jp, "traffic_participants", "global_behavior");
    p.count = jp.value("count", 1);
    if (p.count < 1) throw SchemaError("representation: participant count must be >= 1");
    r.traffic_participants.push_back(std::move(p));
  }

  r.source_text = doc.value("source_text", "");
  return r;
}

}  // namespace scenforge::rep
