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

#include "scenforge/xosc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::xosc {

using doc::StandardAction;
using doc::TargetDocument;
using doc::Trigger;
using xml::Node;

namespace {

std::string fd(double v) { return util::format_double(v); }

Node parse_fragment_or_throw(const std::string& text, const std::string& section) {
  try {
    return xml::parse_element(text);
  } catch (const ReadError& e) {
    throw EmitError("section '" + section + "': fragment text is not valid XML: " +
                    e.what());
  }
}

Node trigger_condition(const doc::StoryEvent& event, const std::string& actor_id,
                       const std::string& previous_event_name) {
  Node condition("Condition");
  condition.attr("name", event.name + "_trigger")
      .attr("delay", fd(event.trigger.delay))
      .attr("conditionEdge", "rising");
  switch (event.trigger.kind) {
    case Trigger::Kind::OnStart: {
      Node by("ByValueCondition");
      Node sim("SimulationTimeCondition");
      sim.attr("value", "0.0").attr("rule", "greaterOrEqual");
      by.child(std::move(sim));
      condition.child(std::move(by));
      break;
    }
    case Trigger::Kind::AfterPrevious: {
      Node by("ByValueCondition");
      Node state("StoryboardElementStateCondition");
      state.attr("storyboardElementType", "event")
          .attr("storyboardElementRef", previous_event_name)
          .attr("state", "completeState");
      by.child(std::move(state));
      condition.child(std::move(by));
      break;
    }
    case Trigger::Kind::OnDistanceToEgo: {
      Node by("ByEntityCondition");
      Node triggering("TriggeringEntities");
      triggering.attr("triggeringEntityRule", "any");
      triggering.child(Node("EntityRef").attr("entityRef", "ego"));
      Node entity_condition("EntityCondition");
      Node rel("RelativeDistanceCondition");
      rel.attr("entityRef", actor_id)
          .attr("relativeDistanceType", "cartesianDistance")
          .attr("value", fd(event.trigger.distance))
          .attr("freespace", "false")
          .attr("rule", "lessThan");
      entity_condition.child(std::move(rel));
      by.child(std::move(triggering));
      by.child(std::move(entity_condition));
      condition.child(std::move(by));
      break;
    }
  }
  return condition;
}

Node route_node(const doc::RouteAssignment& assignment) {
  Node route("Route");
  route.attr("name", "route_" + assignment.actor_id).attr("closed", "false");
  const auto& rc = assignment.route;
  for (size_t i = 0; i < rc.lane_path.size(); ++i) {
    Node wp("Waypoint");
    wp.attr("routeStrategy", "shortest");
    Node pos("Position");
    Node lane_pos("LanePosition");
    double s = 0.0;
    if (i == 0) s = assignment.start_s;
    else if (i + 1 == rc.lane_path.size()) s = assignment.end_s;
    lane_pos.attr("roadId", rc.lane_path[i]).attr("laneId", "0").attr("s", fd(s));
    pos.child(std::move(lane_pos));
    wp.child(std::move(pos));
    route.child(std::move(wp));
  }
  return route;
}

}  // namespace

xml::Node build_tree(const TargetDocument& document) {
  document.check_invariants();

  Node root("OpenSCENARIO");

  Node header("FileHeader");
  header.attr("revMajor", "1")
      .attr("revMinor", "1")
      .attr("date", doc::kHeaderDate)
      .attr("description", document.meta.description)
      .attr("author", std::string(doc::kToolName) + " " + doc::kToolVersion)
      .attr("sourceHash", document.meta.source_hash);
  root.child(std::move(header));

  if (!document.parameter_decls.empty()) {
    Node decls("ParameterDeclarations");
    for (const std::string& text : document.parameter_decls) {
      decls.child(parse_fragment_or_throw(text, "parameter_declarations"));
    }
    root.child(std::move(decls));
  }

  Node road("RoadNetwork");
  road.child(parse_fragment_or_throw(document.map_fragment_xml, "road_network"));
  root.child(std::move(road));

  Node entities("Entities");
  for (const doc::Entity& entity : document.entities) {
    Node object("ScenarioObject");
    object.attr("name", entity.actor_id);
    object.child(parse_fragment_or_throw(entity.xml, "entities/" + entity.actor_id));
    entities.child(std::move(object));
  }
  root.child(std::move(entities));

  Node storyboard("Storyboard");

  Node init("Init");
  Node init_actions("Actions");
  if (!document.environment.empty()) {
    Node global("GlobalAction");
    Node env_action("EnvironmentAction");
    Node env("Environment");
    env.attr("name", "environment");
    for (const doc::EnvironmentPart& part : document.environment) {
      env.child(parse_fragment_or_throw(part.xml, "environment/" + part.fragment_id));
    }
    env_action.child(std::move(env));
    global.child(std::move(env_action));
    init_actions.child(std::move(global));
  }
  for (const doc::Entity& entity : document.entities) {
    Node priv("Private");
    priv.attr("entityRef", entity.actor_id);

    Node teleport_private("PrivateAction");
    Node teleport("TeleportAction");
    Node pos("Position");
    Node world("WorldPosition");
    world.attr("x", fd(entity.spawn.x))
        .attr("y", fd(entity.spawn.y))
        .attr("h", fd(entity.spawn.heading));
    pos.child(std::move(world));
    teleport.child(std::move(pos));
    teleport_private.child(std::move(teleport));
    priv.child(std::move(teleport_private));

    Node speed_private("PrivateAction");
    Node longitudinal("LongitudinalAction");
    Node speed("SpeedAction");
    Node dynamics("SpeedActionDynamics");
    dynamics.attr("dynamicsShape", "step").attr("value", "0.0").attr("dynamicsDimension", "time");
    Node target("SpeedActionTarget");
    target.child(Node("AbsoluteTargetSpeed").attr("value", fd(entity.spawn.speed)));
    speed.child(std::move(dynamics));
    speed.child(std::move(target));
    longitudinal.child(std::move(speed));
    speed_private.child(std::move(longitudinal));
    priv.child(std::move(speed_private));

    if (const doc::RouteAssignment* assignment = document.find_route(entity.actor_id)) {
      Node routing_private("PrivateAction");
      Node routing("RoutingAction");
      Node assign("AssignRouteAction");
      assign.child(route_node(*assignment));
      routing.child(std::move(assign));
      routing_private.child(std::move(routing));
      priv.child(std::move(routing_private));
    }
    init_actions.child(std::move(priv));
  }
  init.child(std::move(init_actions));
  storyboard.child(std::move(init));

  Node story("Story");
  story.attr("name", "story");
  Node act("Act");
  act.attr("name", "act");
  for (const doc::ActorStory& actor_story : document.stories) {
    Node group("ManeuverGroup");
    group.attr("name", "mg_" + actor_story.actor_id).attr("maximumExecutionCount", "1");
    Node actors("Actors");
    actors.attr("selectTriggeringEntities", "false");
    actors.child(Node("EntityRef").attr("entityRef", actor_story.actor_id));
    group.child(std::move(actors));
    Node maneuver("Maneuver");
    maneuver.attr("name", "maneuver_" + actor_story.actor_id);
    std::string previous_event_name;
    for (const doc::StoryEvent& event : actor_story.events) {
      Node event_node("Event");
      event_node.attr("name", event.name)
          .attr("priority", "parallel")
          .attr("maximumExecutionCount", "1");
      Node action("Action");
      action.attr("name", event.name + "_action");
      action.child(parse_fragment_or_throw(event.action_xml, "storyboard/" + event.name));
      event_node.child(std::move(action));
      Node start_trigger("StartTrigger");
      Node condition_group("ConditionGroup");
      condition_group.child(trigger_condition(event, actor_story.actor_id, previous_event_name));
      start_trigger.child(std::move(condition_group));
      event_node.child(std::move(start_trigger));
      maneuver.child(std::move(event_node));
      previous_event_name = event.name;
    }
    group.child(std::move(maneuver));
    act.child(std::move(group));
  }
  Node act_start("StartTrigger");
  Node act_cg("ConditionGroup");
  Node act_cond("Condition");
  act_cond.attr("name", "act_start").attr("delay", "0.0").attr("conditionEdge", "rising");
  Node act_by("ByValueCondition");
  act_by.child(Node("SimulationTimeCondition").attr("value", "0.0").attr("rule", "greaterOrEqual"));
  act_cond.child(std::move(act_by));
  act_cg.child(std::move(act_cond));
  act_start.child(std::move(act_cg));
  act.child(std::move(act_start));
  story.child(std::move(act));
  storyboard.child(std::move(story));

  Node stop_trigger("StopTrigger");
  if (!document.monitors.empty()) {
    Node cg("ConditionGroup");
    for (const doc::MonitorCriterion& monitor : document.monitors) {
      cg.child(parse_fragment_or_throw(monitor.xml, "monitors/" + monitor.monitor_id));
    }
    stop_trigger.child(std::move(cg));
  }
  storyboard.child(std::move(stop_trigger));

  root.child(std::move(storyboard));
  return root;
}

std::string emit(const TargetDocument& document) {
  return xml::write_document(build_tree(document));
}

XoscDocument load(const std::string& bytes) {
  XoscDocument out;
  out.root = xml::parse_document(bytes);
  return out;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

struct ElementRule {
  std::vector<std::string> required_attrs;
  // child name -> min occurrences
  std::vector<std::pair<std::string, int>> required_children;
};

const std::map<std::string, ElementRule>& schema_rules() {
  static const std::map<std::string, ElementRule> kRules = {
      {"OpenSCENARIO",
       {{}, {{"FileHeader", 1}, {"RoadNetwork", 1}, {"Entities", 1}, {"Storyboard", 1}}}},
      {"FileHeader", {{"revMajor", "revMinor", "date", "description", "author"}, {}}},
      {"RoadNetwork", {{}, {{"LogicFile", 1}}}},
      {"LogicFile", {{"filepath"}, {}}},
      {"Entities", {{}, {{"ScenarioObject", 1}}}},
      {"ScenarioObject", {{"name"}, {}}},
      {"Vehicle", {{"name", "vehicleCategory"}, {{"BoundingBox", 1}}}},
      {"Pedestrian", {{"name"}, {{"BoundingBox", 1}}}},
      {"MiscObject", {{"name"}, {{"BoundingBox", 1}}}},
      {"BoundingBox", {{}, {{"Center", 1}, {"Dimensions", 1}}}},
      {"Dimensions", {{"width", "length", "height"}, {}}},
      {"Center", {{"x", "y", "z"}, {}}},
      {"Storyboard", {{}, {{"Init", 1}, {"Story", 1}, {"StopTrigger", 1}}}},
      {"Init", {{}, {{"Actions", 1}}}},
      {"Private", {{"entityRef"}, {}}},
      {"Story", {{"name"}, {{"Act", 1}}}},
      {"Act", {{"name"}, {{"ManeuverGroup", 1}, {"StartTrigger", 1}}}},
      {"ManeuverGroup", {{"name", "maximumExecutionCount"}, {{"Actors", 1}, {"Maneuver", 1}}}},
      {"Actors", {{"selectTriggeringEntities"}, {}}},
      {"Maneuver", {{"name"}, {{"Event", 1}}}},
      {"Event", {{"name", "priority"}, {{"Action", 1}, {"StartTrigger", 1}}}},
      {"Action", {{"name"}, {}}},
      {"Condition", {{"name", "delay", "conditionEdge"}, {}}},
      {"ConditionGroup", {{}, {{"Condition", 1}}}},
      {"SimulationTimeCondition", {{"value", "rule"}, {}}},
      {"StoryboardElementStateCondition",
       {{"storyboardElementType", "storyboardElementRef", "state"}, {}}},
      {"ParameterCondition", {{"parameterRef", "value", "rule"}, {}}},
      {"RelativeDistanceCondition",
       {{"entityRef", "relativeDistanceType", "value", "freespace", "rule"}, {}}},
      {"TriggeringEntities", {{"triggeringEntityRule"}, {{"EntityRef", 1}}}},
      {"EntityRef", {{"entityRef"}, {}}},
      {"TeleportAction", {{}, {{"Position", 1}}}},
      {"Position", {{}, {}}},
      {"WorldPosition", {{"x", "y", "h"}, {}}},
      {"LanePosition", {{"roadId", "laneId", "s"}, {}}},
      {"SpeedAction", {{}, {{"SpeedActionDynamics", 1}, {"SpeedActionTarget", 1}}}},
      {"SpeedActionDynamics", {{"dynamicsShape", "value", "dynamicsDimension"}, {}}},
      {"AbsoluteTargetSpeed", {{"value"}, {}}},
      {"LaneChangeAction", {{}, {{"LaneChangeActionDynamics", 1}, {"LaneChangeTarget", 1}}}},
      {"LaneChangeActionDynamics", {{"dynamicsShape", "value", "dynamicsDimension"}, {}}},
      {"RelativeTargetLane", {{"entityRef", "value"}, {}}},
      {"RoutingAction", {{}, {{"AssignRouteAction", 1}}}},
      {"AssignRouteAction", {{}, {{"Route", 1}}}},
      {"Route", {{"name", "closed"}, {{"Waypoint", 1}}}},
      {"Waypoint", {{"routeStrategy"}, {{"Position", 1}}}},
      {"ActivateControllerAction", {{"longitudinal", "lateral"}, {}}},
      {"CustomCommandAction", {{"type"}, {}}},
      {"ParameterDeclarations", {{}, {{"ParameterDeclaration", 1}}}},
      {"ParameterDeclaration", {{"name", "parameterType", "value"}, {}}},
      {"Environment", {{"name"}, {}}},
      {"Weather", {{}, {}}},
      {"Sun", {{"intensity", "azimuth", "elevation"}, {}}},
      {"Precipitation", {{"precipitationType", "intensity"}, {}}},
      {"Fog", {{"visualRange"}, {}}},
      {"TimeOfDay", {{"animation", "dateTime"}, {}}},
      {"Performance", {{"maxSpeed", "maxAcceleration", "maxDeceleration"}, {}}},
  };
  return kRules;
}

const std::set<std::string>& known_elements() {
  static const std::set<std::string> kKnown = [] {
    std::set<std::string> s;
    for (const auto& [name, rule] : schema_rules()) s.insert(name);
    // Containers without their own requirements.
    for (const char* name :
         {"Actions", "GlobalAction", "EnvironmentAction", "PrivateAction",
          "LongitudinalAction", "LateralAction", "SpeedActionTarget",
          "LaneChangeTarget", "StartTrigger", "StopTrigger", "ByValueCondition",
          "ByEntityCondition", "EntityCondition", "ControllerAction",
          "UserDefinedAction"}) {
      s.insert(name);
    }
    return s;
  }();
  return kKnown;
}

void walk_schema(const Node& node, std::vector<SchemaFinding>& findings,
                 std::set<std::string>& entity_names,
                 std::vector<std::pair<std::string, std::string>>& refs) {
  if (!known_elements().count(node.name)) {
    findings.push_back({FindingSeverity::Warning, node.name,
                        "unknown element <" + node.name + ">"});
  } else if (auto it = schema_rules().find(node.name); it != schema_rules().end()) {
    for (const std::string& attr : it->second.required_attrs) {
      if (!node.find_attr(attr)) {
        findings.push_back({FindingSeverity::Error, node.name,
                            "<" + node.name + "> is missing required attribute '" +
                                attr + "'"});
      }
    }
    for (const auto& [child_name, min_count] : it->second.required_children) {
      int count = static_cast<int>(node.find_children(child_name).size());
      if (count < min_count) {
        findings.push_back({FindingSeverity::Error, node.name,
                            "<" + node.name + "> requires " + std::to_string(min_count) +
                                " <" + child_name + "> child(ren), found " +
                                std::to_string(count)});
      }
    }
  }
  if (node.name == "ScenarioObject") {
    if (const std::string* name = node.find_attr("name")) entity_names.insert(*name);
  }
  if (const std::string* ref = node.find_attr("entityRef")) {
    refs.emplace_back(node.name, *ref);
  }
  for (const Node& child : node.children) {
    walk_schema(child, findings, entity_names, refs);
  }
}

}  // namespace

std::vector<SchemaFinding> verify(const std::string& bytes) {
  std::vector<SchemaFinding> findings;
  XoscDocument document;
  try {
    document = load(bytes);
  } catch (const ReadError& e) {
    findings.push_back({FindingSeverity::Error, "(document)", e.what()});
    return findings;
  }
  if (document.root.name != "OpenSCENARIO") {
    findings.push_back({FindingSeverity::Error, document.root.name,
                        "root element must be <OpenSCENARIO>"});
    return findings;
  }
  std::set<std::string> entity_names;
  std::vector<std::pair<std::string, std::string>> refs;
  walk_schema(document.root, findings, entity_names, refs);
  for (const auto& [element, ref] : refs) {
    if (!entity_names.count(ref)) {
      findings.push_back({FindingSeverity::Error, element,
                          "entityRef '" + ref + "' does not resolve to a ScenarioObject"});
    }
  }
  return findings;
}

bool has_schema_errors(const std::vector<SchemaFinding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const SchemaFinding& f) {
    return f.severity == FindingSeverity::Error;
  });
}

// ---------------------------------------------------------------------------
// import
// ---------------------------------------------------------------------------

namespace {

double attr_double(const Node& node, const std::string& key, double fallback = 0.0) {
  const std::string* raw = node.find_attr(key);
  if (!raw) return fallback;
  double v = fallback;
  auto res = std::from_chars(raw->data(), raw->data() + raw->size(), v);
  if (res.ec != std::errc()) return fallback;
  return v;
}

std::string snippet(const Node& node) {
  std::string text = xml::write_element(node);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

std::string map_id_from_path(const std::string& filepath) {
  std::string base = filepath;
  size_t slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  const std::string suffix = ".map.json";
  if (base.size() > suffix.size() && base.ends_with(suffix)) {
    base = base.substr(0, base.size() - suffix.size());
  }
  return base;
}

Trigger import_trigger(const Node& condition, double* out_delay_holder) {
  Trigger trig;
  trig.delay = attr_double(condition, "delay", 0.0);
  (void)out_delay_holder;
  if (const Node* by_value = condition.find_child("ByValueCondition")) {
    if (by_value->find_child("SimulationTimeCondition")) {
      trig.kind = Trigger::Kind::OnStart;
    } else if (by_value->find_child("StoryboardElementStateCondition")) {
      trig.kind = Trigger::Kind::AfterPrevious;
    }
  } else if (const Node* by_entity = condition.find_child("ByEntityCondition")) {
    if (const Node* rel = by_entity->find_descendant("RelativeDistanceCondition")) {
      trig.kind = Trigger::Kind::OnDistanceToEgo;
      trig.distance = attr_double(*rel, "value", 0.0);
    }
  }
  return trig;
}

StandardAction action_from_event_name(const std::string& event_name) {
  // Event names end with "_ev<k>_<action>"; scan the known names for the
  // longest suffix match.
  StandardAction best = StandardAction::Autopilot;
  size_t best_len = 0;
  for (StandardAction a :
       {StandardAction::Accelerate, StandardAction::Decelerate, StandardAction::Cruise,
        StandardAction::Yield, StandardAction::ChangeLane, StandardAction::ChangeLaneLeft,
        StandardAction::ChangeLaneRight, StandardAction::KeepLane, StandardAction::Stop,
        StandardAction::Autopilot}) {
    const std::string suffix = std::string("_") + doc::standard_action_str(a);
    if (event_name.size() >= suffix.size() && event_name.ends_with(suffix) &&
        suffix.size() > best_len) {
      best = a;
      best_len = suffix.size();
    }
  }
  if (best_len == 0) {
    throw SchemaError("xosc import: cannot infer action from event name '" +
                      event_name + "'");
  }
  return best;
}

void fill_event_params(doc::StoryEvent& event, const Node& payload) {
  if (const Node* speed = payload.find_descendant("SpeedAction")) {
    if (const Node* target = speed->find_descendant("AbsoluteTargetSpeed")) {
      event.params["target_speed"] = attr_double(*target, "value", 0.0);
    }
    if (const Node* dynamics = speed->find_child("SpeedActionDynamics")) {
      event.params["duration"] = attr_double(*dynamics, "value", 0.0);
    }
  }
  if (const Node* lane_change = payload.find_descendant("LaneChangeAction")) {
    if (const Node* target = lane_change->find_descendant("RelativeTargetLane")) {
      event.params["direction"] = attr_double(*target, "value", 1.0);
    }
    if (const Node* dynamics = lane_change->find_child("LaneChangeActionDynamics")) {
      event.params["duration"] = attr_double(*dynamics, "value", 2.0);
    }
  }
  if (const Node* custom = payload.find_descendant("CustomCommandAction")) {
    // text payload of the form "key=value;key=value"
    for (const std::string& part : util::split(custom->text, ';')) {
      auto kv = util::split(part, '=');
      if (kv.size() == 2) {
        double v = 0.0;
        auto res = std::from_chars(kv[1].data(), kv[1].data() + kv[1].size(), v);
        if (res.ec == std::errc()) event.params[util::trim(kv[0])] = v;
      }
    }
  }
}

}  // namespace

TargetDocument import_document(const XoscDocument& document,
                               const corpus::DslCorpus& corpus) {
  const Node& root = document.root;
  if (root.name != "OpenSCENARIO") {
    throw SchemaError("xosc import: root element must be <OpenSCENARIO>");
  }
  TargetDocument out;

  if (const Node* header = root.find_child("FileHeader")) {
    if (const std::string* d = header->find_attr("description")) out.meta.description = *d;
    if (const std::string* h = header->find_attr("sourceHash")) out.meta.source_hash = *h;
    out.meta.name = "imported";
  } else {
    throw SchemaError("xosc import: missing FileHeader");
  }

  const Node* road = root.find_child("RoadNetwork");
  const Node* logic = road ? road->find_child("LogicFile") : nullptr;
  if (!logic || !logic->find_attr("filepath")) {
    throw SchemaError("xosc import: missing RoadNetwork/LogicFile");
  }
  out.map_id = map_id_from_path(*logic->find_attr("filepath"));
  out.map_fragment_xml = snippet(*logic);
  const corpus::MiniMap* map = corpus.find_map(out.map_id);
  if (!map) {
    throw MapMismatchError("scenario references map '" + out.map_id +
                           "' which is not in the corpus");
  }

  std::set<std::string> priority_actors;
  if (const Node* decls = root.find_child("ParameterDeclarations")) {
    for (const Node& decl : decls->children) {
      out.parameter_decls.push_back(snippet(decl));
      const std::string* name = decl.find_attr("name");
      const std::string* value = decl.find_attr("value");
      if (name && value && *name == "road_marker") out.road_marker = *value;
      if (name && value && *name == "priority_actors") {
        for (const std::string& actor : util::split(*value, ' ')) {
          if (!actor.empty()) priority_actors.insert(actor);
        }
      }
    }
  }

  const Node* entities = root.find_child("Entities");
  if (!entities) throw SchemaError("xosc import: missing Entities");
  for (const Node* object_ptr : entities->find_children("ScenarioObject")) {
    const Node& object = *object_ptr;
    doc::Entity entity;
    if (const std::string* name = object.find_attr("name")) entity.actor_id = *name;
    if (object.children.empty()) {
      throw SchemaError("xosc import: ScenarioObject '" + entity.actor_id +
                        "' has no object definition");
    }
    const Node& body = object.children.front();
    entity.xml = snippet(body);
    if (body.name == "Vehicle") {
      if (const std::string* cat = body.find_attr("vehicleCategory")) entity.category = *cat;
    } else if (body.name == "Pedestrian") {
      entity.category = "pedestrian";
    } else {
      entity.category = "misc";
    }
    if (const Node* dims = body.find_descendant("Dimensions")) {
      entity.length = attr_double(*dims, "length", entity.length);
      entity.width = attr_double(*dims, "width", entity.width);
    }
    entity.is_ego = entity.actor_id == "ego";
    entity.priority = priority_actors.count(entity.actor_id) > 0;
    out.entities.push_back(std::move(entity));
  }

  const Node* storyboard = root.find_child("Storyboard");
  if (!storyboard) throw SchemaError("xosc import: missing Storyboard");

  if (const Node* init = storyboard->find_child("Init")) {
    const Node* actions = init->find_child("Actions");
    if (actions) {
      if (const Node* env = actions->find_descendant("Environment")) {
        for (const Node& part : env->children) {
          out.environment.push_back({"", snippet(part)});
        }
      }
      for (const Node* priv : actions->find_children("Private")) {
        const std::string* ref = priv->find_attr("entityRef");
        if (!ref) continue;
        doc::Entity* entity = nullptr;
        for (doc::Entity& e : out.entities) {
          if (e.actor_id == *ref) entity = &e;
        }
        if (!entity) {
          throw SchemaError("xosc import: Init references unknown entity '" + *ref + "'");
        }
        if (const Node* world = priv->find_descendant("WorldPosition")) {
          entity->spawn.x = attr_double(*world, "x");
          entity->spawn.y = attr_double(*world, "y");
          entity->spawn.heading = attr_double(*world, "h");
        }
        if (const Node* speed = priv->find_descendant("AbsoluteTargetSpeed")) {
          entity->spawn.speed = attr_double(*speed, "value");
        }
        if (const Node* route = priv->find_descendant("Route")) {
          doc::RouteAssignment assignment;
          assignment.actor_id = *ref;
          corpus::RouteCandidate& rc = assignment.route;
          rc.map_id = out.map_id;
          rc.actor_role = *ref == "ego" ? corpus::ActorRole::Ego
                                        : corpus::ActorRole::Participant;
          std::vector<std::pair<std::string, double>> waypoints;
          for (const Node* wp : route->find_children("Waypoint")) {
            if (const Node* lane_pos = wp->find_descendant("LanePosition")) {
              const std::string* lane_id = lane_pos->find_attr("roadId");
              if (lane_id) waypoints.emplace_back(*lane_id, attr_double(*lane_pos, "s"));
            }
          }
          if (waypoints.empty()) {
            throw SchemaError("xosc import: route for '" + *ref + "' has no waypoints");
          }
          for (const auto& [lane_id, s] : waypoints) {
            if (!map->find_lane(lane_id)) {
              throw MapMismatchError("route lane '" + lane_id + "' is not on map '" +
                                     out.map_id + "'");
            }
            rc.lane_path.push_back(lane_id);
          }
          // Arc position -> waypoint index: start/end always sit on lane
          // waypoints, so the nearest cumulative_s entry is an exact match.
          auto index_near_s = [&](const std::string& lane_id, double s) {
            const corpus::Lane& lane = map->lane(lane_id);
            int best = 0;
            double best_d = 1e18;
            for (size_t i = 0; i < lane.cumulative_s.size(); ++i) {
              double d = std::abs(lane.cumulative_s[i] - s);
              if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
              }
            }
            return best;
          };
          rc.start = {waypoints.front().first,
                      index_near_s(waypoints.front().first, waypoints.front().second)};
          rc.end = {waypoints.back().first,
                    index_near_s(waypoints.back().first, waypoints.back().second)};
          assignment.start_s = map->lane(rc.start.lane_id)
                                   .cumulative_s[static_cast<size_t>(rc.start.index)];
          assignment.end_s =
              map->lane(rc.end.lane_id).cumulative_s[static_cast<size_t>(rc.end.index)];
          rc.label = corpus::route_label(*map, rc.lane_path, rc.start, rc.end);
          std::vector<corpus::Vec2> polyline = corpus::route_polyline(*map, rc);
          rc.length = 0.0;
          for (size_t i = 1; i < polyline.size(); ++i) {
            rc.length += corpus::norm(polyline[i] - polyline[i - 1]);
          }
          // Spawn arc position from the route start.
          const corpus::Lane& lane = map->lane(rc.start.lane_id);
          entity->spawn.lane_id = rc.start.lane_id;
          entity->spawn.s = lane.cumulative_s[static_cast<size_t>(rc.start.index)];
          out.routes.push_back(std::move(assignment));
        }
      }
    }
  }
  // Entities without routes: project the spawn pose onto the map.
  for (doc::Entity& entity : out.entities) {
    if (entity.spawn.lane_id.empty()) {
      double best_d = 1e18;
      for (const corpus::Lane& lane : map->lanes) {
        auto [s, d] = lane.nearest({entity.spawn.x, entity.spawn.y});
        if (d < best_d) {
          best_d = d;
          entity.spawn.lane_id = lane.id;
          entity.spawn.s = s;
        }
      }
    }
  }

  for (const Node* story : storyboard->find_children("Story")) {
    for (const Node* act : story->find_children("Act")) {
      for (const Node* group : act->find_children("ManeuverGroup")) {
        const Node* actors = group->find_child("Actors");
        const Node* entity_ref = actors ? actors->find_child("EntityRef") : nullptr;
        if (!entity_ref || !entity_ref->find_attr("entityRef")) continue;
        doc::ActorStory actor_story;
        actor_story.actor_id = *entity_ref->find_attr("entityRef");
        for (const Node* maneuver : group->find_children("Maneuver")) {
          for (const Node* event_node : maneuver->find_children("Event")) {
            doc::StoryEvent event;
            if (const std::string* name = event_node->find_attr("name")) event.name = *name;
            event.action = action_from_event_name(event.name);
            const Node* action = event_node->find_child("Action");
            if (!action || action->children.empty()) {
              throw SchemaError("xosc import: event '" + event.name + "' has no action");
            }
            event.action_xml = snippet(action->children.front());
            fill_event_params(event, action->children.front());
            if (const Node* trigger = event_node->find_child("StartTrigger")) {
              if (const Node* condition = trigger->find_descendant("Condition")) {
                event.trigger = import_trigger(*condition, nullptr);
              }
            }
            actor_story.events.push_back(std::move(event));
          }
        }
        out.stories.push_back(std::move(actor_story));
      }
    }
  }

  if (const Node* stop = storyboard->find_child("StopTrigger")) {
    for (const Node* cg : stop->find_children("ConditionGroup")) {
      for (const Node* condition : cg->find_children("Condition")) {
        const std::string* name = condition->find_attr("name");
        if (!name || name->rfind("criteria_", 0) != 0) continue;
        doc::MonitorCriterion criterion;
        criterion.monitor_id = name->substr(std::string("criteria_").size());
        criterion.xml = snippet(*condition);
        if (const Node* param = condition->find_descendant("ParameterCondition")) {
          criterion.value = attr_double(*param, "value", 0.0);
        }
        out.monitors.push_back(std::move(criterion));
      }
    }
  }

  return out;
}

}  // namespace scenforge::xosc
