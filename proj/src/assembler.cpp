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

#include "scenforge/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"
#include "scenforge/xml.hpp"

namespace scenforge::assembler {

using corpus::Lane;
using corpus::MiniMap;
using corpus::RouteCandidate;
using corpus::Vec2;
using doc::StandardAction;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Numeric defaults of the logical -> concrete step. All overridable through
// corpus param defaults; collected here so the policy reads in one place.
namespace defaults {
constexpr double kGap = 20.0;                // front/behind spacing, m
constexpr double kReplicaSpacing = 12.0;     // queue spacing for count > 1, m
constexpr double kSpeedFraction = 0.8;       // initial speed = fraction * limit
constexpr double kSpeedDelta = 5.0;          // accelerate/decelerate delta, m/s
constexpr double kSpeedDuration = 3.0;       // over this horizon, s
constexpr double kLaneChangeDuration = 2.0;  // s
constexpr double kCruiseDuration = 5.0;      // s
constexpr double kKeepLaneDuration = 4.0;    // s
constexpr double kStopHold = 1.5;            // standstill before next event, s
constexpr double kTriggerDistance = 30.0;    // OnDistanceToEgo, m
constexpr double kSceneryGap = 10.0;         // temporary-change placement, m
constexpr double kEgoSpawnS = 30.0;          // preferred ego arc position, m
constexpr double kPedestrianSpeed = 1.4;     // m/s
}  // namespace defaults

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

DecompositionTable DecompositionTable::builtin() {
  static const char* kBuiltin = R"JSON({
  "overtake": ["change_lane", "accelerate", "change_lane", "cruise"],
  "cut_in": ["accelerate", "change_lane_right", "cruise", "decelerate"],
  "yield": ["decelerate", "stop", "cruise"],
  "go_forward": ["autopilot"],
  "turn_left": ["autopilot"],
  "turn_right": ["autopilot"],
  "u_turn": ["autopilot"],
  "none": []
})JSON";
  return from_json_text(kBuiltin);
}

DecompositionTable DecompositionTable::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("decomposition table: ") + e.what());
  }
  DecompositionTable table;
  for (const auto& [behavior, actions] : doc.items()) {
    std::vector<StandardAction> list;
    for (const auto& a : actions) {
      StandardAction action;
      if (!doc::standard_action_from_str(a.get<std::string>(), &action)) {
        throw ParseError("decomposition table: '" + behavior +
                         "' maps to unknown action " + a.dump());
      }
      list.push_back(action);
    }
    table.table_[behavior] = std::move(list);
  }
  return table;
}

DecompositionTable DecompositionTable::from_file(const std::string& path) {
  return from_json_text(util::read_file(path));
}

const std::vector<StandardAction>* DecompositionTable::find(
    const std::string& behavior) const {
  auto it = table_.find(behavior);
  return it == table_.end() ? nullptr : &it->second;
}

void DecompositionTable::set(const std::string& behavior,
                             std::vector<StandardAction> actions) {
  table_[behavior] = std::move(actions);
}

namespace {

std::vector<StandardAction> decompose_via_backend(const std::string& behavior,
                                                  pipeline::ModelBackend& backend) {
  std::string prompt =
      "Decompose the driving behavior \"" + behavior +
      "\" into an ordered list of standard maneuvers. Choose only from: "
      "accelerate, decelerate, cruise, yield, change_lane, change_lane_left, "
      "change_lane_right, keep_lane, stop, autopilot. Respond with a JSON array "
      "of maneuver names and nothing else.";
  pipeline::CompletionRequest req;
  req.prompt = prompt;
  req.temperature = 0.0;
  req.fingerprint = pipeline::make_fingerprint("decompose", behavior);
  const std::string raw = backend.complete(req);

  size_t open = raw.find('[');
  size_t close = raw.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw InvalidDecompositionError("decompose('" + behavior +
                                    "'): model response has no JSON array");
  }
  json arr;
  try {
    arr = json::parse(raw.substr(open, close - open + 1));
  } catch (const json::parse_error& e) {
    throw InvalidDecompositionError("decompose('" + behavior + "'): " + e.what());
  }
  std::vector<StandardAction> actions;
  for (const auto& a : arr) {
    StandardAction action;
    if (!a.is_string() || !doc::standard_action_from_str(a.get<std::string>(), &action)) {
      throw InvalidDecompositionError("decompose('" + behavior +
                                      "'): model emitted non-standard action " + a.dump());
    }
    actions.push_back(action);
  }
  if (actions.empty()) {
    throw InvalidDecompositionError("decompose('" + behavior + "'): empty action list");
  }
  return actions;
}

}  // namespace

std::vector<StandardAction> decompose(const std::string& behavior,
                                      const DecompositionTable& table,
                                      pipeline::ModelBackend* backend) {
  if (util::trim(behavior).empty()) {
    throw UnknownBehaviorError("decompose: behavior must be non-empty");
  }
  if (const auto* entry = table.find(behavior)) return *entry;
  StandardAction direct;
  if (doc::standard_action_from_str(behavior, &direct)) return {direct};
  if (backend) return decompose_via_backend(behavior, *backend);
  throw UnknownBehaviorError("decompose: no table entry for behavior '" + behavior +
                             "' and no backend configured");
}

// ---------------------------------------------------------------------------
// position_relative
// ---------------------------------------------------------------------------

LanePoint position_relative(const MiniMap& map, const LanePoint& ego,
                            const std::string& relation, double gap) {
  if (gap <= 0) throw DomainError("position_relative: gap must be > 0");
  const Lane& lane = map.lane(ego.lane_id);

  if (relation == "front" || relation == "behind") {
    double s = ego.s + (relation == "front" ? gap : -gap);
    if (s < 0.0 || s > lane.length) {
      throw OffMapError("position_relative: s=" + util::format_double(s) +
                        " leaves lane '" + ego.lane_id + "' (length " +
                        util::format_double(lane.length) + ")");
    }
    return {ego.lane_id, s};
  }

  if (relation == "left" || relation == "right") {
    const auto& adjacent = relation == "left" ? lane.adjacent_left : lane.adjacent_right;
    if (!adjacent) {
      throw NoAdjacentLaneError("position_relative: lane '" + ego.lane_id +
                                "' has no adjacent-" + relation + " lane");
    }
    const Lane& other = map.lane(*adjacent);
    auto [s, dist] = other.nearest(lane.position_at(ego.s));
    (void)dist;
    return {*adjacent, s};
  }

  if (relation == "opposite") {
    // Closest anti-parallel lane by overall (chord) direction. True opposing
    // approaches rank first: lanes nothing feeds into and that lead somewhere;
    // junction connectors and exit stubs fall back behind them.
    const Vec2 here = lane.position_at(ego.s);
    const Vec2 dir = lane.direction_at(ego.s);
    std::set<std::string> has_predecessor;
    for (const Lane& other : map.lanes) {
      for (const std::string& succ : other.successors) has_predecessor.insert(succ);
    }
    const Lane* best = nullptr;
    double best_key = 1e18;
    for (const Lane& other : map.lanes) {
      if (other.id == ego.lane_id) continue;
      Vec2 chord = other.points.back() - other.points.front();
      double n = corpus::norm(chord);
      if (n <= 0 || corpus::dot(chord * (1.0 / n), dir) >= -0.5) continue;
      auto [s, dist] = other.nearest(here);
      (void)s;
      double key = dist;
      if (has_predecessor.count(other.id)) key += 1e6;
      if (other.successors.empty()) key += 1e6;
      if (key < best_key) {
        best_key = key;
        best = &other;
      }
    }
    if (!best) {
      throw NoAdjacentLaneError("position_relative: map '" + map.map_id +
                                "' has no opposing lane near '" + ego.lane_id + "'");
    }
    // Mirror the ego's remaining distance plus the gap so both actors close
    // in on the same region.
    double remaining = lane.length - ego.s;
    double s = std::max(0.0, best->length - remaining - gap);
    return {best->id, s};
  }

  throw DomainError("position_relative: unknown relation '" + relation + "'");
}

// ---------------------------------------------------------------------------
// assemble
// ---------------------------------------------------------------------------

namespace {

struct Builder {
  const rep::ScenarioRepresentation& r;
  const AssemblyContext& ctx;
  std::uint64_t seed;
  doc::TargetDocument document;
  AssemblyReport report;
  const MiniMap* map = nullptr;
  std::vector<RouteCandidate> route_pool;
  LanePoint ego_point;

  util::RandomStream stream(const std::string& tier) const {
    return util::RandomStream(util::substream_seed(seed, tier));
  }

  void resolved(const std::string& slot, const std::string& choice) {
    report.chosen[slot] = choice;
  }
  void unresolved(const std::string& slot) { report.unresolved_slots.push_back(slot); }
  void note(const std::string& text) { report.notes.push_back(text); }

  // Slot value with sentinel handling: returns fallback and records the slot
  // as unresolved when the representation left it at "none".
  std::string value_or(const std::string& slot, const std::string& value,
                       const std::string& fallback) {
    if (value == repo::kNone) {
      unresolved(slot);
      return fallback;
    }
    return value;
  }

  const corpus::Fragment& single_fragment(const std::string& element,
                                          corpus::FragmentKind kind,
                                          util::RandomStream& rng) {
    auto frags = ctx.corpus.lookup_fragments(element, kind);
    if (frags.empty()) {
      throw SchemaError("assemble: no " + std::string(corpus::fragment_kind_str(kind)) +
                        " fragment provides element '" + element + "'");
    }
    return *frags[static_cast<size_t>(rng.below(frags.size()))];
  }

  void build_climate();
  void build_topology();
  void build_facilities();
  void build_changes();
  void build_ego();
  void build_participants();
  void build_monitors();
  void finish_declarations();

  doc::Entity make_entity(const std::string& actor_id, const corpus::Fragment& frag,
                          const corpus::Bindings& bindings);
  void place_entity(doc::Entity& entity, const LanePoint& point);
  RouteCandidate pick_route_from_lane(const std::string& lane_id, double spawn_s,
                                      const std::string& behavior,
                                      util::RandomStream& rng, std::string* what);
  std::vector<doc::StoryEvent> build_chain(const std::string& actor_id,
                                           const rep::TrafficParticipant& p,
                                           const std::string& spawn_lane,
                                           double initial_speed);
};

std::string route_description(const RouteCandidate& route) {
  std::string out = route.start.lane_id + "->" + route.end.lane_id + " label{";
  bool first = true;
  for (const std::string& l : route.label) {
    if (!first) out += ",";
    out += l;
    first = false;
  }
  out += "}";
  return out;
}

int nearest_index(const Lane& lane, double s) {
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
}

// Point at a signed arc offset from `from`, walking the route's lane path
// across lane boundaries. Offsets past either end clamp to the route ends.
LanePoint walk_route(const MiniMap& map, const corpus::RouteCandidate& route,
                     const LanePoint& from, double offset) {
  std::vector<std::pair<std::string, double>> spans;  // lane id, usable length
  double from_arc = 0.0;
  double arc = 0.0;
  for (size_t i = 0; i < route.lane_path.size(); ++i) {
    const Lane& lane = map.lane(route.lane_path[i]);
    double begin = i == 0 ? lane.cumulative_s[static_cast<size_t>(route.start.index)] : 0.0;
    double end = i + 1 == route.lane_path.size()
                     ? lane.cumulative_s[static_cast<size_t>(route.end.index)]
                     : lane.length;
    spans.emplace_back(route.lane_path[i], end - begin);
    if (route.lane_path[i] == from.lane_id && from.s >= begin - 1e-9 &&
        from.s <= end + 1e-9) {
      from_arc = arc + (from.s - begin);
    }
    arc += end - begin;
  }
  double target = std::clamp(from_arc + offset, 0.0, arc);
  for (size_t i = 0; i < spans.size(); ++i) {
    if (target <= spans[i].second + 1e-9 || i + 1 == spans.size()) {
      const Lane& lane = map.lane(spans[i].first);
      double begin = i == 0 ? lane.cumulative_s[static_cast<size_t>(route.start.index)] : 0.0;
      return {spans[i].first, std::clamp(begin + target, 0.0, lane.length)};
    }
    target -= spans[i].second;
  }
  return from;
}

double density_intensity(const std::string& density) {
  if (density == "strong") return 0.9;
  if (density == "weak") return 0.2;
  return 0.5;  // medium
}

double density_visual_range(const std::string& density) {
  if (density == "strong") return 100.0;
  if (density == "weak") return 800.0;
  return 300.0;
}

void Builder::build_climate() {
  util::RandomStream rng = stream("climate");
  const std::string weather =
      value_or("C.type", r.climate.weather_type, "sunny");
  const std::string density = value_or("C.density", r.climate.density, "medium");
  const std::string time = value_or("C.time", r.climate.time_of_day, "daytime");

  const corpus::Fragment& weather_frag =
      single_fragment(weather, corpus::FragmentKind::Weather, rng);
  corpus::Bindings bindings;
  if (weather_frag.find_param("intensity")) {
    bindings["intensity"] = util::format_double(density_intensity(density));
  }
  if (weather == "foggy" && weather_frag.find_param("visual_range")) {
    bindings["visual_range"] = util::format_double(density_visual_range(density));
  }
  document.environment.push_back({weather_frag.fragment_id,
                                  corpus::instantiate(weather_frag, bindings)});
  if (r.climate.weather_type != repo::kNone) {
    resolved("C.type", weather_frag.fragment_id);
  }
  if (r.climate.density != repo::kNone) {
    resolved("C.density", weather_frag.fragment_id + ":" +
                              (bindings.count("intensity") ? bindings["intensity"]
                                                           : density));
  }

  const corpus::Fragment& time_frag =
      single_fragment(time, corpus::FragmentKind::Weather, rng);
  document.environment.push_back({time_frag.fragment_id,
                                  corpus::instantiate(time_frag, {})});
  if (r.climate.time_of_day != repo::kNone) resolved("C.time", time_frag.fragment_id);
}

void Builder::build_topology() {
  util::RandomStream rng = stream("topology");
  const std::string topology = r.road_topology.topology;
  std::vector<const MiniMap*> candidates;
  if (topology == repo::kNone) {
    unresolved("RT.topology");
    for (const MiniMap& m : ctx.corpus.maps()) candidates.push_back(&m);
  } else {
    candidates = ctx.corpus.maps_with_tag(topology);
  }
  if (candidates.empty()) {
    throw NoMatchingMapError("slot RT.topology: no bundled map provides '" + topology +
                             "'");
  }
  const std::string lanes = r.road_topology.lanes;
  if (lanes != repo::kNone) {
    std::vector<const MiniMap*> narrowed;
    for (const MiniMap* m : candidates) {
      if (m->topology_tags.count(lanes)) narrowed.push_back(m);
    }
    if (!narrowed.empty()) {
      candidates = narrowed;
      resolved("RT.lanes", lanes);
    } else {
      note("slot RT.lanes: no '" + topology + "' map offers '" + lanes +
           "', constraint relaxed");
      unresolved("RT.lanes");
    }
  } else {
    unresolved("RT.lanes");
  }

  map = candidates[static_cast<size_t>(rng.below(candidates.size()))];
  document.map_id = map->map_id;
  auto frags = ctx.corpus.lookup_fragments(map->map_id, corpus::FragmentKind::MapRef);
  if (frags.empty()) {
    throw SchemaError("assemble: map '" + map->map_id + "' has no MapRef fragment");
  }
  document.map_fragment_xml = corpus::instantiate(*frags.front(), {});
  if (topology != repo::kNone) {
    resolved("RT.topology", map->map_id);
  } else {
    note("RT.topology defaulted; map '" + map->map_id + "' chosen from full set");
  }
  route_pool = corpus::enumerate_routes(*map);
}

void Builder::build_facilities() {
  util::RandomStream rng = stream("facilities");
  const std::string marker = r.transportation_facilities.road_marker;
  document.road_marker = marker;
  if (marker != repo::kNone) {
    const corpus::Fragment& frag =
        single_fragment(marker, corpus::FragmentKind::MapRef, rng);
    document.parameter_decls.push_back(corpus::instantiate(frag, {}));
    resolved("TF.road_marker", frag.fragment_id);
  } else {
    unresolved("TF.road_marker");
  }

  const std::string sign = r.transportation_facilities.traffic_sign;
  if (sign != repo::kNone) {
    const corpus::Fragment& frag =
        single_fragment(sign, corpus::FragmentKind::SpawnActor, rng);
    doc::Entity entity = make_entity("sign1", frag, {});
    // Signs stand at the map's control line when one exists, else at the end
    // of the primary lane, offset to the curb side.
    LanePoint point{map->lanes.front().id, map->lanes.front().length};
    if (!map->stop_lines.empty()) {
      point = {map->stop_lines.front().lane_id, map->stop_lines.front().s};
    } else if (!map->signals.empty()) {
      point = {map->signals.front().lane_id, map->signals.front().s};
    }
    const Lane& lane = map->lane(point.lane_id);
    Vec2 pos = lane.position_at(point.s);
    Vec2 dir = lane.direction_at(point.s);
    Vec2 right{dir.y, -dir.x};
    double off = map->lane_width * 0.8;
    entity.spawn.x = pos.x + right.x * off;
    entity.spawn.y = pos.y + right.y * off;
    entity.spawn.heading = std::atan2(dir.y, dir.x);
    entity.spawn.lane_id = point.lane_id;
    entity.spawn.s = point.s;
    document.entities.push_back(std::move(entity));
    resolved("TF.traffic_sign", frag.fragment_id);
  } else {
    unresolved("TF.traffic_sign");
  }
}

void Builder::build_changes() {
  util::RandomStream rng = stream("changes");
  const std::string change = r.temporary_changes.change_type;
  if (change == repo::kNone) {
    unresolved("TC.type");
    unresolved("TC.position_relation");
    return;
  }
  auto frags = ctx.corpus.lookup_fragments(change, corpus::FragmentKind::SpawnActor);
  const corpus::Fragment* frag = nullptr;
  if (!frags.empty()) {
    frag = frags[static_cast<size_t>(rng.below(frags.size()))];
  } else {
    // Novel temporary change: realized with the generic obstacle.
    frag = ctx.corpus.find_fragment("obj_generic");
    if (!frag) throw SchemaError("assemble: corpus lacks the generic obstacle fragment");
    note("slot TC.type: novel element '" + change + "' realized as generic obstacle");
  }
  doc::Entity entity = make_entity("tc1", *frag, {});

  // Placed relative to the primary lane midpoint; temporary changes rank
  // above the ego, so placement must not read ego state.
  const Lane& lane = map->lanes.front();
  double s = lane.length * 0.5;
  const std::string relation = r.temporary_changes.position_relation;
  double lateral = 0.0;
  if (relation == "front") s = std::min(lane.length, s + defaults::kSceneryGap);
  else if (relation == "behind") s = std::max(0.0, s - defaults::kSceneryGap);
  else if (relation == "left") lateral = map->lane_width;
  else if (relation == "right") lateral = -map->lane_width;
  Vec2 pos = lane.position_at(s);
  Vec2 dir = lane.direction_at(s);
  Vec2 left_normal{-dir.y, dir.x};
  entity.spawn.x = pos.x + left_normal.x * lateral;
  entity.spawn.y = pos.y + left_normal.y * lateral;
  entity.spawn.heading = std::atan2(dir.y, dir.x);
  entity.spawn.lane_id = lane.id;
  entity.spawn.s = s;
  document.entities.push_back(std::move(entity));
  resolved("TC.type", frag->fragment_id);
  if (relation != repo::kNone) resolved("TC.position_relation", relation);
  else unresolved("TC.position_relation");
}

doc::Entity Builder::make_entity(const std::string& actor_id,
                                 const corpus::Fragment& frag,
                                 const corpus::Bindings& bindings) {
  doc::Entity entity;
  entity.actor_id = actor_id;
  entity.fragment_id = frag.fragment_id;
  entity.xml = corpus::instantiate(frag, bindings);
  xml::Node body = xml::parse_element(entity.xml);
  if (body.name == "Vehicle") {
    if (const std::string* cat = body.find_attr("vehicleCategory")) entity.category = *cat;
  } else if (body.name == "Pedestrian") {
    entity.category = "pedestrian";
  } else {
    entity.category = "misc";
  }
  if (const xml::Node* dims = body.find_descendant("Dimensions")) {
    if (const std::string* w = dims->find_attr("width")) entity.width = std::stod(*w);
    if (const std::string* l = dims->find_attr("length")) entity.length = std::stod(*l);
  }
  return entity;
}

void Builder::place_entity(doc::Entity& entity, const LanePoint& point) {
  const Lane& lane = map->lane(point.lane_id);
  Vec2 pos = lane.position_at(point.s);
  entity.spawn.lane_id = point.lane_id;
  entity.spawn.s = point.s;
  entity.spawn.x = pos.x;
  entity.spawn.y = pos.y;
  entity.spawn.heading = lane.heading_at(point.s);
}

RouteCandidate Builder::pick_route_from_lane(const std::string& lane_id, double spawn_s,
                                             const std::string& behavior,
                                             util::RandomStream& rng, std::string* what) {
  std::vector<const RouteCandidate*> from_lane;
  for (const RouteCandidate& c : route_pool) {
    if (c.start.lane_id == lane_id) from_lane.push_back(&c);
  }
  std::vector<const RouteCandidate*> labeled;
  for (const RouteCandidate* c : from_lane) {
    if (behavior.empty() || c->label.count(behavior)) labeled.push_back(c);
  }
  if (labeled.empty() && !behavior.empty()) {
    if (what) *what = "no route from lane '" + lane_id + "' labeled '" + behavior + "'";
    labeled = from_lane;
  }
  if (labeled.empty()) {
    throw NoRouteError("assemble: no route candidate starts on lane '" + lane_id + "'");
  }
  size_t max_path = 0;
  for (const RouteCandidate* c : labeled) max_path = std::max(max_path, c->lane_path.size());
  std::vector<const RouteCandidate*> best;
  for (const RouteCandidate* c : labeled) {
    if (c->lane_path.size() == max_path) best.push_back(c);
  }
  RouteCandidate route = *best[static_cast<size_t>(rng.below(best.size()))];

  // Re-anchor the start at the spawn point (snapped to a lane waypoint).
  const Lane& lane = map->lane(lane_id);
  int index = nearest_index(lane, spawn_s);
  if (route.lane_path.size() == 1 &&
      index >= route.end.index) {
    throw NoRouteError("assemble: spawn at the end of lane '" + lane_id +
                       "' leaves no room for a route");
  }
  route.start.index = index;
  std::vector<Vec2> polyline = corpus::route_polyline(*map, route);
  route.length = 0.0;
  for (size_t i = 1; i < polyline.size(); ++i) {
    route.length += corpus::norm(polyline[i] - polyline[i - 1]);
  }
  return route;
}

void Builder::build_ego() {
  util::RandomStream rng = stream("ego");
  const std::string ev_type = value_or("EV.type", r.ego_vehicle.vehicle_type, "car");
  const std::string behavior =
      value_or("EV.global_behavior", r.ego_vehicle.global_behavior, "go_forward");

  std::vector<const RouteCandidate*> labeled;
  for (const RouteCandidate& c : route_pool) {
    if (c.label.count(behavior)) labeled.push_back(&c);
  }
  if (labeled.empty()) {
    throw NoRouteError("slot EV.global_behavior: no route labeled '" + behavior +
                       "' on map '" + map->map_id + "'");
  }

  const std::string position = r.ego_vehicle.position;
  std::vector<const RouteCandidate*> positioned;
  for (const RouteCandidate* c : labeled) {
    const Lane& lane = map->lane(c->start.lane_id);
    bool ok = true;
    if (position == "right_lane" || position == "roadside") ok = !lane.adjacent_right;
    else if (position == "left_lane") ok = !lane.adjacent_left;
    else if (position == "middle_lane") ok = lane.adjacent_left && lane.adjacent_right;
    if (ok) positioned.push_back(c);
  }
  if (position != repo::kNone) {
    if (positioned.empty()) {
      note("slot EV.position: '" + position + "' unsatisfiable on map '" +
           map->map_id + "', constraint relaxed");
      unresolved("EV.position");
      positioned = labeled;
    } else {
      resolved("EV.position", position);
    }
  } else {
    unresolved("EV.position");
    positioned = labeled;
  }

  size_t max_path = 0;
  for (const RouteCandidate* c : positioned) {
    max_path = std::max(max_path, c->lane_path.size());
  }
  std::vector<const RouteCandidate*> best;
  for (const RouteCandidate* c : positioned) {
    if (c->lane_path.size() == max_path) best.push_back(c);
  }
  RouteCandidate route = *best[static_cast<size_t>(rng.below(best.size()))];
  route.actor_role = corpus::ActorRole::Ego;

  // Spawn part-way down the start lane so relative placements have room on
  // both sides.
  const Lane& start_lane = map->lane(route.start.lane_id);
  int spawn_index = nearest_index(start_lane, defaults::kEgoSpawnS);
  int last_usable = static_cast<int>(start_lane.points.size()) - 2;
  if (route.lane_path.size() == 1) last_usable = route.end.index - 1;
  spawn_index = std::clamp(spawn_index, 0, std::max(0, last_usable));
  route.start.index = spawn_index;
  std::vector<Vec2> polyline = corpus::route_polyline(*map, route);
  route.length = 0.0;
  for (size_t i = 1; i < polyline.size(); ++i) {
    route.length += corpus::norm(polyline[i] - polyline[i - 1]);
  }

  const corpus::Fragment& frag =
      single_fragment(ev_type, corpus::FragmentKind::SpawnActor, rng);
  doc::Entity ego = make_entity("ego", frag, {});
  ego.is_ego = true;
  const double spawn_s = start_lane.cumulative_s[static_cast<size_t>(spawn_index)];
  place_entity(ego, {route.start.lane_id, spawn_s});
  ego.spawn.speed = defaults::kSpeedFraction * map->speed_limit;
  ego_point = {route.start.lane_id, spawn_s};
  document.entities.push_back(std::move(ego));

  doc::RouteAssignment assignment;
  assignment.actor_id = "ego";
  assignment.route = route;
  assignment.start_s = spawn_s;
  assignment.end_s =
      map->lane(route.end.lane_id).cumulative_s[static_cast<size_t>(route.end.index)];
  document.routes.push_back(assignment);

  doc::ActorStory story;
  story.actor_id = "ego";
  doc::StoryEvent autopilot;
  autopilot.name = "ego_ev1_autopilot";
  autopilot.action = StandardAction::Autopilot;
  autopilot.action_xml =
      corpus::instantiate(ctx.corpus.fragment("evt_autopilot"), {});
  autopilot.trigger.kind = doc::Trigger::Kind::OnStart;
  story.events.push_back(std::move(autopilot));
  document.stories.push_back(std::move(story));

  if (r.ego_vehicle.vehicle_type != repo::kNone) resolved("EV.type", frag.fragment_id);
  if (r.ego_vehicle.global_behavior != repo::kNone) {
    resolved("EV.global_behavior", route_description(route));
  } else {
    note("EV.global_behavior defaulted to go_forward: " + route_description(route));
  }
}

std::vector<doc::StoryEvent> Builder::build_chain(const std::string& actor_id,
                                                  const rep::TrafficParticipant& p,
                                                  const std::string& spawn_lane,
                                                  double initial_speed) {
  std::vector<StandardAction> chain;
  auto extend = [&](const std::string& behavior) {
    if (behavior == repo::kNone) return;
    auto actions = decompose(behavior, ctx.table, ctx.backend);
    chain.insert(chain.end(), actions.begin(), actions.end());
  };
  extend(p.longitudinal_oracle);
  extend(p.lateral_oracle);
  extend(p.global_behavior);
  if (chain.empty() || chain.back() != StandardAction::Autopilot) {
    chain.push_back(StandardAction::Autopilot);
  }

  // Unsided lane changes resolve against spawn-lane adjacency; a second
  // unsided change swings back.
  const Lane& lane = map->lane(spawn_lane);
  bool prefer_left = lane.adjacent_left.has_value();
  if (!lane.adjacent_left && !lane.adjacent_right) {
    for (StandardAction a : chain) {
      if (a == StandardAction::ChangeLane || a == StandardAction::ChangeLaneLeft ||
          a == StandardAction::ChangeLaneRight) {
        throw NoAdjacentLaneError("slot TP.lateral_oracle: lane '" + spawn_lane +
                                  "' has no adjacent lane for a lane change");
      }
    }
  }

  const bool interactive =
      p.global_behavior == "cut_in" || p.global_behavior == "overtake";
  std::vector<doc::StoryEvent> events;
  double speed = initial_speed;
  bool last_was_stop = false;
  int k = 1;
  for (StandardAction action : chain) {
    doc::StoryEvent event;
    StandardAction emitted = action;
    if (action == StandardAction::ChangeLane) {
      emitted = prefer_left ? StandardAction::ChangeLaneLeft
                            : StandardAction::ChangeLaneRight;
      prefer_left = !prefer_left;
    }
    event.action = emitted;
    event.name = actor_id + "_ev" + std::to_string(k) + "_" +
                 doc::standard_action_str(emitted);

    corpus::Bindings bindings;
    switch (emitted) {
      case StandardAction::Accelerate: {
        speed = std::min(speed + defaults::kSpeedDelta, map->speed_limit * 1.2);
        bindings["target_speed"] = util::format_double(speed);
        bindings["duration"] = util::format_double(defaults::kSpeedDuration);
        event.action_xml =
            corpus::instantiate(ctx.corpus.fragment("evt_accelerate"), bindings);
        break;
      }
      case StandardAction::Decelerate: {
        speed = std::max(speed - defaults::kSpeedDelta, 0.0);
        bindings["target_speed"] = util::format_double(speed);
        bindings["duration"] = util::format_double(defaults::kSpeedDuration);
        event.action_xml =
            corpus::instantiate(ctx.corpus.fragment("evt_decelerate"), bindings);
        break;
      }
      case StandardAction::Cruise: {
        speed = defaults::kSpeedFraction * map->speed_limit;
        bindings["target_speed"] = util::format_double(speed);
        bindings["duration"] = util::format_double(defaults::kCruiseDuration);
        event.action_xml =
            corpus::instantiate(ctx.corpus.fragment("evt_cruise"), bindings);
        break;
      }
      case StandardAction::Stop: {
        speed = 0.0;
        bindings["target_speed"] = "0.0";
        bindings["duration"] = util::format_double(defaults::kSpeedDuration);
        event.action_xml =
            corpus::instantiate(ctx.corpus.fragment("evt_stop"), bindings);
        break;
      }
      case StandardAction::Yield: {
        // Realized by the table as decelerate-stop-cruise; direct yield events
        // behave like decelerate.
        speed = std::max(speed - defaults::kSpeedDelta, 0.0);
        bindings["target_speed"] = util::format_double(speed);
        bindings["duration"] = util::format_double(defaults::kSpeedDuration);
        event.action_xml =
            corpus::instantiate(ctx.corpus.fragment("evt_decelerate"), bindings);
        break;
      }
      case StandardAction::ChangeLaneLeft:
      case StandardAction::ChangeLaneRight: {
        bindings["actor"] = actor_id;
        bindings["direction"] =
            emitted == StandardAction::ChangeLaneLeft ? "1" : "-1";
        bindings["duration"] = util::format_double(defaults::kLaneChangeDuration);
        event.action_xml = corpus::instantiate(
            ctx.corpus.fragment(emitted == StandardAction::ChangeLaneLeft
                                    ? "evt_change_lane_left"
                                    : "evt_change_lane_right"),
            bindings);
        break;
      }
      case StandardAction::KeepLane: {
        bindings["duration"] = util::format_double(defaults::kKeepLaneDuration);
        event.action_xml =
            corpus::instantiate(ctx.corpus.fragment("evt_keep_lane"), bindings);
        break;
      }
      case StandardAction::Autopilot:
      case StandardAction::ChangeLane: {
        event.action_xml = corpus::instantiate(ctx.corpus.fragment("evt_autopilot"), {});
        break;
      }
    }
    for (const auto& [key, value] : bindings) {
      if (key == "actor") continue;
      event.params[key] = std::stod(value);
    }

    if (k == 1) {
      if (interactive) {
        event.trigger.kind = doc::Trigger::Kind::OnDistanceToEgo;
        event.trigger.distance = defaults::kTriggerDistance;
      } else {
        event.trigger.kind = doc::Trigger::Kind::OnStart;
      }
    } else {
      event.trigger.kind = doc::Trigger::Kind::AfterPrevious;
      if (last_was_stop) event.trigger.delay = defaults::kStopHold;
    }
    last_was_stop = emitted == StandardAction::Stop;
    events.push_back(std::move(event));
    ++k;
  }
  return events;
}

void Builder::build_participants() {
  util::RandomStream rng = stream("participants");
  std::vector<std::string> priority_actors;

  int index = 0;
  for (const rep::TrafficParticipant& p : r.traffic_participants) {
    ++index;
    const std::string tag = "[" + std::to_string(index - 1) + "]";
    const std::string tp_type =
        p.participant_type == repo::kNone ? "car" : p.participant_type;
    if (p.participant_type == repo::kNone) unresolved("TP.type" + tag);

    auto frags = ctx.corpus.lookup_fragments(tp_type, corpus::FragmentKind::SpawnActor);
    const corpus::Fragment* frag = nullptr;
    if (!frags.empty()) {
      frag = frags[static_cast<size_t>(rng.below(frags.size()))];
      if (p.participant_type != repo::kNone) resolved("TP.type" + tag, frag->fragment_id);
    } else {
      // Novel participant type: realized with the generic car body.
      frag = ctx.corpus.find_fragment("veh_car");
      if (!frag) throw SchemaError("assemble: corpus lacks the veh_car fragment");
      note("slot TP.type: novel element '" + tp_type + "' realized as a car");
      resolved("TP.type" + tag, frag->fragment_id + " (novel '" + tp_type + "')");
    }

    const bool is_pedestrian = tp_type == "pedestrian";
    const bool priority = is_pedestrian || tp_type == "bicycle" ||
                          (r.ego_vehicle.global_behavior == "turn_left" &&
                           p.position_relation == "opposite" &&
                           (p.global_behavior == "go_forward" ||
                            p.global_behavior == repo::kNone));

    const std::string relation = p.position_relation;
    if (relation != repo::kNone) resolved("TP.position_relation" + tag, relation);
    else unresolved("TP.position_relation" + tag);
    for (const char* slot : {"TP.longitudinal_oracle", "TP.lateral_oracle",
                             "TP.global_behavior"}) {
      std::string value = rep::get_participant_slot(p, slot);
      if (value != repo::kNone) resolved(std::string(slot) + tag, value);
      else unresolved(std::string(slot) + tag);
    }

    for (int k = 1; k <= p.count; ++k) {
      std::string actor_id = "tp" + std::to_string(index);
      if (p.count > 1) actor_id += "_" + std::to_string(k);

      LanePoint spawn;
      RouteCandidate route;
      std::string route_note;
      const std::string behavior_label =
          p.global_behavior == repo::kNone ? "go_forward" : p.global_behavior;
      // Interactive composites follow their own route forward; the composite
      // motion comes from the action chain.
      std::string label = behavior_label;
      if (label == "cut_in" || label == "overtake") label = "go_forward";

      if (relation == repo::kNone) {
        // Own seeded route anywhere on the map.
        std::vector<const RouteCandidate*> labeled;
        for (const RouteCandidate& c : route_pool) {
          if (c.label.count(label) && c.start.lane_id != ego_point.lane_id) {
            labeled.push_back(&c);
          }
        }
        if (labeled.empty()) {
          for (const RouteCandidate& c : route_pool) {
            if (c.label.count(label)) labeled.push_back(&c);
          }
        }
        if (labeled.empty()) {
          throw NoRouteError("slot TP.global_behavior: no route labeled '" + label +
                             "' on map '" + map->map_id + "'");
        }
        route = *labeled[static_cast<size_t>(rng.below(labeled.size()))];
        const Lane& lane = map->lane(route.start.lane_id);
        double offset_s = lane.cumulative_s[static_cast<size_t>(route.start.index)] +
                          defaults::kReplicaSpacing * (k - 1);
        int idx = nearest_index(lane, offset_s);
        idx = std::min(idx, std::max(0, route.lane_path.size() == 1
                                            ? route.end.index - 1
                                            : static_cast<int>(lane.points.size()) - 2));
        route.start.index = idx;
        spawn = {route.start.lane_id, lane.cumulative_s[static_cast<size_t>(idx)]};
      } else {
        double gap = defaults::kGap;
        LanePoint base;
        if (relation == "opposite") {
          base = position_relative(*map, ego_point, relation,
                                   gap + defaults::kReplicaSpacing * (k - 1));
        } else if (relation == "front" || relation == "behind") {
          const double shift = gap + defaults::kReplicaSpacing * (k - 1);
          try {
            base = position_relative(*map, ego_point, relation, shift);
          } catch (const OffMapError&) {
            // Short lane: walk the ego route across lane boundaries instead.
            const doc::RouteAssignment* ego_route = document.find_route("ego");
            if (!ego_route) throw;
            base = walk_route(*map, ego_route->route, ego_point,
                              relation == "front" ? shift : -shift);
            note("actor " + actor_id + ": '" + relation +
                 "' placement walked the ego route across lane ends");
          }
        } else {
          base = position_relative(*map, ego_point, relation, gap);
          double shift = defaults::kReplicaSpacing * (k - 1);
          base.s = std::clamp(base.s + shift, 0.0, map->lane(base.lane_id).length);
        }
        const Lane& lane = map->lane(base.lane_id);
        int idx = nearest_index(lane, base.s);
        spawn = {base.lane_id, lane.cumulative_s[static_cast<size_t>(idx)]};
        route = pick_route_from_lane(base.lane_id, spawn.s, label, rng, &route_note);
        if (!route_note.empty()) note("actor " + actor_id + ": " + route_note);
      }
      route.actor_role = corpus::ActorRole::Participant;

      doc::Entity entity = make_entity(actor_id, *frag, {});
      place_entity(entity, spawn);
      double initial_speed = is_pedestrian
                                 ? defaults::kPedestrianSpeed
                                 : defaults::kSpeedFraction * map->speed_limit;
      std::vector<doc::StoryEvent> events =
          build_chain(actor_id, p, spawn.lane_id, initial_speed);
      if (!events.empty() && events.front().action == StandardAction::Stop) {
        initial_speed = 0.0;
      }
      entity.spawn.speed = initial_speed;
      entity.priority = priority;
      if (priority) priority_actors.push_back(actor_id);
      document.entities.push_back(std::move(entity));

      doc::RouteAssignment assignment;
      assignment.actor_id = actor_id;
      assignment.route = route;
      assignment.start_s = map->lane(route.start.lane_id)
                               .cumulative_s[static_cast<size_t>(route.start.index)];
      assignment.end_s = map->lane(route.end.lane_id)
                             .cumulative_s[static_cast<size_t>(route.end.index)];
      document.routes.push_back(std::move(assignment));

      doc::ActorStory story;
      story.actor_id = actor_id;
      story.events = std::move(events);
      document.stories.push_back(std::move(story));
    }
  }

  if (!priority_actors.empty()) {
    std::string list;
    for (const std::string& a : priority_actors) {
      if (!list.empty()) list += " ";
      list += a;
    }
    xml::Node decl("ParameterDeclaration");
    decl.attr("name", "priority_actors").attr("parameterType", "string").attr("value", list);
    std::string text = xml::write_element(decl);
    if (!text.empty() && text.back() == '\n') text.pop_back();
    document.parameter_decls.push_back(text);
  }
}

void Builder::build_monitors() {
  const doc::RouteAssignment* ego_route = document.find_route("ego");
  double timeout = ctx.monitors.timeout_limit;
  if (timeout <= 0.0 && ego_route) {
    timeout = exec::timeout_limit(ego_route->route.length, map->speed_limit);
  }
  const corpus::Fragment& frag = ctx.corpus.fragment("mon_criteria");
  for (const std::string& id : exec::monitor_ids()) {
    if (!ctx.monitors.enabled.count(id)) continue;
    corpus::Bindings bindings;
    bindings["name"] = id;
    bindings["value"] = id == "TO" ? util::format_double(timeout) : "0";
    doc::MonitorCriterion criterion;
    criterion.monitor_id = id;
    criterion.xml = corpus::instantiate(frag, bindings);
    criterion.value = id == "TO" ? timeout : 0.0;
    document.monitors.push_back(std::move(criterion));
  }
}

void Builder::finish_declarations() {
  xml::Node decl("ParameterDeclaration");
  decl.attr("name", "speed_limit")
      .attr("parameterType", "double")
      .attr("value", util::format_double(map->speed_limit));
  std::string text = xml::write_element(decl);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  document.parameter_decls.insert(document.parameter_decls.begin(), text);
}

}  // namespace

std::string AssemblyReport::to_json() const {
  ordered_json j;
  j["chosen"] = chosen;
  ordered_json unres = unresolved_slots;
  j["unresolved"] = unres;
  j["notes"] = notes;
  j["findings"] = ordered_json::array();
  for (const auto& f : findings) {
    j["findings"].push_back(ordered_json{
        {"rule_id", f.rule_id},
        {"severity",
         f.severity == rep::Severity::Contradiction ? "Contradiction" : "Warning"},
        {"message", f.message}});
  }
  return j.dump(2) + "\n";
}

AssembleResult assemble(const rep::ScenarioRepresentation& representation,
                        const AssemblyContext& context, std::uint64_t seed) {
  std::vector<rep::ConsistencyFinding> findings =
      rep::validate(representation, context.config, context.rules);
  if (rep::has_contradiction(findings)) {
    std::string ids;
    for (const auto& f : findings) {
      if (f.severity == rep::Severity::Contradiction) {
        if (!ids.empty()) ids += ", ";
        ids += f.rule_id;
      }
    }
    throw SchemaError("assemble: representation carries contradictions: " + ids);
  }

  Builder builder{representation, context, seed, {}, {}};
  builder.report.findings = findings;

  std::string slug = util::normalize_token(representation.source_text);
  if (slug.size() > 48) slug = slug.substr(0, 48);
  if (slug.empty()) slug = "scenario";
  builder.document.meta.name = slug + "_s" + std::to_string(seed);
  builder.document.meta.description = representation.source_text;
  builder.document.meta.source_hash = util::fnv1a64_hex(representation.source_text);

  // Tier order is the repository priority order; each build step may read
  // only what earlier (higher-priority) steps fixed.
  builder.build_climate();
  builder.build_topology();
  builder.build_facilities();
  builder.build_changes();
  builder.build_ego();
  builder.build_participants();
  builder.build_monitors();
  builder.finish_declarations();

  builder.document.check_invariants();
  std::sort(builder.report.unresolved_slots.begin(),
            builder.report.unresolved_slots.end());
  return {std::move(builder.document), std::move(builder.report)};
}

}  // namespace scenforge::assembler
