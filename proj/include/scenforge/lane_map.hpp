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

#ifndef SCENFORGE_LANE_MAP_HPP
#define SCENFORGE_LANE_MAP_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scenforge::corpus {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(const Vec2& a, double k) { return {a.x * k, a.y * k}; }
double dot(const Vec2& a, const Vec2& b);
double norm(const Vec2& a);

// A directed lane given as an ordered waypoint polyline. Direction follows
// waypoint order; arc position s runs from 0 at the first waypoint.
struct Lane {
  std::string id;
  std::vector<Vec2> points;
  std::optional<std::string> adjacent_left;
  std::optional<std::string> adjacent_right;
  std::vector<std::string> successors;
  std::set<std::string> tags;  // per-lane tags, e.g. "roundabout" on ring lanes

  // Derived on load.
  std::vector<double> cumulative_s;
  double length = 0.0;

  void finalize();
  Vec2 position_at(double s) const;
  Vec2 direction_at(double s) const;  // unit vector
  double heading_at(double s) const;  // radians
  // Arc position of the point on this lane closest to p, plus the distance.
  std::pair<double, double> nearest(const Vec2& p) const;
};

// Signalized stop line; phase repeats green -> yellow -> red.
struct SignalHead {
  std::string id;
  std::string lane_id;
  double s = 0.0;
  double green = 10.0;
  double yellow = 3.0;
  double red = 12.0;
  double offset = 0.0;

  enum class Phase { Green, Yellow, Red };
  Phase phase_at(double t) const;
};

// Stop-sign controlled line (unsignalized).
struct StopSignLine {
  std::string lane_id;
  double s = 0.0;
};

struct MiniMap {
  std::string map_id;
  std::set<std::string> topology_tags;
  double lane_width = 3.5;
  double speed_limit = 13.889;  // m/s
  std::vector<Lane> lanes;
  std::vector<SignalHead> signals;
  std::vector<StopSignLine> stop_lines;

  const Lane* find_lane(const std::string& id) const;
  const Lane& lane(const std::string& id) const;  // throws SchemaError
};

// Parses and validates a *.map.json file. Throws ParseError / SchemaError.
MiniMap load_map(const std::string& path);
MiniMap map_from_json_text(const std::string& text);

struct WaypointRef {
  std::string lane_id;
  int index = 0;
  bool operator==(const WaypointRef&) const = default;
};

enum class ActorRole { Ego, Participant };

struct RouteCandidate {
  std::string map_id;
  ActorRole actor_role = ActorRole::Participant;
  WaypointRef start;
  WaypointRef end;
  std::set<std::string> label;
  double length = 0.0;
  std::vector<std::string> lane_path;  // consecutive lanes, start lane first
};

struct RouteSearchResult {
  std::vector<RouteCandidate> candidates;
  bool exhausted = false;  // fewer reachable pairs than requested
};

// Samples n routes over lane pairs reachable through successor edges
// (same-lane start-to-end traversals count as routes on maps without
// junction connectivity). The label is a pure function of path geometry:
// net heading change in (45, 135] degrees -> turn_left / turn_right by sign,
// |net| <= 45 -> go_forward, |net| > 135 -> u_turn; crossing a
// roundabout-tagged lane adds roundabout_transit; any adjacent lane along
// the path adds cut_in_capable. Reproducible for a fixed seed.
RouteSearchResult route_random_search(const MiniMap& map, int n, std::uint64_t rng_seed);

// Deterministic full enumeration (the pool route_random_search samples from),
// ordered by (start lane, end lane) declaration order.
std::vector<RouteCandidate> enumerate_routes(const MiniMap& map);

// Concatenated waypoint polyline for a route, used by the executor for replay
// and by length computation. Duplicate junction points are merged.
std::vector<Vec2> route_polyline(const MiniMap& map, const RouteCandidate& route);

std::set<std::string> route_label(const MiniMap& map,
                                  const std::vector<std::string>& lane_path,
                                  const WaypointRef& start, const WaypointRef& end);

}  // namespace scenforge::corpus

#endif  // SCENFORGE_LANE_MAP_HPP
