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

#include "scenforge/lane_map.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <map>
#include <queue>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::corpus {

using nlohmann::json;

double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
double norm(const Vec2& a) { return std::sqrt(a.x * a.x + a.y * a.y); }

void Lane::finalize() {
  cumulative_s.assign(points.size(), 0.0);
  for (size_t i = 1; i < points.size(); ++i) {
    cumulative_s[i] = cumulative_s[i - 1] + norm(points[i] - points[i - 1]);
  }
  length = cumulative_s.empty() ? 0.0 : cumulative_s.back();
}

Vec2 Lane::position_at(double s) const {
  if (points.size() < 2) return points.empty() ? Vec2{} : points.front();
  s = std::clamp(s, 0.0, length);
  size_t i = 1;
  while (i + 1 < points.size() && cumulative_s[i] < s) ++i;
  double seg_len = cumulative_s[i] - cumulative_s[i - 1];
  double t = seg_len > 0 ? (s - cumulative_s[i - 1]) / seg_len : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return points[i - 1] + (points[i] - points[i - 1]) * t;
}

Vec2 Lane::direction_at(double s) const {
  if (points.size() < 2) return {1.0, 0.0};
  s = std::clamp(s, 0.0, length);
  size_t i = 1;
  while (i + 1 < points.size() && cumulative_s[i] < s) ++i;
  Vec2 d = points[i] - points[i - 1];
  double n = norm(d);
  return n > 0 ? d * (1.0 / n) : Vec2{1.0, 0.0};
}

double Lane::heading_at(double s) const {
  Vec2 d = direction_at(s);
  return std::atan2(d.y, d.x);
}

std::pair<double, double> Lane::nearest(const Vec2& p) const {
  double best_s = 0.0;
  double best_d = std::numeric_limits<double>::max();
  for (size_t i = 1; i < points.size(); ++i) {
    Vec2 a = points[i - 1];
    Vec2 b = points[i];
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    Vec2 q = a + ab * t;
    double d = norm(p - q);
    if (d < best_d) {
      best_d = d;
      best_s = cumulative_s[i - 1] + t * std::sqrt(len2);
    }
  }
  return {best_s, best_d};
}

SignalHead::Phase SignalHead::phase_at(double t) const {
  double cycle = green + yellow + red;
  double ph = std::fmod(t + offset, cycle);
  if (ph < 0) ph += cycle;
  if (ph < green) return Phase::Green;
  if (ph < green + yellow) return Phase::Yellow;
  return Phase::Red;
}

const Lane* MiniMap::find_lane(const std::string& id) const {
  for (const Lane& l : lanes) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

const Lane& MiniMap::lane(const std::string& id) const {
  const Lane* l = find_lane(id);
  if (!l) throw SchemaError("map '" + map_id + "': unknown lane '" + id + "'");
  return *l;
}

MiniMap map_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("map: ") + e.what());
  }
  MiniMap m;
  try {
    m.map_id = doc.at("map_id").get<std::string>();
    for (const auto& t : doc.at("topology_tags")) m.topology_tags.insert(t.get<std::string>());
    m.lane_width = doc.at("lane_width").get<double>();
    m.speed_limit = doc.at("speed_limit").get<double>();
    for (const auto& jl : doc.at("lanes")) {
      Lane lane;
      lane.id = jl.at("id").get<std::string>();
      for (const auto& jp : jl.at("points")) {
        lane.points.push_back({jp.at(0).get<double>(), jp.at(1).get<double>()});
      }
      if (jl.contains("adjacent_left") && !jl.at("adjacent_left").is_null()) {
        lane.adjacent_left = jl.at("adjacent_left").get<std::string>();
      }
      if (jl.contains("adjacent_right") && !jl.at("adjacent_right").is_null()) {
        lane.adjacent_right = jl.at("adjacent_right").get<std::string>();
      }
      if (jl.contains("successors")) {
        for (const auto& s : jl.at("successors")) lane.successors.push_back(s.get<std::string>());
      }
      if (jl.contains("tags")) {
        for (const auto& t : jl.at("tags")) lane.tags.insert(t.get<std::string>());
      }
      lane.finalize();
      m.lanes.push_back(std::move(lane));
    }
    if (doc.contains("signals")) {
      for (const auto& js : doc.at("signals")) {
        SignalHead sig;
        sig.id = js.at("id").get<std::string>();
        sig.lane_id = js.at("lane_id").get<std::string>();
        sig.s = js.at("s").get<double>();
        sig.green = js.at("green").get<double>();
        sig.yellow = js.at("yellow").get<double>();
        sig.red = js.at("red").get<double>();
        sig.offset = js.value("offset", 0.0);
        m.signals.push_back(sig);
      }
    }
    if (doc.contains("stop_lines")) {
      for (const auto& js : doc.at("stop_lines")) {
        m.stop_lines.push_back({js.at("lane_id").get<std::string>(), js.at("s").get<double>()});
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("map: ") + e.what());
  }

  if (m.speed_limit <= 0) throw SchemaError("map '" + m.map_id + "': speed_limit must be > 0");
  for (const Lane& l : m.lanes) {
    if (l.points.size() < 2) {
      throw SchemaError("map '" + m.map_id + "': lane '" + l.id + "' needs >= 2 waypoints");
    }
    auto check_sym = [&](const std::optional<std::string>& other, bool left) {
      if (!other) return;
      const Lane* o = m.find_lane(*other);
      if (!o) {
        throw SchemaError("map '" + m.map_id + "': lane '" + l.id +
                          "' references unknown adjacent lane '" + *other + "'");
      }
      const auto& back = left ? o->adjacent_right : o->adjacent_left;
      if (!back || *back != l.id) {
        throw SchemaError("map '" + m.map_id + "': adjacency between '" + l.id +
                          "' and '" + *other + "' is not symmetric");
      }
    };
    check_sym(l.adjacent_left, true);
    check_sym(l.adjacent_right, false);
    for (const std::string& s : l.successors) {
      if (!m.find_lane(s)) {
        throw SchemaError("map '" + m.map_id + "': lane '" + l.id +
                          "' references unknown successor '" + s + "'");
      }
    }
  }
  for (const SignalHead& s : m.signals) m.lane(s.lane_id);
  for (const StopSignLine& s : m.stop_lines) m.lane(s.lane_id);
  return m;
}

MiniMap load_map(const std::string& path) {
  return map_from_json_text(util::read_file(path));
}

// ---------------------------------------------------------------------------
// Route search
// ---------------------------------------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

// Dijkstra over successor edges, weights = lane lengths. Lexicographic lane id
// breaks ties so paths are deterministic.
std::optional<std::vector<std::string>> shortest_lane_path(const MiniMap& map,
                                                           const std::string& from,
                                                           const std::string& to) {
  std::map<std::string, double> dist;
  std::map<std::string, std::string> prev;
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[from] = 0.0;
  heap.push({0.0, from});
  while (!heap.empty()) {
    auto [d, id] = heap.top();
    heap.pop();
    if (d > dist[id]) continue;
    if (id == to) break;
    const Lane& lane = map.lane(id);
    for (const std::string& nxt : lane.successors) {
      double nd = d + map.lane(nxt).length;
      auto it = dist.find(nxt);
      if (it == dist.end() || nd < it->second - 1e-12 ||
          (std::abs(nd - it->second) <= 1e-12 && id < prev[nxt])) {
        dist[nxt] = nd;
        prev[nxt] = id;
        heap.push({nd, nxt});
      }
    }
  }
  if (!dist.count(to)) return std::nullopt;
  std::vector<std::string> path;
  std::string cur = to;
  while (cur != from) {
    path.push_back(cur);
    cur = prev.at(cur);
  }
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) len += norm(pts[i] - pts[i - 1]);
  return len;
}

}  // namespace

std::vector<Vec2> route_polyline(const MiniMap& map, const RouteCandidate& route) {
  std::vector<Vec2> pts;
  for (size_t li = 0; li < route.lane_path.size(); ++li) {
    const Lane& lane = map.lane(route.lane_path[li]);
    int first = 0;
    int last = static_cast<int>(lane.points.size()) - 1;
    if (li == 0) first = route.start.index;
    if (li + 1 == route.lane_path.size()) last = route.end.index;
    for (int i = first; i <= last; ++i) {
      const Vec2& p = lane.points[static_cast<size_t>(i)];
      if (!pts.empty() && norm(p - pts.back()) < 1e-9) continue;
      pts.push_back(p);
    }
  }
  return pts;
}

std::set<std::string> route_label(const MiniMap& map,
                                  const std::vector<std::string>& lane_path,
                                  const WaypointRef& start, const WaypointRef& end) {
  RouteCandidate probe;
  probe.lane_path = lane_path;
  probe.start = start;
  probe.end = end;
  std::vector<Vec2> pts = route_polyline(map, probe);

  std::set<std::string> label;
  if (pts.size() >= 2) {
    Vec2 d0 = pts[1] - pts[0];
    Vec2 d1 = pts[pts.size() - 1] - pts[pts.size() - 2];
    double net = wrap_angle(std::atan2(d1.y, d1.x) - std::atan2(d0.y, d0.x));
    double deg = net * 180.0 / kPi;
    if (deg > 45.0 && deg <= 135.0) label.insert("turn_left");
    else if (deg < -45.0 && deg >= -135.0) label.insert("turn_right");
    else if (std::abs(deg) <= 45.0) label.insert("go_forward");
    else label.insert("u_turn");
  }
  bool lane_change_possible = false;
  for (const std::string& id : lane_path) {
    const Lane& lane = map.lane(id);
    if (lane.tags.count("roundabout")) label.insert("roundabout_transit");
    if (lane.adjacent_left || lane.adjacent_right) lane_change_possible = true;
  }
  if (lane_change_possible) label.insert("cut_in_capable");
  return label;
}

std::vector<RouteCandidate> enumerate_routes(const MiniMap& map) {
  std::vector<RouteCandidate> out;
  for (const Lane& a : map.lanes) {
    for (const Lane& b : map.lanes) {
      RouteCandidate cand;
      cand.map_id = map.map_id;
      if (a.id == b.id) {
        // Whole-lane traversal; the only route form on maps without junctions.
        cand.lane_path = {a.id};
        cand.start = {a.id, 0};
        cand.end = {a.id, static_cast<int>(a.points.size()) - 1};
      } else {
        auto path = shortest_lane_path(map, a.id, b.id);
        if (!path) continue;
        cand.lane_path = *path;
        cand.start = {a.id, 0};
        cand.end = {b.id, static_cast<int>(b.points.size()) - 1};
      }
      cand.label = route_label(map, cand.lane_path, cand.start, cand.end);
      cand.length = polyline_length(route_polyline(map, cand));
      out.push_back(std::move(cand));
    }
  }
  return out;
}

RouteSearchResult route_random_search(const MiniMap& map, int n, std::uint64_t rng_seed) {
  if (n < 1) throw DomainError("route_random_search: n must be >= 1");
  RouteSearchResult result;
  std::vector<RouteCandidate> pool = enumerate_routes(map);
  util::RandomStream rng(rng_seed);
  rng.shuffle(pool);
  if (static_cast<int>(pool.size()) < n) {
    result.exhausted = true;
    result.candidates = std::move(pool);
    return result;
  }
  result.candidates.assign(pool.begin(), pool.begin() + n);
  return result;
}

}  // namespace scenforge::corpus
