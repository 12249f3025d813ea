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

#include "scenforge/executor.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::exec {

using corpus::Lane;
using corpus::MiniMap;
using corpus::Vec2;
using doc::StandardAction;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double timeout_limit(double route_length, double speed_limit) {
  if (route_length <= 0.0 || speed_limit <= 0.0) {
    throw DomainError("timeout_limit: route length and speed limit must be > 0");
  }
  return route_length / (0.10 * speed_limit);
}

const ActorState* WorldState::find_actor(const std::string& id) const {
  for (const ActorState& a : actors) {
    if (a.actor_id == id) return &a;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// OBB overlap (separating axis test on the 4 face normals)
// ---------------------------------------------------------------------------

bool obb_overlap(const Obb& a, const Obb& b) {
  auto corners = [](const Obb& o) {
    std::vector<Vec2> out(4);
    const double c = std::cos(o.heading);
    const double s = std::sin(o.heading);
    const double hl = o.length / 2.0;
    const double hw = o.width / 2.0;
    const Vec2 ex{c * hl, s * hl};
    const Vec2 ey{-s * hw, c * hw};
    out[0] = {o.cx + ex.x + ey.x, o.cy + ex.y + ey.y};
    out[1] = {o.cx + ex.x - ey.x, o.cy + ex.y - ey.y};
    out[2] = {o.cx - ex.x - ey.x, o.cy - ex.y - ey.y};
    out[3] = {o.cx - ex.x + ey.x, o.cy - ex.y + ey.y};
    return out;
  };
  const std::vector<Vec2> ca = corners(a);
  const std::vector<Vec2> cb = corners(b);
  const Vec2 axes[4] = {
      {std::cos(a.heading), std::sin(a.heading)},
      {-std::sin(a.heading), std::cos(a.heading)},
      {std::cos(b.heading), std::sin(b.heading)},
      {-std::sin(b.heading), std::cos(b.heading)},
  };
  for (const Vec2& axis : axes) {
    double amin = 1e18, amax = -1e18, bmin = 1e18, bmax = -1e18;
    for (const Vec2& p : ca) {
      double d = corpus::dot(p, axis);
      amin = std::min(amin, d);
      amax = std::max(amax, d);
    }
    for (const Vec2& p : cb) {
      double d = corpus::dot(p, axis);
      bmin = std::min(bmin, d);
      bmax = std::max(bmax, d);
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Scripted ego trace
// ---------------------------------------------------------------------------

ScriptedEgo ScriptedEgo::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("ego trace: ") + e.what());
  }
  ScriptedEgo ego;
  try {
    for (const auto& jf : doc.at("frames")) {
      EgoTraceFrame f;
      f.t = jf.at("t").get<double>();
      f.x = jf.at("x").get<double>();
      f.y = jf.at("y").get<double>();
      f.heading = jf.value("h", 0.0);
      f.speed = jf.value("v", 0.0);
      ego.frames.push_back(f);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("ego trace: ") + e.what());
  }
  if (ego.frames.empty()) throw SchemaError("ego trace: no frames");
  return ego;
}

ScriptedEgo ScriptedEgo::from_file(const std::string& path) {
  return from_json_text(util::read_file(path));
}

EgoTraceFrame ScriptedEgo::at(double t) const {
  if (t <= frames.front().t) return frames.front();
  if (t >= frames.back().t) return frames.back();
  size_t hi = 1;
  while (hi < frames.size() && frames[hi].t < t) ++hi;
  const EgoTraceFrame& a = frames[hi - 1];
  const EgoTraceFrame& b = frames[hi];
  double span = b.t - a.t;
  double u = span > 0 ? (t - a.t) / span : 0.0;
  EgoTraceFrame out;
  out.t = t;
  out.x = a.x + (b.x - a.x) * u;
  out.y = a.y + (b.y - a.y) * u;
  out.heading = a.heading + (b.heading - a.heading) * u;
  out.speed = a.speed + (b.speed - a.speed) * u;
  return out;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

constexpr double kGoalRadius = 3.0;
constexpr double kHardCap = 3600.0;           // absolute wall on scenario time
constexpr double kStandstillSpeed = 0.1;      // below this counts as stopped
constexpr double kWrongDirMinSpeed = 0.3;     // WD needs actual motion
constexpr double kAutopilotAccel = 2.0;       // m/s^2 toward target speed
constexpr double kVrrConflictRadius = 2.0;    // predicted-path conflict, m
constexpr double kVrrHorizon = 2.0;           // s
constexpr double kVrrBrakeAccel = -0.5;       // braking that counts as yielding

struct RouteTrack {
  std::vector<Vec2> pts;
  std::vector<double> cum;
  double length = 0.0;

  void build(const MiniMap& map, const corpus::RouteCandidate& route) {
    pts = corpus::route_polyline(map, route);
    cum.assign(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i) {
      cum[i] = cum[i - 1] + corpus::norm(pts[i] - pts[i - 1]);
    }
    length = cum.empty() ? 0.0 : cum.back();
  }

  Vec2 pos_at(double s) const {
    if (pts.empty()) return {};
    if (pts.size() == 1) return pts.front();
    s = std::clamp(s, 0.0, length);
    size_t i = 1;
    while (i + 1 < pts.size() && cum[i] < s) ++i;
    double seg = cum[i] - cum[i - 1];
    double u = seg > 0 ? (s - cum[i - 1]) / seg : 0.0;
    return pts[i - 1] + (pts[i] - pts[i - 1]) * u;
  }

  Vec2 dir_at(double s) const {
    if (pts.size() < 2) return {1.0, 0.0};
    s = std::clamp(s, 0.0, length);
    size_t i = 1;
    while (i + 1 < pts.size() && cum[i] < s) ++i;
    Vec2 d = pts[i] - pts[i - 1];
    double n = corpus::norm(d);
    return n > 0 ? d * (1.0 / n) : Vec2{1.0, 0.0};
  }
};

struct EventRuntime {
  const doc::StoryEvent* event = nullptr;
  enum class Phase { Pending, Delayed, Active, Complete } phase = Phase::Pending;
  double delay_left = 0.0;
  double elapsed = 0.0;
  double v0 = 0.0;
  double offset0 = 0.0;
};

}  // namespace

struct Simulation::Impl {
  const doc::TargetDocument& document;
  const MiniMap& map;
  MonitorSpec spec;
  EgoPolicy ego_policy;

  struct Actor {
    const doc::Entity* entity = nullptr;
    bool has_route = false;
    RouteTrack track;
    double route_s = 0.0;
    double speed = 0.0;
    double lateral = 0.0;  // offset from the route track centerline, +left
    Vec2 pos;
    double heading = 0.0;
    bool scripted = false;  // ego replayed from a trace

    // assigned-lane state for monitors
    std::string lane_id;
    double lane_s = 0.0;
    double lane_offset = 0.0;

    std::vector<EventRuntime> events;
    // monitor state
    bool li_outside = false;
    bool or_outside = false;
    bool rsl_over = false;
    double wd_accum = 0.0;
    bool wd_fired = false;
    double standstill_accum = 0.0;
    double prev_speed = 0.0;
  };

  std::vector<Actor> actors;
  WorldState state;
  std::vector<ViolationEvent> events;
  std::map<std::string, int> counts;
  double timeout_s = 0.0;
  bool finished = false;
  bool goal_reached = false;
  bool timed_out = false;
  std::map<std::string, bool> collision_pairs;
  std::map<std::string, bool> vrr_active;
  std::map<std::string, bool> signal_crossed;   // per stop line key
  std::map<std::string, double> stop_accum;     // standstill near stop lines

  Impl(const doc::TargetDocument& d, const MiniMap& m, MonitorSpec s, EgoPolicy p)
      : document(d), map(m), spec(std::move(s)), ego_policy(std::move(p)) {
    for (const doc::Entity& entity : d.entities) {
      Actor actor;
      actor.entity = &entity;
      actor.pos = {entity.spawn.x, entity.spawn.y};
      actor.heading = entity.spawn.heading;
      actor.speed = entity.spawn.speed;
      actor.prev_speed = actor.speed;
      actor.lane_id = entity.spawn.lane_id;
      actor.lane_s = entity.spawn.s;
      if (const doc::RouteAssignment* route = d.find_route(entity.actor_id)) {
        actor.has_route = true;
        actor.track.build(m, route->route);
      }
      if (const doc::ActorStory* story = find_story(entity.actor_id)) {
        for (const doc::StoryEvent& ev : story->events) {
          EventRuntime er;
          er.event = &ev;
          actor.events.push_back(er);
        }
      }
      actor.scripted =
          entity.is_ego && std::holds_alternative<ScriptedEgo>(ego_policy);
      actors.push_back(std::move(actor));
    }
    for (const std::string& id : monitor_ids()) {
      if (spec.enabled.count(id)) counts[id] = 0;
    }
    timeout_s = spec.timeout_limit;
    if (timeout_s <= 0.0) {
      for (const doc::MonitorCriterion& mc : d.monitors) {
        if (mc.monitor_id == "TO" && mc.value > 0.0) timeout_s = mc.value;
      }
    }
    if (timeout_s <= 0.0) {
      if (const doc::RouteAssignment* ego_route = d.find_route("ego")) {
        timeout_s = timeout_limit(ego_route->route.length, m.speed_limit);
      } else {
        timeout_s = kHardCap;
      }
    }
    fire_triggers(0.0);  // OnStart events are live from the first frame
    refresh_state();
  }

  const doc::ActorStory* find_story(const std::string& actor_id) const {
    for (const doc::ActorStory& s : document.stories) {
      if (s.actor_id == actor_id) return &s;
    }
    return nullptr;
  }

  Actor* ego() {
    for (Actor& a : actors) {
      if (a.entity->is_ego) return &a;
    }
    return nullptr;
  }

  void emit_event(const std::string& monitor, const std::string& actor,
                  const std::string& detail) {
    if (!spec.enabled.count(monitor)) return;
    events.push_back({monitor, state.time, actor, detail});
    counts[monitor] += 1;
  }

  // Project onto the assigned lane, following successors or reassigning to
  // the nearest lane when the actor runs off the end.
  void update_assigned_lane(Actor& actor) {
    const Lane* lane = map.find_lane(actor.lane_id);
    if (!lane) {
      nearest_lane(actor);
      lane = map.find_lane(actor.lane_id);
      if (!lane) return;
    }
    auto [s, dist] = lane->nearest(actor.pos);
    if (s >= lane->length - 1e-6 && !lane->successors.empty()) {
      const Lane* next = nullptr;
      double best = 1e18;
      for (const std::string& id : lane->successors) {
        const Lane& cand = map.lane(id);
        auto [cs, cd] = cand.nearest(actor.pos);
        (void)cs;
        if (cd < best) {
          best = cd;
          next = &cand;
        }
      }
      if (next && best < dist + 0.5) {
        actor.lane_id = next->id;
        auto [ns, nd] = next->nearest(actor.pos);
        (void)nd;
        actor.lane_s = ns;
        compute_lane_offset(actor);
        return;
      }
    }
    actor.lane_s = s;
    compute_lane_offset(actor);
  }

  void nearest_lane(Actor& actor) {
    double best = 1e18;
    for (const Lane& lane : map.lanes) {
      auto [s, d] = lane.nearest(actor.pos);
      if (d < best) {
        best = d;
        actor.lane_id = lane.id;
        actor.lane_s = s;
      }
    }
    compute_lane_offset(actor);
  }

  void compute_lane_offset(Actor& actor) {
    const Lane& lane = map.lane(actor.lane_id);
    Vec2 center = lane.position_at(actor.lane_s);
    Vec2 dir = lane.direction_at(actor.lane_s);
    Vec2 delta = actor.pos - center;
    // +left of travel direction
    actor.lane_offset = dir.x * delta.y - dir.y * delta.x;
  }

  void refresh_state() {
    state.actors.clear();
    for (const Actor& a : actors) {
      ActorState s;
      s.actor_id = a.entity->actor_id;
      s.x = a.pos.x;
      s.y = a.pos.y;
      s.heading = a.heading;
      s.speed = a.speed;
      s.lane_id = a.lane_id;
      s.s = a.lane_s;
      s.lateral_offset = a.lane_offset;
      s.route_s = a.route_s;
      state.actors.push_back(std::move(s));
    }
    state.signal_phases.clear();
    for (const corpus::SignalHead& sig : map.signals) {
      state.signal_phases[sig.id] = sig.phase_at(state.time);
    }
    state.active_events.clear();
    state.completed_events.clear();
    for (const Actor& a : actors) {
      for (const EventRuntime& er : a.events) {
        if (er.phase == EventRuntime::Phase::Active) {
          state.active_events.push_back(er.event->name);
        } else if (er.phase == EventRuntime::Phase::Complete) {
          state.completed_events.push_back(er.event->name);
        }
      }
    }
  }

  double event_param(const doc::StoryEvent& ev, const std::string& key,
                     double fallback) const {
    auto it = ev.params.find(key);
    return it == ev.params.end() ? fallback : it->second;
  }

  void advance_actor(Actor& actor, double dt) {
    if (actor.scripted) {
      const auto& trace = std::get<ScriptedEgo>(ego_policy);
      EgoTraceFrame f = trace.at(state.time + dt);
      actor.pos = {f.x, f.y};
      actor.heading = f.heading;
      actor.speed = f.speed;
      return;
    }
    if (!actor.has_route) return;  // static scenery

    EventRuntime* active = nullptr;
    for (EventRuntime& er : actor.events) {
      if (er.phase == EventRuntime::Phase::Active) active = &er;
    }

    double target_speed = actor.speed;  // coast by default
    bool lateral_motion = false;
    double lateral_target = actor.lateral;
    double duration = 0.0;

    if (active) {
      const doc::StoryEvent& ev = *active->event;
      duration = event_param(ev, "duration", 3.0);
      switch (ev.action) {
        case StandardAction::Accelerate:
        case StandardAction::Decelerate:
        case StandardAction::Cruise:
        case StandardAction::Stop:
        case StandardAction::Yield: {
          double target = event_param(ev, "target_speed", 0.0);
          double u = duration > 0 ? std::min(1.0, (active->elapsed + dt) / duration) : 1.0;
          target_speed = active->v0 + (target - active->v0) * u;
          break;
        }
        case StandardAction::ChangeLane:
        case StandardAction::ChangeLaneLeft:
        case StandardAction::ChangeLaneRight: {
          double direction = event_param(ev, "direction",
                                         ev.action == StandardAction::ChangeLaneRight
                                             ? -1.0
                                             : 1.0);
          lateral_motion = true;
          lateral_target = active->offset0 + direction * map.lane_width;
          double u = duration > 0 ? std::min(1.0, (active->elapsed + dt) / duration) : 1.0;
          // smooth sinusoidal blend
          double blend = (1.0 - std::cos(u * 3.14159265358979323846)) / 2.0;
          actor.lateral = active->offset0 +
                          (lateral_target - active->offset0) * blend;
          break;
        }
        case StandardAction::KeepLane:
          break;
        case StandardAction::Autopilot: {
          double target = event_param(ev, "target_speed", 0.8 * map.speed_limit);
          double dv = std::clamp(target - actor.speed, -kAutopilotAccel * dt,
                                 kAutopilotAccel * dt);
          target_speed = actor.speed + dv;
          break;
        }
      }
      active->elapsed += dt;
      bool complete = false;
      if (ev.action == StandardAction::Autopilot) {
        complete = actor.route_s >= actor.track.length - 1e-6;
      } else {
        complete = active->elapsed >= duration - 1e-9;
      }
      if (complete) active->phase = EventRuntime::Phase::Complete;
    }

    actor.speed = std::max(0.0, target_speed);
    actor.route_s = std::min(actor.track.length, actor.route_s + actor.speed * dt);
    if (actor.route_s >= actor.track.length - 1e-9) actor.speed = 0.0;

    Vec2 base = actor.track.pos_at(actor.route_s);
    Vec2 dir = actor.track.dir_at(actor.route_s);
    Vec2 left{-dir.y, dir.x};
    actor.pos = base + left * actor.lateral;
    actor.heading = std::atan2(dir.y, dir.x);
    (void)lateral_motion;
  }

  void fire_triggers(double now) {
    Actor* ego_actor = ego();
    for (Actor& actor : actors) {
      // Events run strictly in chain order.
      EventRuntime* next = nullptr;
      bool any_active = false;
      for (EventRuntime& er : actor.events) {
        if (er.phase == EventRuntime::Phase::Active) any_active = true;
        if (!next && (er.phase == EventRuntime::Phase::Pending ||
                      er.phase == EventRuntime::Phase::Delayed)) {
          next = &er;
        }
      }
      if (!next || any_active) continue;

      if (next->phase == EventRuntime::Phase::Delayed) {
        next->delay_left -= kDt;
        if (next->delay_left <= 1e-9) activate(actor, *next);
        continue;
      }

      const doc::Trigger& trig = next->event->trigger;
      bool condition = false;
      switch (trig.kind) {
        case doc::Trigger::Kind::OnStart:
          condition = now >= 0.0;
          break;
        case doc::Trigger::Kind::AfterPrevious: {
          size_t idx = 0;
          for (; idx < actor.events.size(); ++idx) {
            if (&actor.events[idx] == next) break;
          }
          condition = idx == 0 ||
                      actor.events[idx - 1].phase == EventRuntime::Phase::Complete;
          break;
        }
        case doc::Trigger::Kind::OnDistanceToEgo: {
          if (ego_actor) {
            double d = corpus::norm(actor.pos - ego_actor->pos);
            condition = d <= trig.distance;
          }
          break;
        }
      }
      if (condition) {
        if (trig.delay > 1e-9) {
          next->phase = EventRuntime::Phase::Delayed;
          next->delay_left = trig.delay;
        } else {
          activate(actor, *next);
        }
      }
    }
  }

  void activate(Actor& actor, EventRuntime& er) {
    er.phase = EventRuntime::Phase::Active;
    er.elapsed = 0.0;
    er.v0 = actor.speed;
    er.offset0 = actor.lateral;
  }

  void run_monitors() {
    Actor* e = ego();
    if (!e) return;
    const std::string prev_lane = e->lane_id;
    const double prev_lane_s = e->lane_s;
    update_assigned_lane(*e);
    for (Actor& a : actors) {
      if (!a.entity->is_ego) update_assigned_lane(a);
    }

    const Lane& lane = map.lane(e->lane_id);
    const double half = map.lane_width / 2.0;

    // LI / CSL / OR: offset from the assigned lane centerline.
    const double off = e->lane_offset;
    if (std::abs(off) > half) {
      const bool to_left = off > 0;
      if (!e->li_outside) {
        e->li_outside = true;
        emit_event("LI", "ego",
                   "lane boundary of '" + e->lane_id + "' crossed to the " +
                       (to_left ? "left" : "right"));
        if (document.road_marker == "solid_line" ||
            document.road_marker == "double_solid_line") {
          emit_event("CSL", "ego", "crossed " + document.road_marker);
        }
      }
      const auto& adjacent = to_left ? lane.adjacent_left : lane.adjacent_right;
      if (adjacent) {
        // Completed a legitimate boundary crossing: reassign.
        e->lane_id = *adjacent;
        auto [s, d] = map.lane(*adjacent).nearest(e->pos);
        (void)d;
        e->lane_s = s;
        compute_lane_offset(*e);
        e->li_outside = false;
        e->or_outside = false;
      } else if (std::abs(off) > map.lane_width + spec.out_of_road_margin) {
        if (!e->or_outside) {
          e->or_outside = true;
          emit_event("OR", "ego", "off the road beside lane '" + e->lane_id + "'");
        }
      }
    } else {
      e->li_outside = false;
      e->or_outside = false;
    }

    // RSL: speed above the tolerated limit.
    const double limit = map.speed_limit * (1.0 + spec.speed_tolerance);
    if (e->speed > limit) {
      if (!e->rsl_over) {
        e->rsl_over = true;
        emit_event("RSL", "ego",
                   "speed " + util::format_double(e->speed) + " over limit " +
                       util::format_double(map.speed_limit));
      }
    } else {
      e->rsl_over = false;
    }

    // WD: sustained motion against the assigned lane direction.
    {
      Vec2 lane_dir = lane.direction_at(e->lane_s);
      Vec2 vel{std::cos(e->heading), std::sin(e->heading)};
      if (e->speed > kWrongDirMinSpeed && corpus::dot(vel, lane_dir) < 0.0) {
        e->wd_accum += kDt;
        if (e->wd_accum > spec.wrong_direction_duration && !e->wd_fired) {
          e->wd_fired = true;
          emit_event("WD", "ego", "driving against lane '" + e->lane_id + "'");
        }
      } else {
        e->wd_accum = 0.0;
        e->wd_fired = false;
      }
    }

    // Standstill bookkeeping near stop lines (for RSS).
    for (const corpus::StopSignLine& line : map.stop_lines) {
      if (line.lane_id != e->lane_id) continue;
      const std::string key = "stop:" + line.lane_id + ":" + util::format_double(line.s);
      if (e->lane_s >= line.s - 5.0 && e->lane_s <= line.s &&
          e->speed < kStandstillSpeed) {
        stop_accum[key] += kDt;
      }
    }

    // Crossing detection on the assigned lane (same lane across the step).
    if (prev_lane == e->lane_id && e->lane_s > prev_lane_s) {
      for (const corpus::SignalHead& sig : map.signals) {
        if (sig.lane_id != e->lane_id) continue;
        if (prev_lane_s < sig.s && e->lane_s >= sig.s) {
          if (sig.phase_at(state.time) == corpus::SignalHead::Phase::Red) {
            emit_event("RRL", "ego", "crossed stop line of signal '" + sig.id +
                                         "' during red");
          }
        }
      }
      for (const corpus::StopSignLine& line : map.stop_lines) {
        if (line.lane_id != e->lane_id) continue;
        if (prev_lane_s < line.s && e->lane_s >= line.s) {
          const std::string key =
              "stop:" + line.lane_id + ":" + util::format_double(line.s);
          const double stopped = stop_accum[key];
          if (e->speed > 0.5 && stopped < spec.stop_duration) {
            emit_event("RSS", "ego", "rolled through stop line on '" +
                                         line.lane_id + "'");
          }
          stop_accum[key] = 0.0;
        }
      }
    }

    // VRR: approaching a priority actor's predicted path without braking.
    const double ego_accel = (e->speed - e->prev_speed) / kDt;
    for (Actor& a : actors) {
      if (a.entity->is_ego || !a.entity->priority) continue;
      bool conflict = false;
      Vec2 ev{std::cos(e->heading) * e->speed, std::sin(e->heading) * e->speed};
      Vec2 av{std::cos(a.heading) * a.speed, std::sin(a.heading) * a.speed};
      for (double tau = 0.2; tau <= kVrrHorizon + 1e-9; tau += 0.2) {
        Vec2 ep = e->pos + ev * tau;
        Vec2 ap = a.pos + av * tau;
        if (corpus::norm(ep - ap) < kVrrConflictRadius) {
          conflict = true;
          break;
        }
      }
      const std::string key = a.entity->actor_id;
      if (conflict && ego_accel > kVrrBrakeAccel) {
        if (!vrr_active[key]) {
          vrr_active[key] = true;
          emit_event("VRR", "ego", "failed to yield to '" + key + "'");
        }
      } else if (!conflict) {
        vrr_active[key] = false;
      }
    }

    // Collision: OBB overlap involving the ego.
    for (Actor& a : actors) {
      if (a.entity->is_ego) continue;
      Obb ego_box{e->pos.x, e->pos.y, e->heading, e->entity->length, e->entity->width};
      Obb other{a.pos.x, a.pos.y, a.heading, a.entity->length, a.entity->width};
      const std::string key = a.entity->actor_id;
      if (obb_overlap(ego_box, other)) {
        if (!collision_pairs[key]) {
          collision_pairs[key] = true;
          emit_event("C", "ego", "collision with '" + key + "'");
          finished = true;
        }
      } else {
        collision_pairs[key] = false;
      }
    }

    e->prev_speed = e->speed;
  }

  void check_goal_and_timeout() {
    Actor* e = ego();
    if (!e) return;
    if (e->has_route) {
      Vec2 goal = e->track.pos_at(e->track.length);
      bool reached = e->scripted
                         ? corpus::norm(e->pos - goal) <= kGoalRadius
                         : e->route_s >= e->track.length - kGoalRadius;
      if (reached) {
        goal_reached = true;
        finished = true;
      }
    }
    if (!goal_reached && state.time >= timeout_s) {
      timed_out = true;
      emit_event("TO", "ego",
                 "time limit " + util::format_double(timeout_s) + " s exceeded");
      finished = true;
    }
    if (state.time >= kHardCap) finished = true;
  }

  void step() {
    if (finished) return;
    for (Actor& a : actors) advance_actor(a, kDt);
    state.time += kDt;
    run_monitors();
    fire_triggers(state.time);
    refresh_state();
    check_goal_and_timeout();
  }
};

Simulation::Simulation(const doc::TargetDocument& document, const MiniMap& map,
                       MonitorSpec spec, EgoPolicy ego_policy)
    : impl_(std::make_unique<Impl>(document, map, std::move(spec),
                                   std::move(ego_policy))) {}

Simulation::~Simulation() = default;

void Simulation::step() { impl_->step(); }

const WorldState& Simulation::state() const { return impl_->state; }

bool Simulation::finished() const { return impl_->finished; }

EvaluationReport Simulation::report() const {
  EvaluationReport report;
  report.scenario = impl_->document.meta.name;
  report.counts = impl_->counts;
  report.events = impl_->events;
  report.duration = impl_->state.time;
  report.goal_reached = impl_->goal_reached;
  report.timed_out = impl_->timed_out;
  return report;
}

EvaluationReport run(const doc::TargetDocument& document,
                     const corpus::DslCorpus& corpus, const MonitorSpec& spec,
                     const EgoPolicy& ego_policy) {
  const MiniMap* map = corpus.find_map(document.map_id);
  if (!map) {
    throw MapMismatchError("run: document references map '" + document.map_id +
                           "' which is not bundled");
  }
  Simulation sim(document, *map, spec, ego_policy);
  while (!sim.finished()) sim.step();
  return sim.report();
}

std::string EvaluationReport::to_json() const {
  ordered_json j;
  j["scenario"] = scenario;
  ordered_json jc;
  for (const std::string& id : monitor_ids()) {
    auto it = counts.find(id);
    if (it != counts.end()) jc[id] = it->second;
  }
  j["counts"] = std::move(jc);
  j["events"] = ordered_json::array();
  for (const ViolationEvent& e : events) {
    j["events"].push_back(ordered_json{{"monitor", e.monitor_id},
                                       {"time", e.time},
                                       {"actor", e.actor},
                                       {"detail", e.detail}});
  }
  j["duration"] = duration;
  j["goal_reached"] = goal_reached;
  j["timed_out"] = timed_out;
  return j.dump(2) + "\n";
}

}  // namespace scenforge::exec
