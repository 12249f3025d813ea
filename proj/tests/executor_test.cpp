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

#include <cmath>
#include <doctest.h>

#include "helpers.hpp"
#include "scenforge/errors.hpp"
#include "scenforge/executor.hpp"
#include "scenforge/util.hpp"

using namespace scenforge;
using namespace scenforge::exec;
using corpus::MiniMap;
using testhelpers::bundled_corpus;

namespace {

doc::Entity make_vehicle(const std::string& id, const std::string& lane_id, double s,
                         const MiniMap& map, double speed, bool is_ego = false) {
  doc::Entity e;
  e.actor_id = id;
  e.category = "car";
  e.is_ego = is_ego;
  const corpus::Lane& lane = map.lane(lane_id);
  corpus::Vec2 pos = lane.position_at(s);
  e.spawn = {lane_id, s, pos.x, pos.y, lane.heading_at(s), speed};
  return e;
}

doc::RouteAssignment make_route(const std::string& actor,
                                std::vector<std::string> lane_path, const MiniMap& map,
                                int start_index = 0) {
  doc::RouteAssignment a;
  a.actor_id = actor;
  a.route.map_id = map.map_id;
  a.route.lane_path = lane_path;
  a.route.start = {lane_path.front(), start_index};
  const corpus::Lane& last = map.lane(lane_path.back());
  a.route.end = {lane_path.back(), static_cast<int>(last.points.size()) - 1};
  a.route.label = corpus::route_label(map, lane_path, a.route.start, a.route.end);
  auto pts = corpus::route_polyline(map, a.route);
  a.route.length = 0;
  for (size_t i = 1; i < pts.size(); ++i) a.route.length += corpus::norm(pts[i] - pts[i - 1]);
  a.start_s = map.lane(lane_path.front()).cumulative_s[static_cast<size_t>(start_index)];
  a.end_s = last.length;
  return a;
}

// Linear ego trace along the +x axis of the straight map's "right" lane.
ScriptedEgo straight_trace(double y, double speed, double t_end, double x0 = 0.0,
                           double heading = 0.0) {
  ScriptedEgo ego;
  for (double t = 0.0; t <= t_end + 1e-9; t += 1.0) {
    ego.frames.push_back({t, x0 + speed * t, y, heading, speed});
  }
  return ego;
}

MonitorSpec only(const std::string& id, double timeout = 120.0) {
  MonitorSpec spec;
  spec.enabled = {id};
  spec.timeout_limit = timeout;
  return spec;
}

doc::TargetDocument straight_doc() {
  const MiniMap& map = bundled_corpus().map("straight_two_lane");
  doc::TargetDocument d;
  d.meta.name = "exec_test";
  d.map_id = map.map_id;
  d.map_fragment_xml = "<LogicFile filepath=\"maps/straight_two_lane.map.json\"/>";
  d.entities.push_back(make_vehicle("ego", "right", 0.0, map, 10.0, true));
  d.routes.push_back(make_route("ego", {"right"}, map));
  return d;
}

int count_of(const EvaluationReport& report, const std::string& id) {
  auto it = report.counts.find(id);
  return it == report.counts.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("timeout_limit formula and domain") {
  CHECK(timeout_limit(500.0, 13.889) == doctest::Approx(360.0).epsilon(0.001));
  CHECK(timeout_limit(100.0, 10.0) == doctest::Approx(100.0));
  CHECK(timeout_limit(2 * 123.0, 7.7) == doctest::Approx(2 * timeout_limit(123.0, 7.7)));
  CHECK_THROWS_AS(timeout_limit(0.0, 10.0), DomainError);
  CHECK_THROWS_AS(timeout_limit(10.0, -1.0), DomainError);
}

TEST_CASE("kinematics: cruise advances arc length linearly") {
  const MiniMap& map = bundled_corpus().map("straight_two_lane");
  doc::TargetDocument d = straight_doc();
  doc::StoryEvent cruise;
  cruise.name = "ego_ev1_cruise";
  cruise.action = doc::StandardAction::Cruise;
  cruise.params = {{"target_speed", 10.0}, {"duration", 100.0}};
  cruise.trigger.kind = doc::Trigger::Kind::OnStart;
  d.stories.push_back({"ego", {cruise}});

  Simulation sim(d, map, only("C"), LaneFollowEgo{});
  for (int i = 0; i < 10; ++i) sim.step();  // 1.0 s
  const ActorState* ego = sim.state().find_actor("ego");
  REQUIRE(ego != nullptr);
  CHECK(ego->route_s == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(ego->speed == doctest::Approx(10.0));
}

TEST_CASE("kinematics: decelerate follows the closed form and clamps at zero") {
  const MiniMap& map = bundled_corpus().map("straight_two_lane");
  doc::TargetDocument d = straight_doc();
  doc::StoryEvent dec;
  dec.name = "ego_ev1_decelerate";
  dec.action = doc::StandardAction::Decelerate;
  dec.params = {{"target_speed", 5.0}, {"duration", 3.0}};
  dec.trigger.kind = doc::Trigger::Kind::OnStart;
  d.stories.push_back({"ego", {dec}});

  Simulation sim(d, map, only("C"), LaneFollowEgo{});
  for (int i = 0; i < 30; ++i) sim.step();  // 3.0 s
  const ActorState* ego = sim.state().find_actor("ego");
  CHECK(ego->speed == doctest::Approx(5.0).epsilon(1e-6));
  for (int i = 0; i < 50; ++i) sim.step();
  ego = sim.state().find_actor("ego");
  CHECK(ego->speed >= 0.0);
}

TEST_CASE("zero acceleration keeps speed constant to 1e-9") {
  const MiniMap& map = bundled_corpus().map("straight_two_lane");
  doc::TargetDocument d = straight_doc();
  doc::StoryEvent cruise;
  cruise.name = "ego_ev1_cruise";
  cruise.action = doc::StandardAction::Cruise;
  cruise.params = {{"target_speed", 10.0}, {"duration", 15.0}};
  cruise.trigger.kind = doc::Trigger::Kind::OnStart;
  d.stories.push_back({"ego", {cruise}});
  Simulation sim(d, map, only("C"), LaneFollowEgo{});
  for (int i = 0; i < 100; ++i) {
    sim.step();
    if (sim.finished()) break;
    CHECK(sim.state().find_actor("ego")->speed == doctest::Approx(10.0).epsilon(1e-9));
  }
}

TEST_CASE("OnDistanceToEgo trigger activates on the next frame") {
  const MiniMap& map = bundled_corpus().map("straight_two_lane");
  doc::TargetDocument d = straight_doc();
  d.entities[0].spawn.speed = 0.0;  // ego parked at s=0
  d.entities.push_back(make_vehicle("tp1", "right", 29.5, map, 0.0));
  d.routes.push_back(make_route("tp1", {"right"}, map, 3));
  doc::StoryEvent ev;
  ev.name = "tp1_ev1_accelerate";
  ev.action = doc::StandardAction::Accelerate;
  ev.params = {{"target_speed", 5.0}, {"duration", 3.0}};
  ev.trigger.kind = doc::Trigger::Kind::OnDistanceToEgo;
  ev.trigger.distance = 30.0;
  d.stories.push_back({"tp1", {ev}});

  Simulation sim(d, map, only("C"), LaneFollowEgo{});
  sim.step();  // distance 29.5 <= 30: trigger fires, event active next frame
  bool active_now =
      std::find(sim.state().active_events.begin(), sim.state().active_events.end(),
                "tp1_ev1_accelerate") != sim.state().active_events.end();
  CHECK(active_now);
  double v0 = sim.state().find_actor("tp1")->speed;
  sim.step();
  CHECK(sim.state().find_actor("tp1")->speed > v0);
}

TEST_CASE("monitor RRL: red-light crossing fires exactly once; green is clean") {
  const MiniMap& map = bundled_corpus().map("intersection");
  doc::TargetDocument d;
  d.map_id = "intersection";
  d.entities.push_back(make_vehicle("ego", "s_in", 60.0, map, 0.0, true));
  d.routes.push_back(make_route("ego", {"s_in", "s_x_n", "n_out"}, map, 6));

  // signal sig_s: green [0,10), yellow [10,13), red [13,25)
  SUBCASE("crossing during red") {
    ScriptedEgo ego;
    ego.frames = {{0.0, 1.75, -13.5, M_PI / 2, 0.0},
                  {14.0, 1.75, -13.5, M_PI / 2, 0.0},
                  {16.0, 1.75, -6.0, M_PI / 2, 5.0},
                  {35.0, 1.75, 90.0, M_PI / 2, 6.0}};
    auto report = run(d, bundled_corpus(), only("RRL"), ego);
    CHECK(count_of(report, "RRL") == 1);
    CHECK(report.events.size() == 1);
    CHECK(report.goal_reached);
  }
  SUBCASE("crossing during green") {
    ScriptedEgo ego;
    ego.frames = {{0.0, 1.75, -30.0, M_PI / 2, 10.0},
                  {12.0, 1.75, 90.0, M_PI / 2, 10.0}};
    auto report = run(d, bundled_corpus(), only("RRL"), ego);
    CHECK(count_of(report, "RRL") == 0);
    CHECK(report.goal_reached);
  }
}

TEST_CASE("monitor RSS: rolling a stop sign fires; a full stop is clean") {
  const MiniMap& map = bundled_corpus().map("t_junction");
  doc::TargetDocument d;
  d.map_id = "t_junction";
  d.entities.push_back(make_vehicle("ego", "s_in", 40.0, map, 8.0, true));
  d.routes.push_back(make_route("ego", {"s_in", "s_x_e", "e_out"}, map, 4));

  auto tail = [](ScriptedEgo& ego, double t0) {
    // carry on through the right turn to the e_out end
    ego.frames.push_back({t0 + 1.0, 1.75, -10.0, M_PI / 2, 8.0});
    ego.frames.push_back({t0 + 3.0, 10.0, -1.75, 0.0, 8.0});
    ego.frames.push_back({t0 + 14.0, 90.0, -1.75, 0.0, 8.0});
  };

  SUBCASE("rolls through at 8 m/s") {
    ScriptedEgo ego;
    ego.frames = {{0.0, 1.75, -50.0, M_PI / 2, 8.0}, {4.75, 1.75, -12.0, M_PI / 2, 8.0}};
    tail(ego, 4.75);
    auto report = run(d, bundled_corpus(), only("RSS"), ego);
    CHECK(count_of(report, "RSS") == 1);
  }
  SUBCASE("stops 1.5 s just before the line") {
    ScriptedEgo ego;
    ego.frames = {{0.0, 1.75, -50.0, M_PI / 2, 8.0},
                  {4.5, 1.75, -13.0, M_PI / 2, 0.0},
                  {6.2, 1.75, -13.0, M_PI / 2, 0.0},
                  {8.0, 1.75, -10.5, M_PI / 2, 2.0}};
    tail(ego, 8.0);
    auto report = run(d, bundled_corpus(), only("RSS"), ego);
    CHECK(count_of(report, "RSS") == 0);
    CHECK(report.goal_reached);
  }
}

TEST_CASE("monitor RSL: speeding fires once per excursion") {
  doc::TargetDocument d = straight_doc();
  SUBCASE("16 m/s against a 13.889 limit") {
    auto report = run(d, bundled_corpus(), only("RSL"), straight_trace(0.0, 16.0, 14.0));
    CHECK(count_of(report, "RSL") == 1);
  }
  SUBCASE("12 m/s stays under the tolerated limit") {
    auto report = run(d, bundled_corpus(), only("RSL"), straight_trace(0.0, 12.0, 18.0));
    CHECK(count_of(report, "RSL") == 0);
    CHECK(report.goal_reached);
  }
}

TEST_CASE("monitor LI: boundary crossing fires; lane keeping is clean") {
  doc::TargetDocument d = straight_doc();
  SUBCASE("drift across the left boundary") {
    ScriptedEgo ego;
    for (double t = 0.0; t <= 20.0; t += 1.0) {
      double y = t < 5.0 ? 0.0 : std::min(3.5, (t - 5.0) * 1.0);
      ego.frames.push_back({t, 10.0 * t, y, 0.0, 10.0});
    }
    auto report = run(d, bundled_corpus(), only("LI"), ego);
    CHECK(count_of(report, "LI") == 1);
  }
  SUBCASE("small in-lane offset") {
    auto report = run(d, bundled_corpus(), only("LI"), straight_trace(0.4, 10.0, 21.0));
    CHECK(count_of(report, "LI") == 0);
  }
}

TEST_CASE("monitor CSL: crossing fires only over a solid marking") {
  doc::TargetDocument d = straight_doc();
  ScriptedEgo drift;
  for (double t = 0.0; t <= 20.0; t += 1.0) {
    double y = t < 5.0 ? 0.0 : std::min(3.5, (t - 5.0) * 1.0);
    drift.frames.push_back({t, 10.0 * t, y, 0.0, 10.0});
  }
  SUBCASE("solid line") {
    d.road_marker = "solid_line";
    auto report = run(d, bundled_corpus(), only("CSL"), drift);
    CHECK(count_of(report, "CSL") == 1);
  }
  SUBCASE("no marking metadata") {
    d.road_marker = "none";
    auto report = run(d, bundled_corpus(), only("CSL"), drift);
    CHECK(count_of(report, "CSL") == 0);
  }
}

TEST_CASE("monitor OR: leaving the road fires; staying on it is clean") {
  doc::TargetDocument d = straight_doc();
  SUBCASE("runs off to the right") {
    ScriptedEgo ego;
    for (double t = 0.0; t <= 16.0; t += 1.0) {
      double y = t < 4.0 ? 0.0 : -std::min(6.0, (t - 4.0) * 1.5);
      ego.frames.push_back({t, 10.0 * t, y, 0.0, 10.0});
    }
    auto report = run(d, bundled_corpus(), only("OR"), ego);
    CHECK(count_of(report, "OR") == 1);
  }
  SUBCASE("stays within the lane width") {
    auto report = run(d, bundled_corpus(), only("OR"), straight_trace(-1.0, 10.0, 21.0));
    CHECK(count_of(report, "OR") == 0);
  }
}

TEST_CASE("monitor WD: sustained wrong-way motion fires after one second") {
  doc::TargetDocument d = straight_doc();
  SUBCASE("driving against the lane direction") {
    ScriptedEgo ego;
    for (double t = 0.0; t <= 10.0; t += 1.0) {
      ego.frames.push_back({t, 150.0 - 6.0 * t, 0.0, M_PI, 6.0});
    }
    auto report = run(d, bundled_corpus(), only("WD", 9.0), ego);
    CHECK(count_of(report, "WD") == 1);
  }
  SUBCASE("with the lane direction") {
    auto report = run(d, bundled_corpus(), only("WD"), straight_trace(0.0, 10.0, 21.0));
    CHECK(count_of(report, "WD") == 0);
  }
}

TEST_CASE("monitor VRR: failing to brake for a priority actor fires") {
  doc::TargetDocument d = straight_doc();
  doc::Entity walker;
  walker.actor_id = "ped1";
  walker.category = "pedestrian";
  walker.length = 0.5;
  walker.width = 0.5;
  walker.priority = true;
  const MiniMap& map = bundled_corpus().map("straight_two_lane");
  corpus::Vec2 pos = map.lane("right").position_at(80.0);
  walker.spawn = {"right", 80.0, pos.x, pos.y, 0.0, 0.0};
  d.entities.push_back(walker);

  SUBCASE("constant speed into the conflict") {
    auto report = run(d, bundled_corpus(), only("VRR", 12.0), straight_trace(0.0, 10.0, 12.0));
    CHECK(count_of(report, "VRR") == 1);
  }
  SUBCASE("braking resolves the conflict") {
    ScriptedEgo ego;
    // decelerate from 10 m/s to standstill well before the pedestrian
    double x = 0.0;
    double v = 10.0;
    for (double t = 0.0; t <= 12.0; t += 0.5) {
      ego.frames.push_back({t, x, 0.0, 0.0, v});
      x += v * 0.5;
      v = std::max(0.0, v - 1.25);
    }
    auto report = run(d, bundled_corpus(), only("VRR", 12.0), ego);
    CHECK(count_of(report, "VRR") == 0);
  }
}

TEST_CASE("monitor C: rear-end collision is terminal; adjacent pass is clean") {
  const MiniMap& map = bundled_corpus().map("straight_two_lane");
  doc::TargetDocument d = straight_doc();
  SUBCASE("parked car in the ego lane") {
    d.entities.push_back(make_vehicle("tp1", "right", 60.0, map, 0.0));
    auto report = run(d, bundled_corpus(), only("C"), straight_trace(0.0, 10.0, 20.0));
    CHECK(count_of(report, "C") == 1);
    CHECK_FALSE(report.goal_reached);
    CHECK(report.duration < 7.0);  // stopped at the crash, not the trace end
  }
  SUBCASE("parked car in the adjacent lane") {
    d.entities.push_back(make_vehicle("tp1", "left", 60.0, map, 0.0));
    auto report = run(d, bundled_corpus(), only("C"), straight_trace(0.0, 10.0, 21.0));
    CHECK(count_of(report, "C") == 0);
    CHECK(report.goal_reached);
  }
}

TEST_CASE("monitor TO: stationary ego times out exactly once") {
  doc::TargetDocument d = straight_doc();
  SUBCASE("never moves") {
    auto report = run(d, bundled_corpus(), only("TO", 5.0), straight_trace(0.0, 0.0, 10.0));
    CHECK(count_of(report, "TO") == 1);
    CHECK(report.timed_out);
    CHECK(report.duration == doctest::Approx(5.0).epsilon(0.05));
  }
  SUBCASE("reaches the goal in time") {
    auto report = run(d, bundled_corpus(), only("TO", 120.0), straight_trace(0.0, 10.0, 21.0));
    CHECK(count_of(report, "TO") == 0);
    CHECK(report.goal_reached);
    CHECK_FALSE(report.timed_out);
  }
}

TEST_CASE("run is deterministic") {
  doc::TargetDocument d = straight_doc();
  MonitorSpec spec;
  spec.timeout_limit = 30.0;
  auto r1 = run(d, bundled_corpus(), spec, straight_trace(0.0, 10.0, 21.0));
  auto r2 = run(d, bundled_corpus(), spec, straight_trace(0.0, 10.0, 21.0));
  CHECK(r1.to_json() == r2.to_json());
}

TEST_CASE("run rejects unknown maps") {
  doc::TargetDocument d = straight_doc();
  d.map_id = "atlantis";
  CHECK_THROWS_AS(run(d, bundled_corpus(), MonitorSpec{}, LaneFollowEgo{}),
                  MapMismatchError);
}

TEST_CASE("obb_overlap: axis-aligned and rotated cases") {
  Obb a{0, 0, 0, 4, 2};
  Obb b{3.9, 0, 0, 4, 2};
  CHECK(obb_overlap(a, b));
  Obb c{4.2, 0, 0, 4, 2};
  CHECK_FALSE(obb_overlap(a, c));
  // rotated: diagonal box clipping the corner
  Obb diag{3.0, 1.4, M_PI / 4, 4, 2};
  CHECK(obb_overlap(a, diag));
  Obb far{6.0, 6.0, M_PI / 4, 4, 2};
  CHECK_FALSE(obb_overlap(a, far));
}
