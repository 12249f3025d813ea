#!/usr/bin/env python3
"""Generates the bundled demo corpus:

  data/demo/texts/*.txt            description texts
  data/demo/groundtruth/*.rep.json reference representations
  data/demo/scripted_table.json    full-pipeline scripted responses
  data/demo/ablation_table.json    staged responses for the ablation fixtures
  data/demo/ablation_fixtures.json the fixture subset + degradation map
  data/demo/manifests/demo_batch.json

Rerun after editing:  python3 scripts/gen_demo.py
"""
import copy
import json
import os

ROOT = os.path.join(os.path.dirname(__file__), "..", "data", "demo")


def rep(climate=None, topology=None, tf=None, tc=None, ego=None, tps=None, text=""):
    out = {
        "climate": {"weather_type": "none", "density": "none", "time_of_day": "none"},
        "road_topology": {"topology": "none", "lanes": "none"},
        "transportation_facilities": {"road_marker": "none", "traffic_sign": "none"},
        "temporary_changes": {"change_type": "none", "position_relation": "none"},
        "ego_vehicle": {"vehicle_type": "car", "position": "none",
                        "global_behavior": "go_forward"},
        "traffic_participants": [],
        "source_text": text,
    }
    if climate:
        out["climate"].update(climate)
    if topology:
        out["road_topology"].update(topology)
    if tf:
        out["transportation_facilities"].update(tf)
    if tc:
        out["temporary_changes"].update(tc)
    if ego:
        out["ego_vehicle"].update(ego)
    for tp in tps or []:
        entry = {"participant_type": "car", "position_relation": "none",
                 "longitudinal_oracle": "none", "lateral_oracle": "none",
                 "global_behavior": "none", "count": 1}
        entry.update(tp)
        out["traffic_participants"].append(entry)
    return out


CASES = []


def case(slug, text, representation, style):
    representation["source_text"] = text
    CASES.append({"slug": slug, "text": text, "rep": representation, "style": style})


# --- NHTSA-style pre-crash descriptions -------------------------------------
case("signalized_left_turn_oncoming",
     "Vehicle turns left at a signalized intersection across the path of an "
     "oncoming car during the day.",
     rep(climate={"time_of_day": "daytime"},
         topology={"topology": "intersection", "lanes": "two_lanes"},
         tf={"traffic_sign": "traffic_light"},
         ego={"global_behavior": "turn_left"},
         tps=[{"position_relation": "opposite", "longitudinal_oracle": "cruise",
               "global_behavior": "go_forward"}]),
     "nhtsa")

case("lead_vehicle_decelerating",
     "Lead vehicle decelerates suddenly on a two-lane straight road and the "
     "following vehicle must respond.",
     rep(topology={"topology": "straight", "lanes": "two_lanes"},
         tps=[{"position_relation": "front", "longitudinal_oracle": "decelerate",
               "lateral_oracle": "keep_lane", "global_behavior": "go_forward"}]),
     "nhtsa")

case("truck_keeps_adjacent_lane",
     "A truck in the adjacent right lane keeps its lane while the vehicle "
     "proceeds along a three-lane highway.",
     rep(topology={"topology": "highway", "lanes": "three_lanes"},
         ego={"position": "middle_lane"},
         tps=[{"participant_type": "truck", "position_relation": "right",
               "longitudinal_oracle": "cruise", "lateral_oracle": "keep_lane",
               "global_behavior": "go_forward"}]),
     "nhtsa")

case("t_junction_stop_sign_pedestrian",
     "Vehicle approaches a T-junction controlled by a stop sign with a "
     "pedestrian ahead on the road.",
     rep(topology={"topology": "t_junction", "lanes": "two_lanes"},
         tf={"traffic_sign": "stop_sign"},
         tps=[{"participant_type": "pedestrian", "position_relation": "front",
               "longitudinal_oracle": "stop"}]),
     "nhtsa")

case("rainy_intersection_oncoming_truck",
     "Vehicle crosses an intersection on a rainy day while a truck approaches "
     "from the opposite direction.",
     rep(climate={"weather_type": "rainy", "density": "medium",
                  "time_of_day": "daytime"},
         topology={"topology": "intersection", "lanes": "two_lanes"},
         tps=[{"participant_type": "truck", "position_relation": "opposite",
               "longitudinal_oracle": "cruise", "global_behavior": "go_forward"}]),
     "nhtsa")

case("t_junction_right_turn_bicycle",
     "At an unsignalized T-junction the vehicle turns right while a bicycle "
     "keeps to the lane ahead.",
     rep(topology={"topology": "t_junction", "lanes": "two_lanes"},
         ego={"global_behavior": "turn_right"},
         tps=[{"participant_type": "bicycle", "position_relation": "front",
               "longitudinal_oracle": "cruise", "lateral_oracle": "keep_lane",
               "global_behavior": "go_forward"}]),
     "nhtsa")

case("roundabout_dusk_van",
     "Vehicle enters a roundabout at dusk behind a slow moving van.",
     rep(climate={"time_of_day": "dusk"},
         topology={"topology": "roundabout"},
         tps=[{"participant_type": "van", "position_relation": "front",
               "longitudinal_oracle": "decelerate", "global_behavior": "go_forward"}]),
     "nhtsa")

case("curve_fog_motorcycle",
     "Vehicle follows a motorcycle through a curved road section in fog.",
     rep(climate={"weather_type": "foggy", "density": "medium"},
         topology={"topology": "curve", "lanes": "single_lane"},
         tps=[{"participant_type": "motorcycle", "position_relation": "front",
               "longitudinal_oracle": "cruise", "lateral_oracle": "keep_lane",
               "global_behavior": "go_forward"}]),
     "nhtsa")

# --- C-NCAP-style test protocol texts ---------------------------------------
case("ccr_stationary_target",
     "The ego car approaches a stationary car in its lane on a straight "
     "two-lane road in the daytime.",
     rep(climate={"time_of_day": "daytime"},
         topology={"topology": "straight", "lanes": "two_lanes"},
         tps=[{"position_relation": "front", "longitudinal_oracle": "stop"}]),
     "cncap")

case("ccr_braking_target",
     "The ego car follows a car that brakes heavily from medium speed on a "
     "straight road.",
     rep(topology={"topology": "straight", "lanes": "two_lanes"},
         tps=[{"position_relation": "front", "longitudinal_oracle": "decelerate",
               "lateral_oracle": "keep_lane", "global_behavior": "go_forward"}]),
     "cncap")

case("highway_cut_in_from_left",
     "A car cuts into the ego lane from the left lane of a three-lane highway.",
     rep(topology={"topology": "highway", "lanes": "three_lanes"},
         ego={"position": "right_lane"},
         tps=[{"position_relation": "left", "global_behavior": "cut_in"}]),
     "cncap")

case("pedestrian_standing_dusk",
     "The ego car encounters a pedestrian standing in its lane on a straight "
     "road in the evening.",
     rep(climate={"time_of_day": "dusk"},
         topology={"topology": "straight", "lanes": "two_lanes"},
         tps=[{"participant_type": "pedestrian", "position_relation": "front",
               "longitudinal_oracle": "stop"}]),
     "cncap")

case("night_snow_highway_truck",
     "The ego car drives at night on a snowy highway with strong snowfall "
     "behind a slow truck.",
     rep(climate={"weather_type": "snowy", "density": "strong",
                  "time_of_day": "nighttime"},
         topology={"topology": "highway", "lanes": "three_lanes"},
         tps=[{"participant_type": "truck", "position_relation": "front",
               "longitudinal_oracle": "cruise", "lateral_oracle": "keep_lane",
               "global_behavior": "go_forward"}]),
     "cncap")

case("work_zone_cones",
     "The ego car passes a cone barrel work zone on the right side of a "
     "straight road.",
     rep(topology={"topology": "straight", "lanes": "two_lanes"},
         tc={"change_type": "cone_barrel", "position_relation": "right"}),
     "cncap")

case("double_solid_van_behind",
     "The ego car keeps its lane on a two-lane road marked with a double solid "
     "line while a van follows behind.",
     rep(topology={"topology": "straight", "lanes": "two_lanes"},
         tf={"road_marker": "double_solid_line"},
         tps=[{"participant_type": "van", "position_relation": "behind",
               "longitudinal_oracle": "cruise", "lateral_oracle": "keep_lane",
               "global_behavior": "go_forward"}]),
     "cncap")

case("night_rain_signal_approach",
     "The ego car approaches a signalized intersection with a traffic light in "
     "heavy rain at night.",
     rep(climate={"weather_type": "rainy", "density": "strong",
                  "time_of_day": "nighttime"},
         topology={"topology": "intersection", "lanes": "two_lanes"},
         tf={"traffic_sign": "traffic_light"}),
     "cncap")

# --- custom expert texts ------------------------------------------------------
case("unprotected_left_turn",
     "Unprotected left turn for traffic vehicle",
     rep(topology={"topology": "intersection", "lanes": "two_lanes"},
         tps=[{"position_relation": "opposite", "longitudinal_oracle": "yield",
               "global_behavior": "turn_left"}]),
     "custom")

case("morning_fog_overtake",
     "In morning fog a truck overtakes the ego vehicle on a three-lane highway.",
     rep(climate={"weather_type": "foggy", "density": "medium",
                  "time_of_day": "morning"},
         topology={"topology": "highway", "lanes": "three_lanes"},
         tps=[{"participant_type": "truck", "position_relation": "behind",
               "global_behavior": "overtake"}]),
     "custom")

case("static_queue_cut_in",
     "The ego vehicle drives in the right lane of a two-lane road beside a "
     "lane of static traffic; a car cuts into its lane from the queue.",
     rep(topology={"topology": "straight", "lanes": "two_lanes"},
         ego={"position": "right_lane"},
         tps=[{"position_relation": "left", "longitudinal_oracle": "stop",
               "count": 3},
              {"position_relation": "left", "global_behavior": "cut_in"}]),
     "custom")

case("t_junction_left_yield_motorcycle",
     "On a rainy evening the ego vehicle turns left at a T-junction while an "
     "oncoming motorcycle continues straight.",
     rep(climate={"weather_type": "rainy", "density": "medium",
                  "time_of_day": "dusk"},
         topology={"topology": "t_junction", "lanes": "two_lanes"},
         ego={"global_behavior": "turn_left"},
         tps=[{"participant_type": "motorcycle", "position_relation": "opposite",
               "longitudinal_oracle": "cruise", "global_behavior": "go_forward"}]),
     "custom")

case("dawn_fog_bicycle_curve",
     "Dense fog at dawn: the ego vehicle follows a bicycle on a single lane "
     "curved road.",
     rep(climate={"weather_type": "foggy", "density": "strong",
                  "time_of_day": "morning"},
         topology={"topology": "curve", "lanes": "single_lane"},
         tps=[{"participant_type": "bicycle", "position_relation": "front",
               "longitudinal_oracle": "cruise", "lateral_oracle": "keep_lane",
               "global_behavior": "go_forward"}]),
     "custom")

case("warning_bucket_accelerating_car",
     "A warning bucket blocks the road ahead on a two-lane street; the ego "
     "vehicle continues while a car behind accelerates.",
     rep(topology={"topology": "straight", "lanes": "two_lanes"},
         tc={"change_type": "warning_bucket", "position_relation": "front"},
         tps=[{"position_relation": "behind", "longitudinal_oracle": "accelerate",
               "global_behavior": "go_forward"}]),
     "custom")

case("weak_rain_two_left_turners",
     "At a busy intersection in weak rain, the ego vehicle goes straight while "
     "two cars from the opposite direction turn left in sequence.",
     rep(climate={"weather_type": "rainy", "density": "weak"},
         topology={"topology": "intersection", "lanes": "two_lanes"},
         tps=[{"position_relation": "opposite", "longitudinal_oracle": "yield",
               "global_behavior": "turn_left", "count": 2}]),
     "custom")

case("roundabout_morning_van_yield",
     "The ego van approaches a roundabout in the morning and merges behind a "
     "car already on the ring road.",
     rep(climate={"time_of_day": "morning"},
         topology={"topology": "roundabout"},
         ego={"vehicle_type": "van"},
         tps=[{"longitudinal_oracle": "cruise", "global_behavior": "go_forward"}]),
     "custom")


# -----------------------------------------------------------------------------
# response synthesis
# -----------------------------------------------------------------------------

def rep_json(representation):
    return json.dumps(representation, indent=2)


def cot_response(c):
    # Mirrors how a model reply reads: short analysis, then a fenced object.
    return ("Let's think step by step. The text describes the scenario "
            "elements listed below.\n\nFinal scenario representation:\n"
            "```json\n" + rep_json(c["rep"]) + "\n```\n")


def sac_response(c):
    return ("Knowledge validation found no inconsistencies; all elements are "
            "drawn from the repository dictionary.\n```json\n" +
            rep_json(c["rep"]) + "\n```\n")


# Ablation fixtures: per stage, how many of the listed mutations remain.
# Mutations keep values canonical and contradiction-free.
ABLATION = {
    "unprotected_left_turn": [
        ("traffic_participants.0.longitudinal_oracle", "decelerate"),
        ("climate.time_of_day", "nighttime"),
        ("road_topology.topology", "straight"),
    ],
    "lead_vehicle_decelerating": [
        ("traffic_participants.0.longitudinal_oracle", "cruise"),
        ("road_topology.lanes", "three_lanes"),
        ("ego_vehicle.vehicle_type", "truck"),
    ],
    "rainy_intersection_oncoming_truck": [
        ("climate.density", "strong"),
        ("traffic_participants.0.participant_type", "van"),
        ("climate.weather_type", "snowy"),
    ],
    "ccr_stationary_target": [
        ("traffic_participants.0.longitudinal_oracle", "decelerate"),
        ("climate.time_of_day", "morning"),
        ("road_topology.topology", "highway"),
    ],
    "night_snow_highway_truck": [
        ("climate.density", "medium"),
        ("traffic_participants.0.position_relation", "behind"),
        ("climate.time_of_day", "dusk"),
    ],
    "night_rain_signal_approach": [
        ("climate.density", "medium"),
        ("climate.time_of_day", "dusk"),
        ("transportation_facilities.traffic_sign", "stop_sign"),
    ],
}


def mutate(representation, path, value):
    out = copy.deepcopy(representation)
    node = out
    parts = path.split(".")
    for key in parts[:-1]:
        node = node[int(key)] if key.isdigit() else node[key]
    node[parts[-1]] = value
    return out


def degraded(c, wrong):
    out = c["rep"]
    for path, value in ABLATION[c["slug"]][:wrong]:
        out = mutate(out, path, value)
    return out


def wrap(representation):
    return "```json\n" + rep_json(representation) + "\n```\n"


def main():
    for sub in ("texts", "groundtruth", "manifests"):
        os.makedirs(os.path.join(ROOT, sub), exist_ok=True)

    table = {"texts": {}}
    for c in CASES:
        with open(os.path.join(ROOT, "texts", c["slug"] + ".txt"), "w") as f:
            f.write(c["text"] + "\n")
        with open(os.path.join(ROOT, "groundtruth", c["slug"] + ".rep.json"), "w") as f:
            f.write(rep_json(c["rep"]) + "\n")
        table["texts"][c["text"]] = {
            "bp": [cot_response(c)],
            "fs": [cot_response(c)],
            "cot": [cot_response(c)],
            "sac": [sac_response(c)],
        }
    with open(os.path.join(ROOT, "scripted_table.json"), "w") as f:
        json.dump(table, f, indent=1)
        f.write("\n")

    # Staged ablation fixtures: bp carries 3 wrong slots, fs 2, cot 1, the
    # first SAC path 1 and the remaining paths 0, so the self-consistency
    # vote repairs the last slot.
    ablation_table = {"texts": {}}
    fixtures = []
    by_slug = {c["slug"]: c for c in CASES}
    for slug in ABLATION:
        c = by_slug[slug]
        fixtures.append({"slug": slug, "text": c["text"]})
        ablation_table["texts"][c["text"]] = {
            "bp": [wrap(degraded(c, 3))],
            "fs": [wrap(degraded(c, 2))],
            "cot": [wrap(degraded(c, 1))],
            "sac": [wrap(degraded(c, 1)), wrap(degraded(c, 0)), wrap(degraded(c, 0))],
        }
    with open(os.path.join(ROOT, "ablation_table.json"), "w") as f:
        json.dump(ablation_table, f, indent=1)
        f.write("\n")
    with open(os.path.join(ROOT, "ablation_fixtures.json"), "w") as f:
        json.dump({"fixtures": fixtures}, f, indent=1)
        f.write("\n")

    manifest = {
        "cases": [{"text": c["text"],
                   "ground_truth": "data/demo/groundtruth/" + c["slug"] + ".rep.json"}
                  for c in CASES],
        "seeds": [7, 11],
        "out": "out/demo_batch",
        "backend": {"kind": "scripted", "table": "data/demo/scripted_table.json"},
    }
    with open(os.path.join(ROOT, "manifests", "demo_batch.json"), "w") as f:
        json.dump(manifest, f, indent=1)
        f.write("\n")

    print("cases:", len(CASES))


if __name__ == "__main__":
    main()
