#!/usr/bin/env python3
"""Generates the bundled ScriptedEgo traces for the golden left-turn scenario.

The traces replay the ego route of data/golden/unprotected_left_turn.xosc:
  left_turn_clean.trace.json      waits for green (second cycle) -> no events
  left_turn_red_light.trace.json  crosses the stop line during red -> one RRL

Rerun after regenerating the golden file:  python3 scripts/gen_traces.py
"""
import json
import math
import os
import xml.etree.ElementTree as ET

ROOT = os.path.join(os.path.dirname(__file__), "..")
GOLDEN = os.path.join(ROOT, "data", "golden", "unprotected_left_turn.xosc")
MAPS = os.path.join(ROOT, "data", "corpus", "maps")
OUT = os.path.join(ROOT, "data", "demo", "traces")


def load_route(xosc_path):
    tree = ET.parse(xosc_path)
    root = tree.getroot()
    logic = root.find("./RoadNetwork/LogicFile")
    map_id = os.path.basename(logic.get("filepath")).replace(".map.json", "")
    waypoints = []
    for private in root.iter("Private"):
        if private.get("entityRef") != "ego":
            continue
        for lane_pos in private.iter("LanePosition"):
            waypoints.append((lane_pos.get("roadId"), float(lane_pos.get("s"))))
    return map_id, waypoints


def lane_cum(points):
    cum = [0.0]
    for i in range(1, len(points)):
        dx = points[i][0] - points[i - 1][0]
        dy = points[i][1] - points[i - 1][1]
        cum.append(cum[-1] + math.hypot(dx, dy))
    return cum


def point_at(points, cum, s):
    s = max(0.0, min(s, cum[-1]))
    i = 1
    while i + 1 < len(points) and cum[i] < s:
        i += 1
    span = cum[i] - cum[i - 1]
    t = (s - cum[i - 1]) / span if span > 0 else 0.0
    x = points[i - 1][0] + (points[i][0] - points[i - 1][0]) * t
    y = points[i - 1][1] + (points[i][1] - points[i - 1][1]) * t
    hx = points[i][0] - points[i - 1][0]
    hy = points[i][1] - points[i - 1][1]
    return x, y, math.atan2(hy, hx)


def build(route_waypoints, lanes):
    """Route polyline with per-lane arc bookkeeping.

    Returns (segments, total) where segments[i] = (lane_id, lane_points,
    lane_cum, begin_s, end_s, route_arc_at_begin).
    """
    segments = []
    arc = 0.0
    for i, (lane_id, s) in enumerate(route_waypoints):
        lane = lanes[lane_id]
        cum = lane_cum(lane)
        begin = s if i == 0 else 0.0
        end = s if i + 1 == len(route_waypoints) else cum[-1]
        segments.append((lane_id, lane, cum, begin, end, arc))
        arc += end - begin
    return segments, arc


def pose_at(segments, total, route_s):
    route_s = max(0.0, min(route_s, total))
    for lane_id, lane, cum, begin, end, arc0 in segments:
        if route_s <= arc0 + (end - begin) + 1e-9:
            return point_at(lane, cum, begin + (route_s - arc0))
    lane_id, lane, cum, begin, end, arc0 = segments[-1]
    return point_at(lane, cum, end)


def signal_arcs(segments, signals):
    out = []
    for sig in signals:
        for lane_id, lane, cum, begin, end, arc0 in segments:
            if sig["lane_id"] == lane_id and begin <= sig["s"] <= end:
                out.append((arc0 + sig["s"] - begin, sig))
    return out


def phase(sig, t):
    cycle = sig["green"] + sig["yellow"] + sig["red"]
    ph = math.fmod(t + sig.get("offset", 0.0), cycle)
    if ph < 0:
        ph += cycle
    if ph < sig["green"]:
        return "green"
    if ph < sig["green"] + sig["yellow"]:
        return "yellow"
    return "red"


def make_trace(map_doc, segments, total, speed, cross_when, min_cross_time):
    sig_arcs = signal_arcs(segments, map_doc.get("signals", []))
    frames = []
    t = 0.0
    s = 0.0
    dt = 0.5
    crossed = set()
    while s < total - 0.5 and t < 300.0:
        v = speed
        for arc, sig in sig_arcs:
            if id(sig) in crossed or s < arc - 2.5:
                continue
            if s <= arc:
                ok = phase(sig, t) == cross_when and t >= min_cross_time
                if not ok:
                    v = 0.0
                else:
                    crossed.add(id(sig))
        x, y, h = pose_at(segments, total, s)
        frames.append({"t": round(t, 3), "x": round(x, 3), "y": round(y, 3),
                       "h": round(h, 6), "v": v})
        s += v * dt
        t += dt
    x, y, h = pose_at(segments, total, total)
    frames.append({"t": round(t, 3), "x": round(x, 3), "y": round(y, 3),
                   "h": round(h, 6), "v": speed})
    return {"frames": frames}


def main():
    os.makedirs(OUT, exist_ok=True)
    map_id, waypoints = load_route(GOLDEN)
    with open(os.path.join(MAPS, f"{map_id}.map.json")) as f:
        map_doc = json.load(f)
    lanes = {l["id"]: l["points"] for l in map_doc["lanes"]}
    segments, total = build(waypoints, lanes)

    clean = make_trace(map_doc, segments, total, 10.0, "green", 30.0)
    with open(os.path.join(OUT, "left_turn_clean.trace.json"), "w") as f:
        json.dump(clean, f, indent=1)
        f.write("\n")

    red = make_trace(map_doc, segments, total, 10.0, "red", 0.0)
    with open(os.path.join(OUT, "left_turn_red_light.trace.json"), "w") as f:
        json.dump(red, f, indent=1)
        f.write("\n")
    print("route:", map_id, [w[0] for w in waypoints], "length", round(total, 1))


if __name__ == "__main__":
    main()
