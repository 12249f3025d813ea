#!/usr/bin/env python3
"""Generates the bundled mini-map lane graphs (data/corpus/maps/*.map.json).

The maps are hand-designed here and checked in; rerun after editing:
    python3 scripts/gen_maps.py
"""
import json
import math
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "corpus", "maps")

LANE_WIDTH = 3.5
HALF = LANE_WIDTH / 2.0  # 1.75


def pt(x, y):
    return [round(x, 3), round(y, 3)]


def line_points(x0, y0, x1, y1, step=10.0):
    length = math.hypot(x1 - x0, y1 - y0)
    n = max(1, int(round(length / step)))
    return [pt(x0 + (x1 - x0) * i / n, y0 + (y1 - y0) * i / n) for i in range(n + 1)]


def arc_points(cx, cy, r, a0_deg, a1_deg, n):
    out = []
    for i in range(n + 1):
        a = math.radians(a0_deg + (a1_deg - a0_deg) * i / n)
        out.append(pt(cx + r * math.cos(a), cy + r * math.sin(a)))
    return out


def lane(lid, points, left=None, right=None, successors=None, tags=None):
    out = {"id": lid, "points": points}
    if left:
        out["adjacent_left"] = left
    if right:
        out["adjacent_right"] = right
    if successors:
        out["successors"] = successors
    if tags:
        out["tags"] = tags
    return out


def rotate_pt(p, times):
    x, y = p
    for _ in range(times):
        x, y = -y, x  # 90 deg CCW
    return [round(x, 3), round(y, 3)]


ARM_ROT = {"s": "e", "e": "n", "n": "w", "w": "s"}  # 90 deg CCW arm mapping
RING_ROT = {"a": "b", "b": "c", "c": "d", "d": "a"}


def rotate_name(name, times):
    parts = name.split("_")
    out = []
    for i, token in enumerate(parts):
        if token in ARM_ROT:
            t = token
            for _ in range(times):
                t = ARM_ROT[t]
            out.append(t)
        elif token in RING_ROT and i > 0 and parts[i - 1] == "ring":
            t = token
            for _ in range(times):
                t = RING_ROT[t]
            out.append(t)
        else:
            out.append(token)
    return "_".join(out)


def rotate_lanes(lanes, times):
    out = []
    for l in lanes:
        nl = {
            "id": rotate_name(l["id"], times),
            "points": [rotate_pt(p, times) for p in l["points"]],
        }
        if "adjacent_left" in l:
            nl["adjacent_left"] = rotate_name(l["adjacent_left"], times)
        if "adjacent_right" in l:
            nl["adjacent_right"] = rotate_name(l["adjacent_right"], times)
        if "successors" in l:
            nl["successors"] = [rotate_name(s, times) for s in l["successors"]]
        if "tags" in l:
            nl["tags"] = l["tags"]
        out.append(nl)
    return out


def straight_two_lane():
    return {
        "map_id": "straight_two_lane",
        "topology_tags": ["straight", "two_lanes"],
        "lane_width": LANE_WIDTH,
        "speed_limit": 13.889,
        "lanes": [
            lane("right", line_points(0, 0, 200, 0), left="left"),
            lane("left", line_points(0, LANE_WIDTH, 200, LANE_WIDTH), right="right"),
        ],
    }


def highway_three_lane():
    return {
        "map_id": "highway_three_lane",
        "topology_tags": ["highway", "straight", "three_lanes"],
        "lane_width": LANE_WIDTH,
        "speed_limit": 27.78,
        "lanes": [
            lane("l1", line_points(0, 0, 400, 0), left="l2"),
            lane("l2", line_points(0, LANE_WIDTH, 400, LANE_WIDTH), left="l3", right="l1"),
            lane("l3", line_points(0, 2 * LANE_WIDTH, 400, 2 * LANE_WIDTH), right="l2"),
        ],
    }


def intersection():
    # Base south arm; rotated three times for the other arms.
    base = [
        lane("s_in", line_points(HALF, -90, HALF, -10),
             successors=["s_x_n", "s_x_w", "s_x_e"]),
        lane("s_out", line_points(-HALF, -10, -HALF, -90)),
        lane("s_x_n", line_points(HALF, -10, HALF, 10, step=5.0),
             successors=["n_out"]),
        # left turn: quarter arc, center (-10,-10), r = 10 + HALF
        lane("s_x_w", arc_points(-10, -10, 10 + HALF, 0, 90, 6),
             successors=["w_out"]),
        # right turn: quarter arc, center (10,-10), r = 10 - HALF
        lane("s_x_e", arc_points(10, -10, 10 - HALF, 180, 90, 6),
             successors=["e_out"]),
    ]
    lanes = []
    for times in range(4):
        lanes.extend(rotate_lanes(base, times))
    signals = []
    for arm, offset in (("s", 0.0), ("n", 0.0), ("e", 12.5), ("w", 12.5)):
        signals.append({
            "id": f"sig_{arm}",
            "lane_id": f"{arm}_in",
            "s": 78.0,
            "green": 10.0,
            "yellow": 3.0,
            "red": 12.0,
            "offset": offset,
        })
    return {
        "map_id": "intersection",
        "topology_tags": ["intersection", "two_lanes"],
        "lane_width": LANE_WIDTH,
        "speed_limit": 13.889,
        "lanes": lanes,
        "signals": signals,
    }


def t_junction():
    lanes = [
        lane("s_in", line_points(HALF, -90, HALF, -10),
             successors=["s_x_w", "s_x_e"]),
        lane("s_out", line_points(-HALF, -10, -HALF, -90)),
        lane("s_x_w", arc_points(-10, -10, 10 + HALF, 0, 90, 6),
             successors=["w_out"]),
        lane("s_x_e", arc_points(10, -10, 10 - HALF, 180, 90, 6),
             successors=["e_out"]),
        lane("e_in", line_points(90, HALF, 10, HALF),
             successors=["e_x_w", "e_x_s"]),
        lane("e_out", line_points(10, -HALF, 90, -HALF)),
        # e_in continues west across the junction
        lane("e_x_w", line_points(10, HALF, -10, HALF, step=5.0),
             successors=["w_out"]),
        # left turn from east heading west -> south arm (CCW, center (10,-10))
        lane("e_x_s", arc_points(10, -10, 10 + HALF, 90, 180, 6),
             successors=["s_out"]),
        lane("w_in", line_points(-90, -HALF, -10, -HALF),
             successors=["w_x_e", "w_x_s"]),
        lane("w_out", line_points(-10, HALF, -90, HALF)),
        lane("w_x_e", line_points(-10, -HALF, 10, -HALF, step=5.0),
             successors=["e_out"]),
        # right turn from west heading east -> south arm (CW, center (-10,-10))
        lane("w_x_s", arc_points(-10, -10, 10 - HALF, 90, 0, 6),
             successors=["s_out"]),
    ]
    return {
        "map_id": "t_junction",
        "topology_tags": ["t_junction", "two_lanes"],
        "lane_width": LANE_WIDTH,
        "speed_limit": 11.11,
        "lanes": lanes,
        "stop_lines": [{"lane_id": "s_in", "s": 78.0}],
    }


def roundabout():
    R = 15.0
    ring = []
    arcs = [("ring_a", 270, 360, "ring_b", "e_exit"),
            ("ring_b", 0, 90, "ring_c", "n_exit"),
            ("ring_c", 90, 180, "ring_d", "w_exit"),
            ("ring_d", 180, 270, "ring_a", "s_exit")]
    for name, a0, a1, nxt, exit_lane in arcs:
        ring.append(lane(name, arc_points(0, 0, R, a0, a1, 8),
                         successors=[nxt, exit_lane], tags=["roundabout"]))

    def entry(arm_pts, name, ring_target):
        return lane(name, arm_pts, successors=[ring_target])

    s_entry_pts = line_points(HALF, -70, HALF, -25) + [
        pt(1.5, -22), pt(1.0, -19), pt(0.5, -17), pt(0.0, -R)]
    s_exit_pts = [pt(0.0, -R), pt(-0.5, -17), pt(-1.0, -19), pt(-1.5, -22)] + \
        line_points(-HALF, -25, -HALF, -70)
    base = [entry(s_entry_pts, "s_entry", "ring_a"), lane("s_exit", s_exit_pts)]
    lanes = list(ring)
    for times in range(4):
        lanes.extend(rotate_lanes(base, times))
    return {
        "map_id": "roundabout",
        "topology_tags": ["roundabout"],
        "lane_width": LANE_WIDTH,
        "speed_limit": 8.33,
        "lanes": lanes,
    }


def curve():
    # Gentle 40-degree bend: routes along it still classify as go_forward.
    return {
        "map_id": "curve",
        "topology_tags": ["curve", "single_lane"],
        "lane_width": LANE_WIDTH,
        "speed_limit": 11.11,
        "lanes": [lane("bend", arc_points(0, 0, 150, 270, 310, 12))],
    }


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    for build in (straight_two_lane, highway_three_lane, intersection,
                  t_junction, roundabout, curve):
        m = build()
        path = os.path.join(OUT_DIR, f"{m['map_id']}.map.json")
        with open(path, "w") as f:
            json.dump(m, f, indent=1)
            f.write("\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
