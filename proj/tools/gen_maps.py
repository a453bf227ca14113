#!/usr/bin/env python3
"""Generates the bundled maps (maps/oval.map, maps/circuit.map).

Both tracks are corridors of constant width around a centreline made of
straights and circular arcs. Walls are the two offsets of the sampled
centreline; waypoints are sampled along the centreline itself.

    python3 tools/gen_maps.py [output-dir]

Existing baseline_time lines are preserved when a map is regenerated.
"""

import math
import os
import re
import sys


def fmt(v):
    r = round(v, 6)
    if r == 0:
        r = 0.0
    s = repr(r)
    return s[:-2] if s.endswith(".0") else s


def filleted_loop(corners, radii, arc_step_deg=15.0):
    """Closed polyline around `corners` with each corner replaced by an arc
    of the given radius. Straights are the gaps between consecutive arcs."""
    n = len(corners)
    pieces = []
    for i in range(n):
        p_prev, p, p_next = corners[i - 1], corners[i], corners[(i + 1) % n]
        r = radii[i]
        d_in = (p[0] - p_prev[0], p[1] - p_prev[1])
        d_out = (p_next[0] - p[0], p_next[1] - p[1])
        li, lo = math.hypot(*d_in), math.hypot(*d_out)
        u_in = (d_in[0] / li, d_in[1] / li)
        u_out = (d_out[0] / lo, d_out[1] / lo)
        turn = math.atan2(u_in[0] * u_out[1] - u_in[1] * u_out[0], u_in[0] * u_out[0] + u_in[1] * u_out[1])
        tan_len = r * math.tan(abs(turn) / 2)
        t_in = (p[0] - u_in[0] * tan_len, p[1] - u_in[1] * tan_len)
        side = 1.0 if turn > 0 else -1.0  # left turn: centre on the left
        centre = (t_in[0] - u_in[1] * r * side, t_in[1] + u_in[0] * r * side)
        a0 = math.atan2(t_in[1] - centre[1], t_in[0] - centre[0])
        steps = max(1, int(math.ceil(math.degrees(abs(turn)) / arc_step_deg)))
        arc = []
        for k in range(steps + 1):
            a = a0 + turn * k / steps
            arc.append((centre[0] + r * math.cos(a), centre[1] + r * math.sin(a)))
        pieces.append(arc)
    pts = []
    for arc in pieces:
        pts.extend(arc)
    return pts


def offset_loop(pts, dist):
    """Offsets a closed polyline to its left by `dist` (negative = right)."""
    n = len(pts)
    out = []
    for i in range(n):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
        d1 = (b[0] - a[0], b[1] - a[1])
        d2 = (c[0] - b[0], c[1] - b[1])
        l1, l2 = math.hypot(*d1), math.hypot(*d2)
        if l1 < 1e-9:
            d1, l1 = d2, l2
        if l2 < 1e-9:
            d2, l2 = d1, l1
        n1 = (-d1[1] / l1, d1[0] / l1)
        n2 = (-d2[1] / l2, d2[0] / l2)
        m = (n1[0] + n2[0], n1[1] + n2[1])
        ml = math.hypot(*m)
        m = (m[0] / ml, m[1] / ml)
        scale = dist / (m[0] * n1[0] + m[1] * n1[1])
        out.append((b[0] + m[0] * scale, b[1] + m[1] * scale))
    return out


def dedupe(pts, eps=1e-6):
    out = []
    for p in pts:
        if not out or math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > eps:
            out.append(p)
    if len(out) > 1 and math.hypot(out[0][0] - out[-1][0], out[0][1] - out[-1][1]) <= eps:
        out.pop()
    return out


def resample(pts, spacing):
    """Points along the closed polyline at roughly equal arc spacing,
    starting at pts[0]."""
    n = len(pts)
    seg = [math.hypot(pts[(i + 1) % n][0] - pts[i][0], pts[(i + 1) % n][1] - pts[i][1]) for i in range(n)]
    total = sum(seg)
    count = max(3, int(round(total / spacing)))
    step = total / count
    out = []
    i, acc = 0, 0.0
    for k in range(count):
        target = k * step
        while acc + seg[i] < target:
            acc += seg[i]
            i += 1
        t = (target - acc) / seg[i] if seg[i] > 0 else 0.0
        a, b = pts[i], pts[(i + 1) % n]
        out.append((a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t))
    return out


def write_map(path, name, centre, half_width, waypoint_spacing, starts):
    centre = dedupe(centre)
    left = dedupe(offset_loop(centre, half_width))
    right = dedupe(offset_loop(centre, -half_width))
    waypoints = resample(centre, waypoint_spacing)

    baseline = None
    if os.path.exists(path):
        m = re.search(r"^baseline_time\s+(\S+)", open(path).read(), re.M)
        if m:
            baseline = m.group(1)

    lines = ["xprace-map 1", "# generated by tools/gen_maps.py", "name " + name]
    if baseline:
        lines.append("baseline_time " + baseline)
    lines.append("walls:")
    wid = 0
    for loop in (right, left):
        for i in range(len(loop)):
            a, b = loop[i], loop[(i + 1) % len(loop)]
            lines.append("%d %s %s %s %s" % (wid, fmt(a[0]), fmt(a[1]), fmt(b[0]), fmt(b[1])))
            wid += 1
    lines.append("waypoints:")
    for p in waypoints:
        lines.append("%s %s" % (fmt(p[0]), fmt(p[1])))
    lines.append("starts:")
    for label, x, y, h in starts:
        lines.append("%s %s %s %s" % (label, fmt(x), fmt(y), fmt(h)))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print("%s: %d walls, %d waypoints" % (path, wid, len(waypoints)))


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "maps")
    os.makedirs(out_dir, exist_ok=True)

    # Stadium oval: 200-unit straights, centreline radius 120, corridor 100
    # wide, driven counterclockwise. A and B sit on opposite straights.
    oval = filleted_loop([(-220, -120), (220, -120), (220, 120), (-220, 120)], [120, 120, 120, 120])
    oval = [(x, y) for x, y in oval]
    write_map(os.path.join(out_dir, "oval.map"), "oval", oval, 50.0, 50.0,
              [("A", -40.0, -120.0, 0.0), ("B", 40.0, 120.0, 180.0)])

    # Circuit with long straights, wide sweepers, and a right-left notch.
    # Driven counterclockwise: A's first corner turns left, B's turns right.
    s = 0.75
    corners = [(0, 0), (700, 0), (700, 250), (450, 250), (450, 450), (700, 450), (700, 650), (0, 650)]
    corners = [(x * s, y * s) for x, y in corners]
    radii = [130, 90, 90, 60, 60, 70, 70, 130]
    circuit = filleted_loop(corners, radii)
    write_map(os.path.join(out_dir, "circuit.map"), "circuit", circuit, 45.0, 60.0,
              [("A", 220.0, 0.0, 0.0), ("B", 440.0, 187.5, 180.0)])


if __name__ == "__main__":
    main()
