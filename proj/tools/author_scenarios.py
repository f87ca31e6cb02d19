#!/usr/bin/env python3
"""Authors the four bundled scenario documents under assets/scenarios/.

Geometry is deliberately simple: straight arms, circular arcs and cubic
Bezier connectors, resampled to a uniform spacing below the 2 m limit the
loader enforces. Re-running the script regenerates byte-identical files.

    python3 tools/author_scenarios.py [--out assets/scenarios]
"""

import argparse
import json
import math
import os

LANE_WIDTH = 3.5
SHOULDER = 1.5
SPACING = 1.9
SLOT_STEP = 10.0
SLOT_START = 6.0
CHUNK = 10.0

VEHICLE = {
    "length": 4.5,
    "width": 2.0,
    "wheelbase": 2.8,
    "v_max": 10.0,
    "sigma_max": 0.6,
    "accel_max": 5.0,
}
IDM = {"v0": 6.0, "time_gap_T": 1.0, "s0": 2.0, "delta": 4.0, "a": 5.0, "b": 5.0}


def r6(v):
    v = round(v, 6)
    return 0.0 if v == 0 else v


# ---------------------------------------------------------------- curves


def line(p0, p1, step=0.05):
    n = max(1, int(math.ceil(math.dist(p0, p1) / step)))
    return [(p0[0] + (p1[0] - p0[0]) * i / n, p0[1] + (p1[1] - p0[1]) * i / n) for i in range(n + 1)]


def arc(center, radius, a0, a1, step=0.05):
    n = max(1, int(math.ceil(abs(a1 - a0) * radius / step)))
    out = []
    for i in range(n + 1):
        a = a0 + (a1 - a0) * i / n
        out.append((center[0] + radius * math.cos(a), center[1] + radius * math.sin(a)))
    return out


def bezier(p0, p1, p2, p3, n=400):
    out = []
    for i in range(n + 1):
        t = i / n
        u = 1 - t
        out.append((
            u ** 3 * p0[0] + 3 * u * u * t * p1[0] + 3 * u * t * t * p2[0] + t ** 3 * p3[0],
            u ** 3 * p0[1] + 3 * u * u * t * p1[1] + 3 * u * t * t * p2[1] + t ** 3 * p3[1],
        ))
    return out


def cosine_shift(x0, x1, y0, y1, n=400):
    out = []
    for i in range(n + 1):
        t = i / n
        w = 0.5 - 0.5 * math.cos(math.pi * t)
        out.append((x0 + (x1 - x0) * t, y0 + (y1 - y0) * w))
    return out


def join(*parts):
    pts = []
    for part in parts:
        for p in part:
            if pts and math.dist(pts[-1], p) < 1e-9:
                continue
            pts.append(p)
    return pts


def resample(pts, spacing=SPACING):
    cum = [0.0]
    for a, b in zip(pts, pts[1:]):
        cum.append(cum[-1] + math.dist(a, b))
    total = cum[-1]
    n = max(1, int(math.ceil(total / spacing)))
    out = []
    j = 0
    for i in range(n + 1):
        s = total * i / n
        while j < len(pts) - 2 and cum[j + 1] < s:
            j += 1
        seg = cum[j + 1] - cum[j]
        t = 0.0 if seg == 0 else (s - cum[j]) / seg
        t = min(max(t, 0.0), 1.0)
        out.append((pts[j][0] + (pts[j + 1][0] - pts[j][0]) * t,
                    pts[j][1] + (pts[j + 1][1] - pts[j][1]) * t))
    return out


def headings(pts):
    hs = []
    for i in range(len(pts)):
        a, b = (pts[i], pts[i + 1]) if i + 1 < len(pts) else (pts[i - 1], pts[i])
        hs.append(math.atan2(b[1] - a[1], b[0] - a[0]))
    return hs


def offset(pts, d):
    hs = headings(pts)
    return [(p[0] - d * math.sin(h), p[1] + d * math.cos(h)) for p, h in zip(pts, hs)]


def arclengths(pts):
    cum = [0.0]
    for a, b in zip(pts, pts[1:]):
        cum.append(cum[-1] + math.dist(a, b))
    return cum


def vectors(pts, lane_width):
    return [[r6(p[0]), r6(p[1]), r6(h), lane_width, k + 1]
            for k, (p, h) in enumerate(zip(pts, headings(pts)))]


def polygon(pts):
    return [[r6(x), r6(y)] for x, y in pts]


def point_in_polygon(p, poly):
    inside = False
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if p[0] < x:
                inside = not inside
    return inside


# ---------------------------------------------------------------- builder


class Builder:
    def __init__(self, name, agents):
        self.name = name
        self.agents = agents
        self.centerlines = []
        self.sidelines = []
        self.paths = []
        self.drivable = []
        self.zone = None

    def centerline(self, pts):
        pts = resample(pts)
        self.centerlines.append(pts)
        for side in (LANE_WIDTH / 2, -LANE_WIDTH / 2):
            self.sidelines.append(resample(offset(pts, side)))

    def path(self, pts):
        self.paths.append(resample(pts))

    def strips(self, pts, half):
        """Drivable strip polygons along a polyline, chunked for cheap tests."""
        cum = arclengths(pts)
        left, right = offset(pts, half), offset(pts, -half)
        start = 0
        while start < len(pts) - 1:
            end = start
            while end < len(pts) - 1 and cum[end] - cum[start] < CHUNK:
                end += 1
            self.drivable.append(left[start:end + 1] + list(reversed(right[start:end + 1])))
            start = end

    def document(self):
        zone = self.zone
        slots = []
        for pid, pts in enumerate(self.paths):
            cum = arclengths(pts)
            hs = headings(pts)
            entry = next(cum[i] for i, p in enumerate(pts) if point_in_polygon(p, zone))
            s = SLOT_START
            while s <= entry - 3.0:
                i = max(j for j in range(len(cum) - 1) if cum[j] <= s)
                t = (s - cum[i]) / (cum[i + 1] - cum[i])
                x = pts[i][0] + (pts[i + 1][0] - pts[i][0]) * t
                y = pts[i][1] + (pts[i + 1][1] - pts[i][1]) * t
                slots.append({"pose": [r6(x), r6(y), r6(hs[i])], "path": pid})
                s += SLOT_STEP
        for pts in self.paths:
            self.strips(pts, LANE_WIDTH / 2 + SHOULDER)
        self.drivable.insert(0, zone)
        return {
            "format_version": 1,
            "name": self.name,
            "default_agent_count": self.agents,
            "max_vector_spacing": 2.0,
            "vehicle_params": [VEHICLE],
            "idm": IDM,
            "interaction_zone": polygon(zone),
            "drivable_area": [polygon(p) for p in self.drivable],
            "centerlines": [{"id": i, "vectors": vectors(p, LANE_WIDTH)}
                            for i, p in enumerate(self.centerlines)],
            "sidelines": [{"id": i, "vectors": vectors(p, 0.0)}
                          for i, p in enumerate(self.sidelines)],
            "candidate_paths": [{"id": i, "vectors": vectors(p, LANE_WIDTH)}
                                for i, p in enumerate(self.paths)],
            "spawn_slots": slots,
        }


def rot(p, a):
    c, s = math.cos(a), math.sin(a)
    return (c * p[0] - s * p[1], s * p[0] + c * p[1])


def rotate_all(pts, a):
    return [rot(p, a) for p in pts]


# ---------------------------------------------------------------- scenarios


def intersection():
    b = Builder("intersection", 16)
    box, arm = 10.0, 80.0
    h = LANE_WIDTH / 2
    b.zone = [(-box, -box), (box, -box), (box, box), (-box, box)]
    for k in range(4):
        a = k * math.pi / 2
        b.centerline(rotate_all(line((arm, h), (box, h)), a))
        b.centerline(rotate_all(line((box, -h), (arm - 30.0, -h)), a))
    for k in range(4):
        a = k * math.pi / 2
        inbound = line((arm, h), (box, h))
        # right turn: exit on the arm at +90 degrees
        right = arc((box, box), box - h, -math.pi / 2, -math.pi, step=0.05)
        right_out = line((h, box), (h, box + 30.0))
        # left turn: exit on the arm at -90 degrees
        left = arc((box, -box), box + h, math.pi / 2, math.pi, step=0.05)
        left_out = line((-h, -box), (-h, -box - 30.0))
        straight = line((box, h), (-box - 30.0, h))
        for parts in ((inbound, right, right_out), (inbound, straight), (inbound, left, left_out)):
            b.path(rotate_all(join(*parts), a))
    return b.document()


def bottleneck():
    b = Builder("bottleneck", 16)
    h = LANE_WIDTH / 2
    x_up, x_taper, x_in, x_out, x_wide, x_end = -125.0, -25.0, -5.0, 5.0, 25.0, 60.0
    narrow_half = 2.0
    for y in (h, -h):
        b.centerline(line((x_up, y), (x_taper, y)))
        b.centerline(line((x_wide, y), (x_end, y)))
    b.centerline(line((x_in, 0.0), (x_out, 0.0)))
    edge, narrow = 2 * h + 1.0, narrow_half + 1.0
    b.zone = [(x_taper, -edge), (x_in, -narrow), (x_out, -narrow), (x_wide, -edge),
              (x_wide, edge), (x_out, narrow), (x_in, narrow), (x_taper, edge)]
    for y0 in (h, -h):
        for y1 in (h, -h):
            b.path(join(line((x_up, y0), (x_taper, y0)),
                        cosine_shift(x_taper, x_in, y0, 0.0),
                        line((x_in, 0.0), (x_out, 0.0)),
                        cosine_shift(x_out, x_wide, 0.0, y1),
                        line((x_wide, y1), (x_end, y1))))
    return b.document()


def merge():
    b = Builder("merge", 12)
    main = line((-140.0, 0.0), (40.0, 0.0))
    ramp_start, ramp_knee, throat = (-140.0, -34.0), (-40.0, -8.0), (-5.0, 0.0)
    d = math.atan2(ramp_knee[1] - ramp_start[1], ramp_knee[0] - ramp_start[0])
    ctrl1 = (ramp_knee[0] + 12.0 * math.cos(d), ramp_knee[1] + 12.0 * math.sin(d))
    ctrl2 = (throat[0] - 12.0, throat[1])
    ramp = join(line(ramp_start, ramp_knee), bezier(ramp_knee, ctrl1, ctrl2, throat))
    b.centerline(main)
    b.centerline(ramp)
    b.zone = [(-44.0, -12.5), (-5.0, -3.25), (15.0, -3.25), (15.0, 3.25), (-44.0, 3.25)]
    b.path(main)
    b.path(join(ramp, line(throat, (40.0, 0.0))))
    return b.document()


def roundabout():
    b = Builder("roundabout", 16)
    ring, arm_in, arm_len = 20.0, 26.0, 60.0
    h = LANE_WIDTH / 2
    inner, outer = 15.0, 25.0
    n = 72
    outer_ring = [(outer * math.cos(2 * math.pi * i / n), outer * math.sin(2 * math.pi * i / n))
                  for i in range(n + 1)]
    inner_ring = [(inner * math.cos(-2 * math.pi * i / n), inner * math.sin(-2 * math.pi * i / n))
                  for i in range(n + 1)]
    # annulus as a single polygon with a slit along the +x axis
    b.zone = outer_ring + inner_ring
    b.centerline(arc((0.0, 0.0), ring, 0.0, 2 * math.pi))
    for k in range(4):
        a = k * math.pi / 2
        b.centerline(rotate_all(line((arm_in + arm_len, h), (arm_in, h)), a))
        b.centerline(rotate_all(line((arm_in, -h), (arm_in + 40.0, -h)), a))
    theta = math.radians(30.0)
    for k in range(4):
        a = k * math.pi / 2
        p0 = (arm_in, h)
        q = (ring * math.cos(theta), ring * math.sin(theta))
        tq = (math.cos(theta + math.pi / 2), math.sin(theta + math.pi / 2))
        entry = bezier(p0, (p0[0] - 6.0, p0[1]), (q[0] - 6.0 * tq[0], q[1] - 6.0 * tq[1]), q)
        inbound = line((arm_in + arm_len, h), p0)
        for exit_arm in (1, 2, 3):
            ea = exit_arm * math.pi / 2 - theta
            ring_arc = arc((0.0, 0.0), ring, theta, ea)
            eq = (ring * math.cos(ea), ring * math.sin(ea))
            te = (math.cos(ea + math.pi / 2), math.sin(ea + math.pi / 2))
            out_a = exit_arm * math.pi / 2
            e1 = rot((arm_in, -h), out_a)
            e_dir = (math.cos(out_a), math.sin(out_a))
            exit_c = bezier(eq, (eq[0] + 6.0 * te[0], eq[1] + 6.0 * te[1]),
                            (e1[0] - 6.0 * e_dir[0], e1[1] - 6.0 * e_dir[1]), e1)
            outbound = line(e1, (e1[0] + 40.0 * e_dir[0], e1[1] + 40.0 * e_dir[1]))
            b.path(rotate_all(join(inbound, entry, ring_arc, exit_c, outbound), a))
    return b.document()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "assets", "scenarios"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for build in (intersection, bottleneck, merge, roundabout):
        doc = build()
        path = os.path.join(args.out, doc["name"] + ".json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, separators=(",", ":"))
            f.write("\n")
        print(f"{path}: {len(doc['candidate_paths'])} paths, {len(doc['spawn_slots'])} slots")


if __name__ == "__main__":
    main()
