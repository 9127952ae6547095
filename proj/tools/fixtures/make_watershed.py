#!/usr/bin/env python3
"""Writes the synthetic watershed fixture used by the end-to-end test.

Produces a 200x200 waterway probability grid, a DEM with carved valleys, a
reference waterway GeoJSON and a pipeline config. Output is fully determined
by the seed.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

ROWS = COLS = 200
CELL = 0.0004  # degrees, about 44 m
LON0, LAT0 = 30.0, -1.0  # top-left corner


def channel(rng, start, end, wiggle, n=60):
    """Meandering path in cell coordinates (row, col) from start to end."""
    t = np.linspace(0.0, 1.0, n)
    r = start[0] + (end[0] - start[0]) * t
    c = start[1] + (end[1] - start[1]) * t
    phase = rng.uniform(0, 2 * math.pi)
    bend = wiggle * np.sin(3 * math.pi * t + phase) * np.sin(math.pi * t)
    dr, dc = end[0] - start[0], end[1] - start[1]
    norm = math.hypot(dr, dc)
    return np.stack([r - bend * dc / norm, c + bend * dr / norm], axis=1)


def network(rng):
    trunk = channel(rng, (5, 20), (195, 185), 12, 120)
    paths = [(trunk, 2.0)]
    down = trunk[-1] - trunk[0]
    down = down / np.hypot(*down)
    across = np.array([-down[1], down[0]])
    for frac, side in [(0.25, 1), (0.45, -1), (0.6, 1), (0.8, -1)]:
        k = int(frac * (len(trunk) - 1))
        junction = trunk[k]
        # enter at roughly 45 degrees from upstream
        heading = 0.7 * side * across - 0.7 * down
        src = np.clip(junction + rng.uniform(45, 70) * heading, 2, 197)
        trib = channel(rng, tuple(src), tuple(junction), 6, 50)
        paths.append((trib, 1.2))
        m = len(trib) // 3
        twig_src = np.clip(trib[m] + 28 * (0.7 * -side * across - 0.7 * down), 2, 197)
        paths.append((channel(rng, tuple(twig_src), tuple(trib[m]), 3, 30), 0.8))
    return paths


def stamp(grid, pts, radius, fn):
    rad = int(math.ceil(radius))
    for r, c in pts:
        for rr in range(int(r) - rad, int(r) + rad + 2):
            for cc in range(int(c) - rad, int(c) + rad + 2):
                if 0 <= rr < ROWS and 0 <= cc < COLS:
                    d = math.hypot(rr + 0.5 - r, cc + 0.5 - c)
                    if d <= radius:
                        grid[rr, cc] = fn(grid[rr, cc], d)


def densify(path, step=0.25):
    out = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        n = max(1, int(math.ceil(np.hypot(*(b - a)) / step)))
        for k in range(1, n + 1):
            out.append(a + (b - a) * k / n)
    return out


def to_geo(path):
    return [[round(LON0 + c * CELL, 7), round(LAT0 - r * CELL, 7)] for r, c in path]


def write_grid(path, grid, nodata=-9999):
    with open(path, "w", newline="\n") as f:
        f.write(f"ncols {COLS}\nnrows {ROWS}\n")
        f.write(f"xllcorner {LON0!r}\nyllcorner {round(LAT0 - ROWS * CELL, 10)!r}\n")
        f.write(f"cellsize {CELL!r}\nNODATA_value {nodata}\n")
        for row in grid:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[2] / "tests/data/watershed")
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)

    paths = network(rng)

    dist = np.full((ROWS, COLS), 50.0)
    for p, _ in paths:
        stamp(dist, densify(p), 12.0, lambda old, d: min(old, d))
    rr, cc = np.mgrid[0:ROWS, 0:COLS]
    dem = 400.0 - 0.6 * rr - 0.4 * cc + 1.5 * np.minimum(dist, 12.0) + rng.normal(0, 0.3, (ROWS, COLS))
    dem = np.round(dem, 2)
    dem[0, 0] = -9999

    prob = np.clip(rng.normal(0.08, 0.05, (ROWS, COLS)), 0.0, 0.4)
    for p, width in paths:
        stamp(prob, densify(p), width, lambda old, d: max(old, 0.95 - 0.1 * d))
    # a few false positives and one gap
    for _ in range(6):
        r0, c0 = rng.integers(10, 190, 2)
        prob[r0:r0 + 2, c0:c0 + 3] = 0.7
    prob[100:104, :] = np.where(prob[100:104, :] > 0.5, 0.3, prob[100:104, :])
    prob = np.round(prob, 3)

    features = []
    for i, (p, _) in enumerate(paths):
        jitter = rng.normal(0, 0.4, p.shape)
        features.append({"type": "Feature", "properties": {"name": f"ref-{i}"},
                         "geometry": {"type": "LineString", "coordinates": to_geo(p + jitter)}})
    unmapped = channel(rng, (150, 5), (190, 60), 4, 30)
    features.append({"type": "Feature", "properties": {"name": "ref-unmapped"},
                     "geometry": {"type": "LineString", "coordinates": to_geo(unmapped)}})

    write_grid(args.out / "mask.asc", prob)
    write_grid(args.out / "dem.asc", dem)
    with open(args.out / "reference.geojson", "w", newline="\n") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)
        f.write("\n")
    with open(args.out / "example.cfg", "w", newline="\n") as f:
        f.write("# Synthetic watershed fixture. Paths are relative to this file.\n"
                "mask = mask.asc\n"
                "dem = dem.asc\n"
                "reference = reference.geojson\n"
                "mask_threshold = 0.5\n"
                "hit_thresholds = 0.001,0.002\n"
                "graph_out = out/graph.geojson\n"
                "summary_out = out/summary.csv\n"
                "hits_out = out/hits.csv\n")


if __name__ == "__main__":
    main()
