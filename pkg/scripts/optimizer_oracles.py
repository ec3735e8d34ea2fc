"""Brute-force references for the optimizer.

Square (N = 1, m = 1/4, minimize): lambda_1 over 200 equally spaced arc
centers.  Disk (N = 4, m = 1/2): equally spaced arcs over a phase grid,
compared with a maximize run.  Prints one JSON line per result.
"""

import json
import math
import time

import numpy as np

from steklov_lab.geometry import ArcSet, BoundaryCurve, lgl_sequence
from steklov_lab.optimizer import Evaluator, OptimConfig, optimize_arcs


def square_sweep(points=200, h=0.025, seeds=(0,)):
    sq = BoundaryCurve.unit_square()
    ev = Evaluator(sq, 1, h)
    centers = np.arange(points) * sq.total_length / points
    t0 = time.time()
    vals = [ev(ArcSet.from_components(sq, [(c - 0.5, 1.0)])) for c in centers]
    j = int(np.argmin(vals))
    print(json.dumps({"case": "square-sweep", "h": h, "argmin": float(centers[j]), "min": vals[j],
                      "max": max(vals), "seconds": round(time.time() - t0, 1)}))
    for seed in seeds:
        res = optimize_arcs(sq, OptimConfig(N=1, m=0.25, h_target=h, budget=40, restarts=3, seed=seed),
                            evaluator=ev)
        (a, ln), = res.best.components
        print(json.dumps({"case": "square-opt", "seed": seed, "center": (a + ln / 2) % 4.0,
                          "lambda": res.best_value, "evaluations": len(res.log)}))


def disk_ladder(h=0.05, seeds=(0,)):
    disk = BoundaryCurve.circle()
    L = disk.total_length
    ev = Evaluator(disk, 1, h, h / 16)
    grid = [ev(lgl_sequence(disk, 0.5, 4, ph)) for ph in np.linspace(0, L / 4, 8, endpoint=False)]
    print(json.dumps({"case": "disk-equal-spacing", "min": min(grid), "max": max(grid)}))
    for seed in seeds:
        t0 = time.time()
        res = optimize_arcs(disk, OptimConfig(objective="maximize", N=4, m=0.5, h_target=h, endpoint_h=h / 16,
                                              budget=300, restarts=2, seed=seed, optimize_phase=False))
        centers = sorted((a + ln / 2) % L for a, ln in res.best.components)
        gaps = np.diff(centers + [centers[0] + L])
        print(json.dumps({"case": "disk-opt", "seed": seed, "lambda": res.best_value,
                          "center_gaps_minus_quarter": [float(g - L / 4) for g in gaps],
                          "seconds": round(time.time() - t0, 1)}))


if __name__ == "__main__":
    square_sweep()
    disk_ladder()
    print(json.dumps({"case": "tolerance", "disk_center": 1e-2 * 2 * math.pi}))
