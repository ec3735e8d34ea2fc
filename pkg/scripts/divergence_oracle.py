"""Fine-mesh Richardson run for lambda_1 on the disk with n equally spaced arcs (m = 1/2).

Sets the floor for lambda_1(n)/n used by the divergence acceptance check.
Each n is solved at h, h/2, h/4 with h = arc_length / 12 (endpoint-graded)
and extrapolated with the observed order.
"""

import json
import math
import sys
import time

from steklov_lab.eigensolve import solve_on_mesh
from steklov_lab.experiments import richardson
from steklov_lab.geometry import BoundaryCurve, lgl_sequence
from steklov_lab.meshing import mesh_domain, refine


def main(n_grid=(1, 2, 4, 8, 16), m=0.5):
    disk = BoundaryCurve.circle()
    rows = []
    for n in n_grid:
        t0 = time.time()
        ell = m * disk.total_length / n
        h = min(0.06, ell / 12)
        mesh = mesh_domain(disk, lgl_sequence(disk, m, n), h, endpoint_h=h / 8)
        vals = []
        for lev in range(3):
            if lev:
                mesh = refine(mesh)
            vals.append(float(solve_on_mesh(mesh, 1).eigenvalues[0]))
        orders, limit, monotone = richardson(vals)
        best = limit if limit is not None else vals[-1]
        rows.append({"n": n, "h": h, "levels": vals, "orders": orders, "extrapolated": best,
                     "ratio": best / n, "seconds": round(time.time() - t0, 1)})
        print(json.dumps(rows[-1]), flush=True)
    ratios = [r["ratio"] for r in rows]
    print(json.dumps({"min_ratio": min(ratios), "floor_0.9": 0.9 * min(ratios)}))
    return rows


if __name__ == "__main__":
    main(tuple(int(a) for a in sys.argv[1:]) or (1, 2, 4, 8, 16))
