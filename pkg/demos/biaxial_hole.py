"""Hole of fixed area in a biaxially loaded plate.

The optimum is roughly an ellipse whose axis ratio follows the load ratio
for positive ratios, and a rounded square for negative ones.

    python3 demos/biaxial_hole.py --alpha 0.5
"""

import argparse
import math

import numpy as np

from mrshape.benchmarks import biaxial_plate
from mrshape.geometry import MultiresModel, limit_position_matrix, synthesize
from mrshape.optimizer import OptimizationConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.5, help="horizontal/vertical load ratio")
    ap.add_argument("--rho-L", type=float, default=None, help="perimeter penalty weight")
    args = ap.parse_args()

    rho = args.rho_L if args.rho_L is not None else (1e-3 if args.alpha < 0 else 0.0)
    problem, hole = biaxial_plate(args.alpha)
    cfg = OptimizationConfig(level_max=3, level_c=3, area_min=math.pi / 4,
                             area_mode="equal", rho_L=rho, max_iters=300)
    trace, final = run(MultiresModel(hole, []), problem, cfg)
    mesh = synthesize(final[0], 3)
    P = limit_position_matrix(mesh) @ mesh.vertices
    d = P - P.mean(axis=0)
    half = np.abs(d).max(axis=0)
    print(f"{len(trace.records)} iterations, J {trace.costs[0]:.5f} -> {trace.costs[-1]:.5f}")
    print(f"half extents x={half[0]:.4f} y={half[1]:.4f}  ratio={half[0] / half[1]:.3f}")


if __name__ == "__main__":
    main()
