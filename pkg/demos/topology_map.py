"""Topology derivative over the simply supported plate, and where a hole would go.

    python3 demos/topology_map.py
"""

import numpy as np

from mrshape.benchmarks import plate_with_hole
from mrshape.fem import solve
from mrshape.sensitivity import topology_derivative


def main():
    problem, _ = plate_with_hole(40)
    sol = solve([], problem.grid, problem.material, problem.loads)
    xs = np.linspace(0.1, 1.9, 10)
    ys = np.linspace(0.1, 0.9, 5)
    pts = np.array([(x, y) for y in ys for x in xs])
    dt = topology_derivative(sol, problem.material, pts).values.reshape(len(ys), len(xs))
    print(f"compliance {sol.compliance:.6f}")
    for y, row in zip(ys, dt):
        print(f"y={y:.2f}  " + " ".join(f"{v:8.5f}" for v in row))
    i = np.argmin(dt)
    print("cheapest place for a hole:", pts[i], f"D_T={dt.ravel()[i]:.5f}")


if __name__ == "__main__":
    main()
