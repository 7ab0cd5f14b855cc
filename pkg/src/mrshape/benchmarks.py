"""Problem setups used by the demos, the acceptance suite and the CLI."""

from __future__ import annotations

import numpy as np

from .fem.loads import Box, Dirichlet, LoadSpec, Traction
from .fem.material import Material
from .geometry.mesh import CLOSED, ControlMesh
from .geometry.multires import MultiresModel
from .immersion import CartesianGrid
from .optimizer import Problem


def circle_control_polygon(center, diameter, n=8, hole=True, phase=0.0):
    """Regular n-gon whose cubic B-spline limit passes through a circle of ``diameter``.

    Vertices of a closed uniform cubic curve land on ``(x_{i-1} + 4x_i + x_{i+1}) / 6``,
    so the radius is scaled up by ``1 / (2/3 + cos(2 pi / n) / 3)``.
    Holes are clockwise.
    """
    t = phase + np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    if hole:
        t = -t
    R = 0.5 * diameter / (2.0 / 3.0 + np.cos(2.0 * np.pi / n) / 3.0)
    c = np.asarray(center, float)
    return ControlMesh(np.c_[c[0] + R * np.cos(t), c[1] + R * np.sin(t)], CLOSED)


def plate_with_hole(n=100, L=2.0, D=1.0, E=100.0, nu=0.4, load_length=1.0,
                    support=0.1, model="plane_strain"):
    """Square plate, centred hole, top traction patch, supports at the bottom corners.

    Returns ``(problem, hole)`` with the hole as an 8-vertex level-0 polygon.
    """
    grid = CartesianGrid.box((0.0, 0.0), (L, L), (n, n))
    a = 0.5 * (L - load_length)
    loads = LoadSpec(
        dirichlet=[Dirichlet(Box((0.0, 0.0), (support, 0.0)), "xy"),
                   Dirichlet(Box((L - support, 0.0), (L, 0.0)), "y")],
        tractions=[Traction(Box((a, L), (L - a, L)), (0.0, -1.0))])
    problem = Problem(grid, Material(E, nu, model), loads)
    return problem, circle_control_polygon((0.5 * L, 0.5 * L), D)


def biaxial_plate(alpha, L_over_D=4.0, h=1.0 / 25.0, D=1.0, E=100.0, nu=0.4,
                  model="plane_strain", n_hole=8):
    """Plate under ``sigma_xx = alpha``, ``sigma_yy = 1`` with a centred hole, rigid modes pinned."""
    L = L_over_D * D
    n = int(round(L / h))
    half = 0.5 * L
    grid = CartesianGrid.box((-half, -half), (half, half), (n, n))
    loads = LoadSpec(
        tractions=[Traction(Box((half, -half), (half, half)), (alpha, 0.0)),
                   Traction(Box((-half, -half), (-half, half)), (-alpha, 0.0)),
                   Traction(Box((-half, half), (half, half)), (0.0, 1.0)),
                   Traction(Box((-half, -half), (half, -half)), (0.0, -1.0))],
        pin="xyr")
    problem = Problem(grid, Material(E, nu, model), loads)
    # offset phase keeps the polygon from sharing vertices with the box axes
    return problem, circle_control_polygon((0.0, 0.0), D, n_hole, phase=np.pi / n_hole)


def uniaxial_plate(n=50, L=2.0, H=1.0, E=100.0, nu=0.3, stress=1.0, model="plane_strain"):
    """Solid rectangle pulled in x by traction on both ends."""
    grid = CartesianGrid.box((0.0, 0.0), (L, H), (n, max(1, int(round(n * H / L)))))
    loads = LoadSpec(
        tractions=[Traction(Box((L, 0.0), (L, H)), (stress, 0.0)),
                   Traction(Box((0.0, 0.0), (0.0, H)), (-stress, 0.0))],
        pin="xyr")
    return Problem(grid, Material(E, nu, model), loads)


def cantilever(n=80, L=2.0, H=1.0, E=100.0, nu=0.3, load_width=0.1, model="plane_stress"):
    """Cantilever clamped on the left, downward load patch at mid-height on the right."""
    grid = CartesianGrid.box((0.0, 0.0), (L, H), (n, max(1, int(round(n * H / L)))))
    loads = LoadSpec(
        dirichlet=[Dirichlet(Box((0.0, 0.0), (0.0, H)), "xy")],
        tractions=[Traction(Box((L, 0.5 * (H - load_width)), (L, 0.5 * (H + load_width))),
                            (0.0, -1.0 / load_width))])
    return Problem(grid, Material(E, nu, model), loads)


def model_of(mesh):
    return MultiresModel(mesh, [])
