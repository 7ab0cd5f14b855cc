import numpy as np
import pytest

from mrshape.geometry import QUAD, ControlMesh, subdivide


def cube_mesh():
    v = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], float)

    def i(x, y, z):
        return 4 * x + 2 * y + z

    faces = [[i(0, 0, 0), i(0, 1, 0), i(1, 1, 0), i(1, 0, 0)],
             [i(0, 0, 1), i(1, 0, 1), i(1, 1, 1), i(0, 1, 1)],
             [i(0, 0, 0), i(1, 0, 0), i(1, 0, 1), i(0, 0, 1)],
             [i(0, 1, 0), i(0, 1, 1), i(1, 1, 1), i(1, 1, 0)],
             [i(0, 0, 0), i(0, 0, 1), i(0, 1, 1), i(0, 1, 0)],
             [i(1, 0, 0), i(1, 1, 0), i(1, 1, 1), i(1, 0, 1)]]
    return ControlMesh(v, QUAD, faces)


def torus_mesh(n=6, m=4, R=2.0, r=0.7):
    u = 2 * np.pi * np.arange(n) / n
    w = 2 * np.pi * np.arange(m) / m
    U, W = np.meshgrid(u, w, indexing="ij")
    v = np.column_stack([((R + r * np.cos(W)) * np.cos(U)).ravel(),
                         ((R + r * np.cos(W)) * np.sin(U)).ravel(),
                         (r * np.sin(W)).ravel()])
    faces = [[a * m + b, ((a + 1) % n) * m + b, ((a + 1) % n) * m + (b + 1) % m,
              a * m + (b + 1) % m] for a in range(n) for b in range(m)]
    return ControlMesh(v, QUAD, faces)


def grid_patch(n=3, corners=True):
    """Open planar ``n x n`` quad patch, boundary vertices tagged as corners at the four ends."""
    xs = np.arange(n + 1, dtype=float)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    v = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    faces = [[a * (n + 1) + b, (a + 1) * (n + 1) + b, (a + 1) * (n + 1) + b + 1,
              a * (n + 1) + b + 1] for a in range(n) for b in range(n)]
    c = [0, n, n * (n + 1), (n + 1) ** 2 - 1] if corners else []
    return ControlMesh(v, QUAD, faces, corners=c)


def star_curve(rng, n, radius=1.0, wobble=0.3, clockwise=False):
    t = 2 * np.pi * np.arange(n) / n + rng.uniform(-0.3, 0.3, n) * (2 * np.pi / n)
    r = radius * (1 + wobble * rng.uniform(-1, 1, n))
    if clockwise:
        t = -t
    return ControlMesh(np.column_stack([r * np.cos(t), r * np.sin(t)]))


def random_quad_mesh(rng):
    kind = rng.integers(3)
    if kind == 0:
        base = subdivide(cube_mesh())
    elif kind == 1:
        base = torus_mesh(int(rng.integers(3, 7)), int(rng.integers(3, 6)))
    else:
        base = grid_patch(int(rng.integers(2, 5)))
    return base.with_vertices(base.vertices + 0.1 * rng.normal(size=base.vertices.shape), level=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cube():
    return cube_mesh()
