"""Sparse direct solution, post-processing and export."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, splu

from ..errors import DefinitenessError, NumericalError, StructuralError
from ..immersion import immerse
from .assembly import System, assemble_system
from .bspline import BsplineSpace

RESIDUAL_TOL = 1e-10


@dataclass
class ElasticSolution:
    system: System
    coefficients: np.ndarray   # full space, shape (2, n_funcs)
    active: np.ndarray         # active-space solution vector
    compliance: float
    residual: float
    iterations: int
    material: object = None
    immersion: object = None
    loads: object = None
    info: dict = field(default_factory=dict)

    @property
    def space(self):
        return self.system.space

    def evaluate(self, points, cells=None):
        """Displacement ``(n, 2)`` and gradient ``(n, 2, 2)`` with ``grad[:, i, j] = du_i/dx_j``."""
        ids, N, dx, dy = self.space.evaluate(points, cells)
        c = self.coefficients
        u = np.stack([(c[k][ids] * N).sum(1) for k in range(2)], axis=1)
        grad = np.stack([np.stack([(c[k][ids] * dx).sum(1), (c[k][ids] * dy).sum(1)], 1)
                         for k in range(2)], axis=1)
        return u, grad

    def strain_energy(self):
        """``u^T K_bulk u`` (twice the stored energy)."""
        u = self.coefficients.ravel()
        return float(u @ (self.system.K_bulk @ u))


def field_eval(solution, points, cells=None):
    """``(u, grad u, sigma, eps)`` at points (range error outside the grid)."""
    u, grad = solution.evaluate(points, cells)
    eps = 0.5 * (grad + np.transpose(grad, (0, 2, 1)))
    return u, grad, solution.material.stress(eps), eps


def _rigid_modes(space, extension, modes):
    g = space.greville()[extension.active]
    n = len(g)
    cols = []
    for m in modes:
        v = np.zeros((2, n))
        if m == "x":
            v[0] = 1.0
        elif m == "y":
            v[1] = 1.0
        elif m == "r":
            c = g.mean(axis=0)
            v[0] = -(g[:, 1] - c[1])
            v[1] = g[:, 0] - c[0]
        else:
            raise ValueError(f"unknown rigid mode {m!r}")
        cols.append(v.ravel())
    return np.array(cols).T.reshape(2 * n, len(modes))


def _pin_dofs(space, extension, modes):
    """Choose one coefficient per rigid mode such that the modes are fixed."""
    if not modes:
        return np.zeros(0, dtype=np.int64)
    R = _rigid_modes(space, extension, modes)
    g = space.greville()[extension.active]
    n = len(g)
    c = g.mean(axis=0)
    first = int(np.argmin(((g - c) ** 2).sum(1)))
    far_x = int(np.argmax(np.abs(g[:, 0] - g[first, 0]) - 1e-3 * np.abs(g[:, 1] - g[first, 1])))
    candidates = [first, n + first, n + far_x, far_x,
                  n + int(np.argmax(np.abs(g[:, 0] - c[0]))), int(np.argmax(np.abs(g[:, 1] - c[1])))]
    chosen = []
    for d in candidates:
        trial = chosen + [d]
        if np.linalg.matrix_rank(R[trial]) == len(trial):
            chosen = trial
        if len(chosen) == len(modes):
            break
    if len(chosen) < len(modes):
        raise NumericalError("could not pin rigid modes")
    return np.array(chosen, dtype=np.int64)


def _factor(A):
    lu = splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
              options={"SymmetricMode": True})
    d = lu.U.diagonal()
    return lu, float(d.min()), float(np.abs(d).max())


def solve_primal(system, loads=None, material=None, immersion=None, method="direct"):
    """Solve ``E^T K E a = E^T F`` for the active coefficients.

    The adjoint for compliance is ``-u`` and needs no extra solve.
    """
    E = system.extension.vector_matrix()
    K = (E.T @ system.K @ E).tocsr()
    F = E.T @ system.F
    n = K.shape[0]
    modes = loads.pin if loads is not None else ""
    pinned = _pin_dofs(system.space, system.extension, modes)
    if len(pinned):
        R = _rigid_modes(system.space, system.extension, modes)
        imbalance = np.abs(R.T @ F).max() / max(np.linalg.norm(F), 1e-300)
        if imbalance > 1e-8:
            raise StructuralError(
                f"loads are not self-equilibrated for pinned modes {modes!r} "
                f"(relative imbalance {imbalance:.2e})")
    free = np.setdiff1d(np.arange(n), pinned)
    Kf = K[free][:, free]
    Ff = F[free]
    a = np.zeros(n)
    iterations = 1
    fnorm = np.linalg.norm(Ff)
    if fnorm == 0.0:
        x = np.zeros(len(free))
    elif method == "direct":
        lu, dmin, dmax = _factor(Kf)
        if dmin <= 1e-14 * dmax:
            raise DefinitenessError(
                f"stiffness matrix is not positive definite (smallest pivot {dmin:.3e}, "
                f"gamma = {system.gamma:.3g}); increase the Nitsche parameter")
        x = lu.solve(Ff)
        for _ in range(3):
            r = Ff - Kf @ x
            if np.linalg.norm(r) <= 1e-3 * RESIDUAL_TOL * fnorm:
                break
            x += lu.solve(r)
            iterations += 1
    else:
        diag = Kf.diagonal()
        if np.any(diag <= 0):
            raise DefinitenessError("nonpositive diagonal in stiffness matrix")
        M = sp.diags(1.0 / diag)
        x, info = cg(Kf, Ff, rtol=1e-12, atol=0.0, M=M, maxiter=20 * len(Ff))
        iterations = info if info > 0 else 0
    a[free] = x
    res = float(np.linalg.norm(Ff - Kf @ x) / fnorm) if fnorm else 0.0
    if res > RESIDUAL_TOL:
        raise NumericalError(f"linear solve residual {res:.2e} above tolerance")
    full = (system.extension.vector_matrix() @ a).reshape(2, -1)
    J = float(system.F @ full.ravel())
    return ElasticSolution(system, full, a, J, res, iterations, material, immersion, loads)


def compliance(solution, loads=None, cutgeom=None):
    """Load work ``J = int f.u + int t.u`` using the assembly quadrature."""
    return float(solution.system.F @ solution.coefficients.ravel())


def solve(boundary, grid, material, loads, degree=2, gamma=None, immersion=None):
    """Immerse ``boundary``, assemble and solve; returns :class:`ElasticSolution`."""
    if immersion is None:
        immersion = immerse(boundary, grid, degree=degree)
    space = BsplineSpace(grid, degree)
    system = assemble_system(space, immersion, material, loads, gamma)
    return solve_primal(system, loads, material, immersion)


def sample_points(grid, per_cell=1):
    """Cell-centred sample grid (``per_cell`` points per axis and cell)."""
    nx, ny = grid.counts
    sx = grid.origin[0] + grid.spacing[0] * (np.arange(nx * per_cell) + 0.5) / per_cell
    sy = grid.origin[1] + grid.spacing[1] * (np.arange(ny * per_cell) + 0.5) / per_cell
    X, Y = np.meshgrid(sx, sy, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def write_vtk_solution(path, solution):
    """Displacement and stress at grid nodes, legacy-VTK structured points."""
    g = solution.space.grid
    nodes = g.nodes()
    pts = nodes.transpose(1, 0, 2).reshape(-1, 2)  # x fastest
    u, _, sig, _ = field_eval(solution, pts)
    phi = solution.immersion.field.phi.T.ravel() if solution.immersion is not None else None
    nx, ny = g.counts
    lines = ["# vtk DataFile Version 3.0", "elastic solution", "ASCII",
             "DATASET STRUCTURED_POINTS", f"DIMENSIONS {nx + 1} {ny + 1} 1",
             f"ORIGIN {g.origin[0]:.17g} {g.origin[1]:.17g} 0",
             f"SPACING {g.spacing[0]:.17g} {g.spacing[1]:.17g} 1",
             f"POINT_DATA {len(pts)}", "VECTORS displacement double"]
    lines += [f"{a:.17g} {b:.17g} 0" for a, b in u]
    lines += ["TENSORS stress double"]
    for s in sig:
        lines += [f"{s[0, 0]:.17g} {s[0, 1]:.17g} 0", f"{s[1, 0]:.17g} {s[1, 1]:.17g} 0", "0 0 0"]
    if phi is not None:
        lines += ["SCALARS phi double 1", "LOOKUP_TABLE default"]
        lines += ["%.17g" % v for v in np.nan_to_num(phi, posinf=1e30, neginf=-1e30)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
