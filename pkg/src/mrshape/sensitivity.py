"""Shape kernel, vertex shape gradients, level projection and topology derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, LevelRangeError, StructuralError
from .fem.material import PLANE_STRAIN, PLANE_STRESS
from .fem.solve import field_eval
from .geometry.limit import limit_normals
from .geometry.multires import level_operators
from .immersion import solid_mask


@dataclass
class ShapeGradient:
    level: int
    vectors: np.ndarray
    source: str = ""

    def __add__(self, other):
        if self.level != other.level or self.vectors.shape != other.vectors.shape:
            raise StructuralError("gradients live on different levels")
        return ShapeGradient(self.level, self.vectors + other.vectors, self.source)

    def __mul__(self, s):
        return ShapeGradient(self.level, s * self.vectors, self.source)

    __rmul__ = __mul__

    def norm(self):
        return float(np.linalg.norm(self.vectors))


def shape_kernel(solution, points, loads=None, cells=None, check=True):
    """``g = 2 u.f - grad u : sigma`` at boundary points.

    Points inside a Dirichlet or traction region violate the restriction to
    the traction-free movable boundary and raise :class:`ContractError`.
    """
    points = np.atleast_2d(points)
    loads = loads if loads is not None else solution.loads
    if check and loads is not None:
        bad = loads.loaded_or_fixed(points)
        if bad.any():
            raise ContractError(
                f"shape kernel requested at {int(bad.sum())} point(s) on a loaded or "
                "supported boundary, which must stay fixed")
    u, grad, sig, _ = field_eval(solution, points, cells)
    g = -np.einsum("nij,nij->n", grad, sig)
    if loads is not None and loads.has_body_force:
        g += 2.0 * u @ np.asarray(loads.body_force, float)
    return g


def vertex_gradient(mesh, kernel, quadrature, loop=0):
    """Lump boundary-quadrature kernel values onto the vertices of ``mesh``.

    Per element: length-weighted mean kernel times element length, split
    half to each endpoint, times the limit normal. The result approximates
    ``int g N_i n ds`` and has units of cost per length.
    """
    sel = quadrature.loop == loop
    n = mesh.n_vertices
    if sel.any() and quadrature.element[sel].max() >= n:
        raise StructuralError("boundary quadrature does not belong to this mesh level")
    elem = quadrature.element[sel]
    w = quadrature.weights[sel]
    gw = np.bincount(elem, weights=w * np.asarray(kernel)[sel], minlength=n)
    # int over element = mean * length = sum(w g)
    nodal = 0.5 * (gw + np.roll(gw, 1))
    vec = nodal[:, None] * limit_normals(mesh)
    vec[mesh.frozen] = 0.0
    return ShapeGradient(mesh.level, vec, "shape")


def mask_frozen(mesh, vectors):
    out = np.array(vectors, dtype=float)
    out[mesh.frozen] = 0.0
    return out


def project_to_level(gradient, model, target_level):
    """Restrict a gradient field from its level to ``target_level`` with ``R``.

    Whatever detail the field carries between the levels is dropped.
    """
    if target_level > gradient.level:
        raise LevelRangeError("cannot project a gradient to a finer level")
    if target_level < model.base_level:
        raise LevelRangeError(f"level {target_level} below the model base level")
    out = gradient.vectors
    for level in range(gradient.level - 1, target_level - 1, -1):
        out = level_operators(model.template(level)).restrict(out)
    return ShapeGradient(target_level, out, gradient.source)


def _invariants(sigma, eps):
    sigma = np.asarray(sigma, float)
    eps = np.asarray(eps, float)
    dot = np.einsum("...ij,...ij->...", sigma, eps)
    tr_s = np.trace(sigma, axis1=-2, axis2=-1)
    tr_e = np.trace(eps, axis1=-2, axis2=-1)
    return dot, tr_s, tr_e


def topology_derivative_2d(sigma, eps, nu, model=PLANE_STRAIN):
    dot, ts, te = _invariants(sigma, eps)
    if model == PLANE_STRESS:
        return 4.0 / (1.0 + nu) * dot - (1.0 - 3.0 * nu) / (1.0 - nu * nu) * ts * te
    if model == PLANE_STRAIN:
        if abs(1.0 - 2.0 * nu) < 1e-12:
            raise ValueError("plane-strain topology derivative is singular at nu = 0.5")
        return 4.0 * (1.0 - nu) * dot - (1.0 - 4.0 * nu) * (1.0 - nu) / (1.0 - 2.0 * nu) * ts * te
    raise ValueError(f"unknown material model {model!r}")


def topology_derivative_3d(sigma, eps, nu):
    if abs(1.0 - 2.0 * nu) < 1e-12:
        raise ValueError("3D topology derivative is singular at nu = 0.5")
    dot, ts, te = _invariants(sigma, eps)
    return 1.5 * (1.0 - nu) / (7.0 - 5.0 * nu) * (
        10.0 * dot - (1.0 - 5.0 * nu) / (1.0 - 2.0 * nu) * ts * te)


@dataclass
class TopologyField:
    points: np.ndarray
    values: np.ndarray

    def minimum(self):
        k = int(np.argmin(self.values))
        return self.points[k], float(self.values[k])


def topology_derivative(solution, material, points):
    """Topology derivative of compliance at interior points."""
    points = np.atleast_2d(points)
    field_ = solution.immersion.field if solution.immersion is not None else None
    if field_ is not None and field_.loops:
        inside = solid_mask(points, field_.loops)
        if not inside.all():
            raise ContractError(f"{int((~inside).sum())} point(s) lie outside the solid")
    _, _, sig, eps = field_eval(solution, points)
    return TopologyField(points, topology_derivative_2d(sig, eps, material.nu, material.model))


def write_vtk_points(path, points, values, name="DT"):
    n = len(points)
    lines = ["# vtk DataFile Version 3.0", name, "ASCII", "DATASET POLYDATA",
             f"POINTS {n} double"]
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in points]
    lines += [f"VERTICES {n} {2 * n}"] + [f"1 {k}" for k in range(n)]
    lines += [f"POINT_DATA {n}", f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
    lines += ["%.17g" % v for v in values]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
