"""Least-squares coarsening and wavelet-like analysis/synthesis."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import LevelRangeError, NumericalError, StructuralError
from .limit import local_frames
from .subdivision import refine_topology, subdivision_operator, unrefine_topology

_CACHE = {}


def _signature(mesh):
    faces = b"" if mesh.faces is None else mesh.faces.tobytes()
    # level and frozen tags are part of the key because the cached templates carry them
    return (mesh.kind, mesh.level, mesh.n_vertices, faces, tuple(sorted(mesh.corners)),
            tuple(sorted(mesh.creases)), np.asarray(mesh.frozen).tobytes())


class LevelOperators:
    """``S`` and the least-squares inverse ``R = (S^T S)^{-1} S^T`` for one coarse level."""

    def __init__(self, coarse):
        self.template = coarse
        self.S = subdivision_operator(coarse).matrix
        normal = (self.S.T @ self.S).tocsc()
        # SPD normal matrix; no pivoting needed
        self._lu = splu(normal, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                        options={"SymmetricMode": True})
        diag = self._lu.U.diagonal()
        if np.any(diag <= 1e-12 * diag.max()):
            # happens for a few tiny closed meshes, e.g. the bare cube, whose
            # alternating vertex pattern lies in the null space of S
            raise NumericalError("S has a null space; least-squares coarsening is undefined")
        self.fine_template = refine_topology(coarse)

    def refine(self, x):
        return self.S @ x

    def restrict(self, x_fine):
        rhs = np.asarray(self.S.T @ x_fine)
        return self._lu.solve(rhs) if rhs.ndim == 1 else np.column_stack(
            [self._lu.solve(np.ascontiguousarray(rhs[:, j])) for j in range(rhs.shape[1])])

    @property
    def R(self):
        """Dense restriction matrix (for inspection and tests only)."""
        return self.restrict(np.eye(self.S.shape[0]))


def level_operators(coarse):
    key = _signature(coarse)
    ops = _CACHE.get(key)
    if ops is None:
        if len(_CACHE) > 256:
            _CACHE.clear()
        ops = _CACHE[key] = LevelOperators(coarse)
    return ops


def _check_pair(fine, coarse_topology):
    ref = refine_topology(coarse_topology)
    if not ref.same_connectivity(fine) or ref.creases != fine.creases:
        raise StructuralError("coarse topology does not refine to the fine connectivity")


def coarsen(fine, coarse_topology):
    """Least-squares fit of a coarser control mesh to ``fine``."""
    _check_pair(fine, coarse_topology)
    ops = level_operators(coarse_topology)
    return coarse_topology.with_vertices(ops.restrict(fine.vertices), level=fine.level - 1)


def to_frame(frames, vectors):
    return np.einsum("nji,nj->ni", frames, vectors)


def from_frame(frames, coeffs):
    return np.einsum("nij,nj->ni", frames, coeffs)


@dataclass
class MultiresModel:
    """Base control mesh plus frame-local details for each finer level.

    ``details[k]`` holds, per vertex of level ``base.level + k + 1``, the
    detail vector expressed in the local frame of the predicted (subdivided)
    vertex position.
    """

    base: object
    details: list = field(default_factory=list)

    @property
    def base_level(self):
        return self.base.level

    @property
    def top_level(self):
        return self.base.level + len(self.details)

    def template(self, level):
        """Connectivity (and tags) at ``level``."""
        if not self.base_level <= level <= self.top_level + 64:
            raise LevelRangeError(f"level {level} outside model")
        mesh = self.base
        for _ in range(level - self.base_level):
            mesh = level_operators(mesh).fine_template
        return mesh

    def padded(self, level):
        """Copy with zero details appended up to ``level``."""
        details = list(self.details)
        mesh = self.template(self.top_level)
        for _ in range(self.top_level, level):
            mesh = level_operators(mesh).fine_template
            details.append(np.zeros((mesh.n_vertices, mesh.dim)))
        return MultiresModel(self.base, details)

    def with_base(self, base):
        return MultiresModel(base, list(self.details))

    def detail(self, level):
        """Detail coefficients refining ``level`` -> ``level + 1``."""
        k = level - self.base_level
        if not 0 <= k < len(self.details):
            raise LevelRangeError(f"no details stored for level {level}")
        return self.details[k]


def refine_with_details(mesh, coeffs):
    """One synthesis step: subdivide and add frame-local details."""
    ops = level_operators(mesh)
    p = ops.S @ mesh.vertices
    fine = ops.fine_template.with_vertices(p)
    if coeffs is None or not np.any(coeffs):
        return fine
    return fine.with_vertices(p + from_frame(local_frames(fine), coeffs))


def synthesize_from(mesh, model, target_level):
    """Refine ``mesh`` (at some level of ``model``) up to ``target_level``."""
    if target_level > model.top_level:
        raise LevelRangeError(
            f"target level {target_level} beyond stored details (top {model.top_level})")
    if target_level < mesh.level:
        raise LevelRangeError("synthesis cannot coarsen")
    for level in range(mesh.level, target_level):
        mesh = refine_with_details(mesh, model.detail(level))
    return mesh


def synthesize(model, target_level):
    """Reconstruct the control mesh at ``target_level`` from base and details."""
    if target_level < model.base_level:
        raise LevelRangeError(f"target level {target_level} below base level")
    return synthesize_from(model.base, model, target_level)


def analyze(fine, base_level=0, coarse_topologies=None):
    """Decompose ``fine`` into a base mesh at ``base_level`` plus details.

    The coarser connectivities are reconstructed from the refinement
    ordering unless given explicitly (finest first).
    """
    if not 0 <= base_level <= fine.level:
        raise LevelRangeError(f"base level {base_level} not in [0, {fine.level}]")
    details = []
    mesh = fine
    k = 0
    while mesh.level > base_level:
        topo = coarse_topologies[k] if coarse_topologies else unrefine_topology(mesh)
        coarse = coarsen(mesh, topo)
        ops = level_operators(topo)
        p = ops.fine_template.with_vertices(ops.S @ coarse.vertices)
        d = mesh.vertices - p.vertices
        details.append(to_frame(local_frames(p), d))
        mesh = coarse
        k += 1
    details.reverse()
    return MultiresModel(mesh, details)


def restrict_field(values, model, from_level, to_level):
    """Apply ``R`` repeatedly to a per-vertex field, discarding details."""
    if to_level > from_level:
        raise LevelRangeError("restriction goes to coarser levels only")
    if to_level < model.base_level:
        raise LevelRangeError(f"level {to_level} below base level")
    out = np.asarray(values, dtype=float)
    for level in range(from_level - 1, to_level - 1, -1):
        out = level_operators(model.template(level)).restrict(out)
    return out


def prolong_field(values, model, from_level, to_level):
    """Apply ``S`` repeatedly (no details) to a per-vertex field."""
    out = np.asarray(values, dtype=float)
    for level in range(from_level, to_level):
        out = level_operators(model.template(level)).S @ out
    return out


def operator_matrix(mesh):
    """Sparse ``S`` for ``mesh`` (cached)."""
    return level_operators(mesh).S


def is_sparse(a):
    return sp.issparse(a)
