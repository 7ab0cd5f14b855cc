"""Limit-position and limit-tangent masks, normals and local vertex frames."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import NumericalError
from .mesh import CLOSED, OPEN, QUAD
from .subdivision import subdivision_operator


def _csr(rows, cols, vals, shape):
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)


def limit_position_matrix(mesh):
    """Sparse ``L`` with ``L @ x`` the limit positions of the vertices."""
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    if mesh.is_curve:
        for i in range(n):
            end = mesh.kind == OPEN and i in (0, n - 1)
            if end or i in mesh.corners:
                rows.append(i), cols.append(i), vals.append(1.0)
            else:
                rows += [i] * 3
                cols += [(i - 1) % n, i, (i + 1) % n]
                vals += [1 / 6, 2 / 3, 1 / 6]
        return _csr(rows, cols, vals, (n, n))
    topo = mesh.topology
    for v in range(n):
        kind = topo.vertex_type[v]
        if kind == 2:
            rows.append(v), cols.append(v), vals.append(1.0)
        elif kind == 1:
            p, q = topo.sharp_neighbours(v)
            rows += [v] * 3
            cols += [p, v, q]
            vals += [1 / 6, 2 / 3, 1 / 6]
        else:
            e, f = topo.ordered_ring(v)
            k = len(e)
            den = k * (k + 5.0)
            rows += [v] * (2 * k + 1)
            cols += [v] + e + f
            vals += [k * k / den] + [4.0 / den] * k + [1.0 / den] * k
    return _csr(rows, cols, vals, (n, n))


def curve_tangent_matrix(mesh):
    """Parametric limit derivative at non-corner curve vertices (zero rows at corners)."""
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for i in range(n):
        if (mesh.kind == OPEN and i in (0, n - 1)) or i in mesh.corners:
            continue
        rows += [i, i]
        cols += [(i - 1) % n, (i + 1) % n]
        vals += [-0.5, 0.5]
    return _csr(rows, cols, vals, (n, n))


def surface_tangent_masks(mesh):
    """Two limit tangent masks per smooth vertex (zero rows elsewhere)."""
    topo = mesh.topology
    n = mesh.n_vertices
    r, c1, v1, c2, v2 = [], [], [], [], []
    for v in range(n):
        if topo.vertex_type[v] != 0:
            continue
        e, f = topo.ordered_ring(v)
        k = len(e)
        ang = 2.0 * np.pi * np.arange(k) / k
        A = 1.0 + np.cos(2 * np.pi / k) + np.cos(np.pi / k) * np.sqrt(2 * (9 + np.cos(2 * np.pi / k)))
        cu = np.cos(ang)
        su = np.sin(ang)
        r += [v] * (2 * k)
        c1 += e + f
        v1 += list(A * cu) + list(cu + np.roll(cu, -1))
        c2 += e + f
        v2 += list(A * su) + list(su + np.roll(su, -1))
    return _csr(r, c1, v1, (n, n)), _csr(r, c2, v2, (n, n))


def element_midpoint_masks(mesh):
    """Limit position and parametric derivative(s) at element midpoints.

    Curves: ``(P, D)``, one row per control-polygon edge. Quad meshes:
    ``(P, U, V)``, one row per face; ``U x V`` points outward for faces
    ordered counter-clockwise when seen from outside.
    """
    S = subdivision_operator(mesh).matrix
    n = mesh.n_vertices
    if mesh.is_curve:
        n_el = n if mesh.kind == CLOSED else n - 1
        i = np.arange(n_el)
        e0 = S[2 * i]
        mid = S[2 * i + 1]
        e1 = S[(2 * i + 2) % S.shape[0]]
        P = (e0 + 4.0 * mid + e1) / 6.0
        D = e1 - e0
        return P.tocsr(), D.tocsr()
    topo = mesh.topology
    faces = mesh.faces
    n_e = len(topo.edges)
    eid = topo.edge_index
    V = [S[faces[:, j]] for j in range(4)]
    E = []
    for j in range(4):
        a, b = faces[:, j], faces[:, (j + 1) % 4]
        ids = [n + eid[(x, y) if x < y else (y, x)] for x, y in zip(a.tolist(), b.tolist())]
        E.append(S[ids])
    F = S[n + n_e + np.arange(len(faces))]
    P = (16.0 * F + 4.0 * (E[0] + E[1] + E[2] + E[3]) + V[0] + V[1] + V[2] + V[3]) / 36.0
    U = (V[1] - V[0] + 4.0 * (E[1] - E[3]) + V[2] - V[3]) / 6.0
    W = (V[3] - V[0] + 4.0 * (E[2] - E[0]) + V[2] - V[1]) / 6.0
    return P.tocsr(), U.tocsr(), W.tocsr()


def _unit(v, what):
    norm = np.linalg.norm(v, axis=1)
    bad = np.nonzero(norm <= 1e-14 * max(1.0, norm.max(initial=0.0)))[0]
    if len(bad):
        raise NumericalError(f"degenerate {what} at vertex {int(bad[0])}")
    return v / norm[:, None]


def _rot_right(t):
    return np.column_stack([t[:, 1], -t[:, 0]])


def limit_normals(mesh):
    """Outward unit normals at the vertices.

    For curves the right-hand normal of the limit tangent is used, which points
    outward for counter-clockwise loops and into the hole for clockwise ones
    (the solid lies to the left of the direction of travel).
    """
    X = mesh.vertices
    n = mesh.n_vertices
    if mesh.is_curve:
        if mesh.dim != 2:
            raise NumericalError("curve normals are only defined in the plane")
        t = curve_tangent_matrix(mesh) @ X
        sharp = sorted(set(mesh.corners) | ({0, n - 1} if mesh.kind == OPEN else set()))
        smooth = np.setdiff1d(np.arange(n), sharp)
        N = np.zeros_like(X)
        N[smooth] = _rot_right(_unit(t[smooth], "limit tangent")) if len(smooth) else 0.0
        for i in sharp:
            acc = np.zeros(2)
            if mesh.kind == CLOSED or i > 0:
                d = X[i] - X[(i - 1) % n]
                acc += _rot_right(_unit(d[None], "edge"))[0]
            if mesh.kind == CLOSED or i < n - 1:
                d = X[(i + 1) % n] - X[i]
                acc += _rot_right(_unit(d[None], "edge"))[0]
            nrm = np.linalg.norm(acc)
            if nrm < 1e-12:
                raise NumericalError(f"cusp at corner vertex {i}")
            N[i] = acc / nrm
        return N

    topo = mesh.topology
    T1, T2 = surface_tangent_masks(mesh)
    N = np.cross(T1 @ X, T2 @ X)
    smooth = topo.vertex_type == 0
    other = np.nonzero(~smooth)[0]
    if len(other):
        P, U, W = element_midpoint_masks(mesh)
        fn = _unit(np.cross(U @ X, W @ X), "face normal")
        for v in other:
            N[v] = fn[topo.vertex_faces[v]].sum(axis=0)
    return _unit(N, "limit normal")


def local_frames(mesh):
    """Orthonormal frames per vertex, columns ``[tangent(s)..., normal]``."""
    X = mesh.vertices
    N = limit_normals(mesh)
    if mesh.is_curve:
        T = np.column_stack([-N[:, 1], N[:, 0]])
        return np.stack([T, N], axis=2)
    topo = mesh.topology
    first = np.array([topo.other(ve[0], v) for v, ve in enumerate(topo.vertex_edges)])
    d = X[first] - X
    d -= (d * N).sum(axis=1)[:, None] * N
    T1 = _unit(d, "frame tangent")
    T2 = np.cross(N, T1)
    return np.stack([T1, T2, N], axis=2)
