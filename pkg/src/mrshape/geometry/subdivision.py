"""Uniform cubic b-spline curve and Catmull-Clark surface refinement.

Two independent code paths are provided: :func:`subdivide` evaluates the
stencils directly on coordinates, :func:`subdivision_operator` assembles the
sparse matrix ``S`` with ``x_fine = S @ x_coarse``. They must agree.

Fine vertex ordering: curves interleave old (even) and new (odd) vertices;
quad meshes store original vertices, then edge points in edge order, then
face points in face order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import SizeError, StructuralError, TopologyError
from .mesh import CLOSED, OPEN, QUAD, ControlMesh


@dataclass(frozen=True)
class SubdivisionOperator:
    """Sparse refinement matrix ``S`` (n_fine x n_coarse)."""

    matrix: sp.csr_matrix

    @property
    def n_source(self):
        return self.matrix.shape[1]

    @property
    def n_target(self):
        return self.matrix.shape[0]

    def __matmul__(self, x):
        return self.matrix @ x

    def apply(self, mesh):
        return refine_topology(mesh).with_vertices(self.matrix @ mesh.vertices)


def _check_curve(mesh):
    if mesh.n_vertices < 4:
        raise SizeError(f"{mesh.kind} curve needs at least 4 vertices")


def refine_topology(mesh):
    """Connectivity and tags of the once-refined mesh (coordinates zeroed)."""
    n = mesh.n_vertices
    dim = mesh.dim
    if mesh.kind == CLOSED:
        _check_curve(mesh)
        nf = 2 * n
        frozen = np.zeros((nf, dim), dtype=bool)
        frozen[0::2] = mesh.frozen
        return ControlMesh(np.zeros((nf, dim)), CLOSED,
                           corners=[2 * c for c in mesh.corners],
                           frozen=frozen, level=mesh.level + 1)
    if mesh.kind == OPEN:
        _check_curve(mesh)
        nf = 2 * n - 1
        frozen = np.zeros((nf, dim), dtype=bool)
        frozen[0::2] = mesh.frozen
        return ControlMesh(np.zeros((nf, dim)), OPEN,
                           corners=[2 * c for c in mesh.corners],
                           frozen=frozen, level=mesh.level + 1)
    topo = mesh.topology
    n_e = len(topo.edges)
    faces = mesh.faces
    m = len(faces)
    eid = topo.edge_index

    def E(a, b):
        return n + eid[(a, b) if a < b else (b, a)]

    new_faces = np.empty((4 * m, 4), dtype=np.int64)
    for k, (a, b, c, d) in enumerate(faces.tolist()):
        F = n + n_e + k
        eab, ebc, ecd, eda = E(a, b), E(b, c), E(c, d), E(d, a)
        new_faces[4 * k:4 * k + 4] = [[a, eab, F, eda], [b, ebc, F, eab],
                                      [c, ecd, F, ebc], [d, eda, F, ecd]]
    creases = []
    for a, b in sorted(mesh.creases):
        e = E(a, b)
        creases += [(a, e), (e, b)]
    nf = n + n_e + m
    frozen = np.zeros((nf, dim), dtype=bool)
    frozen[:n] = mesh.frozen
    return ControlMesh(np.zeros((nf, dim)), QUAD, new_faces, mesh.corners,
                       frozen, creases, level=mesh.level + 1)


def subdivide(mesh):
    """One refinement step evaluated with the subdivision stencils."""
    X = mesh.vertices
    fine = refine_topology(mesh)
    if mesh.kind == CLOSED:
        prev, nxt = np.roll(X, 1, axis=0), np.roll(X, -1, axis=0)
        even = (prev + 6.0 * X + nxt) / 8.0
        corners = sorted(mesh.corners)
        even[corners] = X[corners]
        odd = 0.5 * (X + nxt)
        out = np.empty((2 * len(X), X.shape[1]))
        out[0::2], out[1::2] = even, odd
        return fine.with_vertices(out)
    if mesh.kind == OPEN:
        even = X.copy()
        even[1:-1] = (X[:-2] + 6.0 * X[1:-1] + X[2:]) / 8.0
        corners = sorted(mesh.corners)
        even[corners] = X[corners]
        odd = 0.5 * (X[:-1] + X[1:])
        out = np.empty((2 * len(X) - 1, X.shape[1]))
        out[0::2], out[1::2] = even, odd
        return fine.with_vertices(out)

    topo = mesh.topology
    faces = mesh.faces
    n = len(X)
    face_pts = X[faces].mean(axis=1)
    a, b = topo.edges[:, 0], topo.edges[:, 1]
    edge_pts = 0.5 * (X[a] + X[b])
    smooth = ~topo.sharp_edges
    f0, f1 = topo.edge_faces[smooth, 0], topo.edge_faces[smooth, 1]
    edge_pts[smooth] = 0.25 * (X[a[smooth]] + X[b[smooth]] + face_pts[f0] + face_pts[f1])
    vert_pts = np.empty_like(X)
    for v in range(n):
        kind = topo.vertex_type[v]
        if kind == 2:
            vert_pts[v] = X[v]
        elif kind == 1:
            p, q = topo.sharp_neighbours(v)
            vert_pts[v] = (X[p] + 6.0 * X[v] + X[q]) / 8.0
        else:
            k = len(topo.vertex_edges[v])
            nb = [topo.other(e, v) for e in topo.vertex_edges[v]]
            # classic form: (Q + 2R + (n-3)P) / n with face/edge-midpoint averages
            Q = face_pts[topo.vertex_faces[v]].mean(axis=0)
            R = (0.5 * (X[nb] + X[v])).mean(axis=0)
            vert_pts[v] = (Q + 2.0 * R + (k - 3.0) * X[v]) / k
    return fine.with_vertices(np.vstack([vert_pts, edge_pts, face_pts]))


def subdivide_n(mesh, levels):
    for _ in range(levels):
        mesh = subdivide(mesh)
    return mesh


def subdivision_operator(mesh):
    """Assemble the sparse subdivision matrix for ``mesh``'s connectivity."""
    rows, cols, vals = [], [], []

    def put(r, cs, ws):
        rows.extend([r] * len(cs))
        cols.extend(cs)
        vals.extend(ws)

    n = mesh.n_vertices
    if mesh.kind in (CLOSED, OPEN):
        _check_curve(mesh)
        closed = mesh.kind == CLOSED
        n_odd = n if closed else n - 1
        for i in range(n):
            ends = not closed and i in (0, n - 1)
            if i in mesh.corners or ends:
                put(2 * i, [i], [1.0])
            else:
                put(2 * i, [(i - 1) % n, i, (i + 1) % n], [0.125, 0.75, 0.125])
        for i in range(n_odd):
            put(2 * i + 1, [i, (i + 1) % n], [0.5, 0.5])
        n_fine = 2 * n if closed else 2 * n - 1
    else:
        topo = mesh.topology
        faces = mesh.faces
        n_e = len(topo.edges)
        for v in range(n):
            kind = topo.vertex_type[v]
            if kind == 2:
                put(v, [v], [1.0])
            elif kind == 1:
                p, q = topo.sharp_neighbours(v)
                put(v, [p, v, q], [0.125, 0.75, 0.125])
            else:
                k = len(topo.vertex_edges[v])
                beta, gamma = 3.0 / (2.0 * k), 1.0 / (4.0 * k)
                nb = [topo.other(e, v) for e in topo.vertex_edges[v]]
                diag = [topo.diagonal(f, v) for f in topo.vertex_faces[v]]
                put(v, [v] + nb + diag,
                    [1.0 - beta - gamma] + [beta / k] * k + [gamma / k] * k)
        for e, (a, b) in enumerate(topo.edges.tolist()):
            r = n + e
            if topo.sharp_edges[e]:
                put(r, [a, b], [0.5, 0.5])
            else:
                others = []
                for f in topo.edge_faces[e]:
                    others += [int(u) for u in faces[f] if u != a and u != b]
                put(r, [a, b] + others, [0.375, 0.375] + [0.0625] * 4)
        for k, f in enumerate(faces.tolist()):
            put(n + n_e + k, f, [0.25] * 4)
        n_fine = n + n_e + len(faces)
    S = sp.csr_matrix((vals, (rows, cols)), shape=(n_fine, n))
    S.sum_duplicates()
    return SubdivisionOperator(S)


def unrefine_topology(fine):
    """Recover the level-(l-1) connectivity whose refinement is ``fine``.

    Relies on the deterministic fine-vertex ordering. Coordinates of the
    returned mesh are the fine positions of the surviving vertices and only
    serve as placeholders.
    """
    if fine.level == 0:
        raise StructuralError("level-0 mesh has no coarser level")
    n = fine.n_vertices
    if fine.kind == CLOSED:
        if n % 2:
            raise StructuralError("closed curve with odd vertex count is not a refinement")
        keep = np.arange(0, n, 2)
    elif fine.kind == OPEN:
        if n % 2 == 0:
            raise StructuralError("open curve with even vertex count is not a refinement")
        keep = np.arange(0, n, 2)
    else:
        keep = None
    if keep is not None:
        odd_corners = [c for c in fine.corners if c % 2]
        if odd_corners:
            raise StructuralError(f"corner tag on inserted vertex {odd_corners[0]}")
        coarse = ControlMesh(fine.vertices[keep], fine.kind,
                             corners=[c // 2 for c in fine.corners],
                             frozen=fine.frozen[keep], level=fine.level - 1)
        if not refine_topology(coarse).same_connectivity(fine):
            raise StructuralError("curve is not a refinement of any coarser curve")
        return coarse

    m = len(fine.faces)
    if m % 4:
        raise StructuralError("face count is not a multiple of four")
    coarse_faces = fine.faces[:, 0].reshape(-1, 4)
    n_c = int(coarse_faces.max()) + 1
    try:
        probe = ControlMesh(fine.vertices[:n_c], QUAD, coarse_faces,
                            corners=[c for c in fine.corners if c < n_c],
                            frozen=fine.frozen[:n_c], level=fine.level - 1)
    except TopologyError as exc:
        raise StructuralError(f"fine mesh is not a refinement: {exc}") from exc
    topo = probe.topology
    creases = []
    for e, (a, b) in enumerate(topo.edges.tolist()):
        mid = n_c + e
        if tuple(sorted((a, mid))) in fine.creases:
            creases.append((a, b))
    coarse = ControlMesh(probe.vertices, QUAD, coarse_faces, probe.corners,
                         probe.frozen, creases, level=fine.level - 1)
    ref = refine_topology(coarse)
    if not ref.same_connectivity(fine) or ref.creases != fine.creases:
        raise StructuralError("quad mesh is not a refinement of any coarser mesh")
    return coarse
