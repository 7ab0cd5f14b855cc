"""Control meshes for subdivision curves and Catmull-Clark surfaces."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ..errors import SizeError, TopologyError

CLOSED = "closed"
OPEN = "open"
QUAD = "quad"
KINDS = (CLOSED, OPEN, QUAD)


def _frozen_array(frozen, n, dim):
    mask = np.zeros((n, dim), dtype=bool)
    if frozen is None:
        return mask
    if isinstance(frozen, np.ndarray):
        mask[:] = frozen.astype(bool).reshape(n, dim)
        return mask
    axes = "xyz"[:dim]
    for i, spec in dict(frozen).items():
        if spec is True or spec is None or spec == "":
            spec = axes
        for ch in str(spec):
            if ch not in axes:
                raise ValueError(f"invalid frozen axis {ch!r} for dim {dim}")
            mask[int(i), axes.index(ch)] = True
    return mask


class ControlMesh:
    """Vertices plus connectivity of one refinement level.

    ``kind`` is ``"closed"`` (vertex cycle), ``"open"`` (vertex list) or
    ``"quad"`` (faces given as rows of four vertex ids, counter-clockwise
    when seen from outside). Tags: ``corners`` (interpolated vertices),
    ``frozen`` (per-vertex, per-axis bool mask, or ``{vertex: "xy"}``) and
    ``creases`` (quad meshes only, undirected vertex pairs).

    Instances are treated as immutable; the vertex array is read-only.
    """

    def __init__(self, vertices, kind=CLOSED, faces=None, corners=(),
                 frozen=None, creases=(), level=0):
        if kind not in KINDS:
            raise ValueError(f"unknown mesh kind {kind!r}")
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] not in (2, 3):
            raise ValueError("vertices must have shape (n, 2) or (n, 3)")
        verts.setflags(write=False)
        self.vertices = verts
        self.kind = kind
        self.level = int(level)
        n = len(verts)
        if kind == QUAD:
            if faces is None:
                raise TopologyError("quad mesh requires faces")
            f = np.array(faces, dtype=np.int64).reshape(-1, 4)
            f.setflags(write=False)
            self.faces = f
        else:
            if faces is not None:
                raise TopologyError("curves carry no faces")
            self.faces = None
            if n < 2:
                raise SizeError(f"{kind} curve needs at least 2 vertices, got {n}")
        self.corners = frozenset(int(c) for c in corners)
        for c in self.corners:
            if not 0 <= c < n:
                raise TopologyError(f"corner tag on missing vertex {c}")
        self.frozen = _frozen_array(frozen, n, self.dim)
        self.frozen.setflags(write=False)
        self.creases = frozenset(tuple(sorted((int(a), int(b)))) for a, b in creases)
        if self.creases and kind != QUAD:
            raise TopologyError("crease tags only apply to quad meshes")
        if kind == QUAD:
            self.topology  # validates eagerly

    # -- basic properties -------------------------------------------------
    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def is_curve(self):
        return self.kind != QUAD

    @property
    def is_closed(self):
        if self.kind == QUAD:
            return not self.topology.boundary_edges.any()
        return self.kind == CLOSED

    @cached_property
    def edges(self):
        """Edge list: consecutive pairs for curves, first-appearance order for quads."""
        n = self.n_vertices
        if self.kind == CLOSED:
            i = np.arange(n)
            return np.column_stack([i, (i + 1) % n])
        if self.kind == OPEN:
            i = np.arange(n - 1)
            return np.column_stack([i, i + 1])
        return self.topology.edges

    @cached_property
    def topology(self):
        if self.kind != QUAD:
            raise TopologyError("topology helper only exists for quad meshes")
        return QuadTopology(self.faces, self.n_vertices, self.creases, self.corners)

    def with_vertices(self, vertices, level=None):
        """Same connectivity and tags with new coordinates."""
        return ControlMesh(vertices, self.kind, self.faces, self.corners,
                           self.frozen, self.creases,
                           self.level if level is None else level)

    def same_connectivity(self, other):
        if self.kind != other.kind or self.n_vertices != other.n_vertices:
            return False
        if self.kind == QUAD:
            return np.array_equal(self.faces, other.faces)
        return True

    def __repr__(self):
        extra = f", faces={len(self.faces)}" if self.kind == QUAD else ""
        return (f"ControlMesh(kind={self.kind!r}, n={self.n_vertices}, "
                f"dim={self.dim}, level={self.level}{extra})")


class QuadTopology:
    """Derived connectivity of a quad mesh: edges, incidences, vertex rings."""

    def __init__(self, faces, n_vertices, creases=frozenset(), corners=frozenset()):
        faces = np.asarray(faces)
        for k, f in enumerate(faces):
            if len(set(f.tolist())) != 4:
                raise TopologyError(f"face {k} does not have 4 distinct vertices")
            if f.min() < 0 or f.max() >= n_vertices:
                raise TopologyError(f"face {k} references a missing vertex")
        directed = {}
        edge_index = {}
        edges = []
        edge_faces = []
        for k, f in enumerate(faces):
            for j in range(4):
                a, b = int(f[j]), int(f[(j + 1) % 4])
                if (a, b) in directed:
                    raise TopologyError(
                        f"directed edge ({a}, {b}) used twice: non-manifold or "
                        "inconsistent orientation")
                directed[(a, b)] = k
                key = (a, b) if a < b else (b, a)
                e = edge_index.get(key)
                if e is None:
                    e = edge_index[key] = len(edges)
                    edges.append(key)
                    edge_faces.append([k, -1])
                else:
                    if edge_faces[e][1] != -1:
                        raise TopologyError(f"edge {key} has more than two faces")
                    edge_faces[e][1] = k
        self.faces = faces
        self.n_vertices = n_vertices
        self.edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        self.edge_index = edge_index
        self.edge_faces = np.array(edge_faces, dtype=np.int64).reshape(-1, 2)
        self.directed = directed
        self.boundary_edges = self.edge_faces[:, 1] < 0
        for c in creases:
            if c not in edge_index:
                raise TopologyError(f"crease tag on missing edge {c}")
        crease_mask = np.array([e in creases for e in edges], dtype=bool)
        self.sharp_edges = crease_mask | self.boundary_edges

        used = np.zeros(n_vertices, dtype=bool)
        used[faces.ravel()] = True
        if not used.all():
            raise TopologyError(f"vertex {int(np.argmin(used))} is not used by any face")

        self.vertex_edges = [[] for _ in range(n_vertices)]
        for e, (a, b) in enumerate(edges):
            self.vertex_edges[a].append(e)
            self.vertex_edges[b].append(e)
        self.vertex_faces = [[] for _ in range(n_vertices)]
        for k, f in enumerate(faces):
            for v in f:
                self.vertex_faces[int(v)].append(k)
        self.valence = np.array([len(v) for v in self.vertex_edges])
        self.n_sharp = np.array(
            [int(self.sharp_edges[ve].sum()) for ve in self.vertex_edges])
        on_boundary = np.zeros(n_vertices, dtype=bool)
        on_boundary[self.edges[self.boundary_edges].ravel()] = True
        self.on_boundary = on_boundary
        # vertex rule type: 0 smooth, 1 crease, 2 corner
        vtype = np.zeros(n_vertices, dtype=np.int8)
        vtype[self.n_sharp == 2] = 1
        vtype[self.n_sharp >= 3] = 2
        # boundary vertex with a single face is a geometric corner
        single = np.array([len(vf) == 1 for vf in self.vertex_faces])
        vtype[on_boundary & single] = 2
        vtype[list(corners)] = 2
        self.vertex_type = vtype

    def other(self, e, v):
        a, b = self.edges[e]
        return int(b) if a == v else int(a)

    def sharp_neighbours(self, v):
        return [self.other(e, v) for e in self.vertex_edges[v] if self.sharp_edges[e]]

    def diagonal(self, face, v):
        f = self.faces[face]
        j = int(np.nonzero(f == v)[0][0])
        return int(f[(j + 2) % 4])

    def ordered_ring(self, v):
        """Edge neighbours and diagonals of an interior vertex, counter-clockwise.

        Returns ``(e, f)`` with ``f[i]`` the diagonal vertex of the face spanned
        by ``e[i]`` and ``e[i + 1]``.
        """
        if self.on_boundary[v]:
            raise TopologyError(f"vertex {v} lies on the mesh boundary")
        start = self.vertex_faces[v][0]
        e_ring, f_ring = [], []
        face = start
        for _ in range(len(self.vertex_faces[v])):
            f = self.faces[face]
            j = int(np.nonzero(f == v)[0][0])
            a, c, b = int(f[(j + 1) % 4]), int(f[(j + 2) % 4]), int(f[(j + 3) % 4])
            e_ring.append(a)
            f_ring.append(c)
            face = self.directed.get((v, b))
            if face is None:
                raise TopologyError(f"ring of vertex {v} is not closed")
            if face == start:
                break
        return e_ring, f_ring
