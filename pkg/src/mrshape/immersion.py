"""Signed-distance immersion of boundary curves into a Cartesian grid.

Convention: ``phi < 0`` inside the solid. Grid arrays are indexed ``[i, j]``
with ``i`` along x and ``j`` along y.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError, LevelRangeError, StructuralError
from .geometry.limit import limit_position_matrix
from .geometry.mesh import CLOSED, ControlMesh

OUTSIDE, INSIDE, CUT = 0, 1, 2
BOX_LOOP = -1  # loop id used for quadrature on the grid's own boundary


@dataclass(frozen=True)
class CartesianGrid:
    origin: tuple
    spacing: tuple
    counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "spacing", tuple(float(v) for v in self.spacing))
        object.__setattr__(self, "counts", tuple(int(v) for v in self.counts))
        if len(self.origin) != 2 or len(self.spacing) != 2 or len(self.counts) != 2:
            raise ValueError("only two-dimensional grids are supported")
        if min(self.spacing) <= 0:
            raise ValueError("grid spacing must be positive")
        if min(self.counts) < 1:
            raise ValueError("grid needs at least one cell per axis")

    @classmethod
    def box(cls, lower, upper, counts):
        lower = np.asarray(lower, float)
        upper = np.asarray(upper, float)
        counts = np.asarray(counts, int)
        return cls(tuple(lower), tuple((upper - lower) / counts), tuple(counts))

    @property
    def h(self):
        return max(self.spacing)

    @property
    def upper(self):
        return tuple(o + n * s for o, n, s in zip(self.origin, self.counts, self.spacing))

    def axis_nodes(self, axis):
        return self.origin[axis] + self.spacing[axis] * np.arange(self.counts[axis] + 1)

    def nodes(self):
        """Node coordinates, shape ``(nx + 1, ny + 1, 2)``."""
        X, Y = np.meshgrid(self.axis_nodes(0), self.axis_nodes(1), indexing="ij")
        return np.stack([X, Y], axis=-1)

    def cell_bounds(self, i, j):
        x0 = self.origin[0] + i * self.spacing[0]
        y0 = self.origin[1] + j * self.spacing[1]
        return x0, y0, x0 + self.spacing[0], y0 + self.spacing[1]

    def locate(self, points):
        """Cell indices ``(i, j)`` containing each point (upper faces belong to the last cell)."""
        p = np.atleast_2d(np.asarray(points, float))
        rel = (p - np.asarray(self.origin)) / np.asarray(self.spacing)
        tol = 1e-12 * np.asarray(self.counts)
        if np.any(rel < -tol) or np.any(rel > np.asarray(self.counts) + tol):
            raise LevelRangeError("point outside the grid")
        idx = np.floor(rel).astype(np.int64)
        return np.clip(idx, 0, np.asarray(self.counts) - 1)


def boundary_polylines(boundary):
    """Limit-position polylines of one or more closed curves."""
    if boundary is None:
        return []
    meshes = [boundary] if isinstance(boundary, ControlMesh) else list(boundary)
    loops = []
    for m in meshes:
        if m.kind != CLOSED or m.dim != 2:
            raise StructuralError("immersion needs closed planar curves")
        loops.append(limit_position_matrix(m) @ m.vertices)
    return loops


def _segments(loops):
    a, b, loop_id, elem = [], [], [], []
    for k, P in enumerate(loops):
        n = len(P)
        a.append(P)
        b.append(np.roll(P, -1, axis=0))
        loop_id.append(np.full(n, k))
        elem.append(np.arange(n))
    if not a:
        z = np.zeros((0, 2))
        return z, z, np.zeros(0, int), np.zeros(0, int)
    return np.vstack(a), np.vstack(b), np.concatenate(loop_id), np.concatenate(elem)


def signed_loop_area(P):
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_segment_distance(points, a, b):
    """Pairwise distances, shape ``(len(points), len(a))``."""
    d = b - a
    L2 = np.maximum((d * d).sum(axis=1), 1e-300)
    rel = points[:, None, :] - a[None, :, :]
    t = np.clip((rel * d[None]).sum(axis=2) / L2[None], 0.0, 1.0)
    diff = rel - t[..., None] * d[None]
    return np.sqrt((diff * diff).sum(axis=2))


class _SegmentIndex:
    """Exact nearest-segment queries accelerated by a k-d tree over midpoints."""

    def __init__(self, a, b, k=8):
        self.a, self.b = a, b
        self.half = 0.5 * np.linalg.norm(b - a, axis=1).max(initial=0.0)
        self.tree = cKDTree(0.5 * (a + b))
        self.k = min(k, len(a))

    def query(self, points):
        points = np.atleast_2d(points)
        n = len(points)
        dmid, idx = self.tree.query(points, k=self.k)
        dmid = dmid.reshape(n, -1)
        idx = idx.reshape(n, -1)
        rel = points[:, None, :] - self.a[idx]
        d = self.b[idx] - self.a[idx]
        L2 = np.maximum((d * d).sum(axis=2), 1e-300)
        t = np.clip((rel * d).sum(axis=2) / L2, 0.0, 1.0)
        diff = rel - t[..., None] * d
        dist = np.sqrt((diff * diff).sum(axis=2))
        best = np.argmin(dist, axis=1)
        rows = np.arange(n)
        out_d = dist[rows, best]
        out_i = idx[rows, best]
        # segments outside the candidate set are at least dmid_k - half away
        if self.k < len(self.a):
            unsure = np.nonzero(out_d > dmid[:, -1] - self.half)[0]
            for chunk in np.array_split(unsure, max(1, len(unsure) // 2000 + 1)):
                if len(chunk):
                    full = point_segment_distance(points[chunk], self.a, self.b)
                    j = np.argmin(full, axis=1)
                    out_d[chunk] = full[np.arange(len(chunk)), j]
                    out_i[chunk] = j
        return out_d, out_i


def _row_winding(y, xs, a, b, direction):
    """Winding numbers of the points ``(xs, y)`` with respect to all segments."""
    ay, by = a[:, 1], b[:, 1]
    up = (ay <= y) & (by > y)
    down = (by <= y) & (ay > y)
    sel = up | down
    if not sel.any():
        return np.zeros(len(xs), dtype=np.int64)
    a_s, b_s = a[sel], b[sel]
    xc = a_s[:, 0] + (y - a_s[:, 1]) * (b_s[:, 0] - a_s[:, 0]) / (b_s[:, 1] - a_s[:, 1])
    sign = np.where(up[sel], 1, -1) * direction[sel]
    order = np.argsort(xc)
    xc, sign = xc[order], sign[order]
    suffix = np.concatenate([np.cumsum(sign[::-1])[::-1], [0]])
    # crossings strictly to the right of each x
    pos = np.searchsorted(xc, xs, side="right")
    return suffix[pos]


def winding_numbers(points, loops):
    """Signed containment count: +1 inside CCW loops, -1 inside CW loops."""
    points = np.atleast_2d(np.asarray(points, float))
    a, b, _, _ = _segments(loops)
    out = np.zeros(len(points), dtype=np.int64)
    if not len(a):
        return out
    ones = np.ones(len(a), dtype=np.int64)
    ys, inv = np.unique(points[:, 1], return_inverse=True)
    for k, y in enumerate(ys):
        rows = np.nonzero(inv == k)[0]
        out[rows] = _row_winding(y, points[rows, 0], a, b, ones)
    return out


def solid_mask(points, loops):
    """True where a point lies in the solid (the box is solid if there is no outer loop)."""
    w = winding_numbers(points, loops)
    background = 0 if any(signed_loop_area(P) > 0 for P in loops) else 1
    return (w + background) > 0


def check_self_intersection(loops, chunk=512):
    """Raise :class:`GeometryError` if any two non-adjacent segments intersect."""
    a, b, loop_id, elem = _segments(loops)
    n = len(a)
    sizes = np.array([len(P) for P in loops])
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    eps = 1e-12 * scale

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - \
            (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    for s in range(0, n, chunk):
        i = np.arange(s, min(n, s + chunk))[:, None]
        j = np.arange(n)[None, :]
        cand = j > i
        cand &= (lo[i, 0] <= hi[j, 0] + eps) & (lo[j, 0] <= hi[i, 0] + eps)
        cand &= (lo[i, 1] <= hi[j, 1] + eps) & (lo[j, 1] <= hi[i, 1] + eps)
        same = loop_id[i] == loop_id[j]
        m = sizes[loop_id[i]]
        gap = np.abs(elem[i] - elem[j])
        cand &= ~(same & ((gap == 1) | (gap == m - 1)))
        ii, jj = np.nonzero(cand)
        if not len(ii):
            continue
        ii = ii + s
        p1, p2, q1, q2 = a[ii], b[ii], a[jj], b[jj]
        d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
        d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
        hit = (d1 * d2 <= 0) & (d3 * d4 <= 0)
        if hit.any():
            k = int(np.argmax(hit))
            raise GeometryError(
                f"boundary self-intersection between loop {loop_id[ii[k]]} element "
                f"{elem[ii[k]]} and loop {loop_id[jj[k]]} element {elem[jj[k]]}")


@dataclass
class LevelSetField:
    grid: CartesianGrid
    phi: np.ndarray
    loops: list = field(default_factory=list)

    @cached_property
    def segments(self):
        return _segments(self.loops)

    @cached_property
    def index(self):
        a, b, _, _ = self.segments
        return _SegmentIndex(a, b) if len(a) else None

    def nearest_element(self, points):
        """``(loop, element)`` of the closest boundary segment for each point."""
        _, _, loop_id, elem = self.segments
        _, idx = self.index.query(np.atleast_2d(points))
        return loop_id[idx], elem[idx]

    def signed_distance(self, points):
        points = np.atleast_2d(np.asarray(points, float))
        inside = solid_mask(points, self.loops)
        if self.index is None:
            return np.where(inside, -np.inf, np.inf)
        d, _ = self.index.query(points)
        return np.where(inside, -d, d)

    def value(self, points):
        """Bilinear interpolation of the nodal samples."""
        points = np.atleast_2d(np.asarray(points, float))
        g = self.grid
        ij = g.locate(points)
        rel = (points - np.asarray(g.origin)) / np.asarray(g.spacing) - ij
        i, j = ij[:, 0], ij[:, 1]
        u, v = rel[:, 0], rel[:, 1]
        p = self.phi
        return ((1 - u) * (1 - v) * p[i, j] + u * (1 - v) * p[i + 1, j]
                + u * v * p[i + 1, j + 1] + (1 - u) * v * p[i, j + 1])


def build_level_set(boundary, grid, check=True):
    """Nodal signed distances to the limit polylines of ``boundary``.

    ``boundary`` is a closed curve or a list of them. Counter-clockwise
    loops bound material, clockwise loops are holes; without any
    counter-clockwise loop the grid box itself is the outer boundary.
    """
    loops = boundary_polylines(boundary)
    if check and loops:
        check_self_intersection(loops)
    nodes = grid.nodes()
    nx1, ny1 = nodes.shape[:2]
    if loops:
        allp = np.vstack(loops)
        lo, hi = np.asarray(grid.origin), np.asarray(grid.upper)
        if np.any(allp < lo - 1e-12) or np.any(allp > hi + 1e-12):
            warnings.warn("boundary extends outside the grid", RuntimeWarning, stacklevel=2)
    field_ = LevelSetField(grid, np.zeros((nx1, ny1)), loops)
    a, b, _, _ = field_.segments
    if not len(a):
        field_.phi[:] = -np.inf
        return field_
    d, _ = field_.index.query(nodes.reshape(-1, 2))
    d = d.reshape(nx1, ny1)
    xs = grid.axis_nodes(0)
    ones = np.ones(len(a), dtype=np.int64)
    w = np.empty((nx1, ny1), dtype=np.int64)
    for j, y in enumerate(grid.axis_nodes(1)):
        w[:, j] = _row_winding(y, xs, a, b, ones)
    background = 0 if any(signed_loop_area(P) > 0 for P in loops) else 1
    inside = (w + background) > 0
    field_.phi[:] = np.where(inside, -d, d)
    return field_


def classify_cells(field_):
    """Per-cell labels ``OUTSIDE``, ``INSIDE`` or ``CUT`` (array shape ``(nx, ny)``)."""
    neg = field_.phi <= 0.0
    c = np.stack([neg[:-1, :-1], neg[1:, :-1], neg[1:, 1:], neg[:-1, 1:]])
    labels = np.full(c.shape[1:], CUT, dtype=np.int8)
    labels[c.all(axis=0)] = INSIDE
    labels[(~c).all(axis=0)] = OUTSIDE
    return labels


def triangle_rule(n):
    """Collapsed Gauss rule on the reference triangle, exact to total degree ``2n - 2``."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    U, V = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w) * (1.0 - U)
    pts = np.column_stack([U.ravel(), (V * (1.0 - U)).ravel()])
    return pts, W.ravel()


def gauss_line(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


# degree-2 three-point rule (edge midpoints), kept for comparison
TRI3 = (np.array([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]), np.full(3, 1.0 / 6.0))


@dataclass
class CutCellGeometry:
    cell: tuple
    triangles: np.ndarray   # (k, 3, 2), counter-clockwise
    points: np.ndarray      # volume quadrature points
    weights: np.ndarray
    segments: np.ndarray    # (s, 2, 2) interface chords
    normals: np.ndarray     # (s, 2) outward unit normals

    @property
    def area(self):
        return float(self.weights.sum())

    @property
    def lengths(self):
        return np.linalg.norm(self.segments[:, 1] - self.segments[:, 0], axis=1)


def _clip_cell(corners, vals, centre):
    """Inside polygons (phi <= 0) of one cell and their interface chords.

    Chords are oriented along the counter-clockwise polygon boundary, from
    the exit crossing to the next entry crossing.
    """
    inside = vals <= 0.0

    def cross(k):
        a, b = k, (k + 1) % 4
        t = vals[a] / (vals[a] - vals[b])
        return corners[a] + t * (corners[b] - corners[a])

    saddle = inside[0] == inside[2] and inside[1] == inside[3] and inside[0] != inside[1]
    if saddle and centre > 0.0:
        polys, chords = [], []
        for k in np.nonzero(inside)[0]:
            p_out, p_in = cross(k), cross((k - 1) % 4)
            polys.append(np.array([corners[k], p_out, p_in]))
            chords.append((p_out, p_in))
        return polys, chords
    poly, events = [], []
    for k in range(4):
        if inside[k]:
            poly.append(corners[k])
        if inside[k] != inside[(k + 1) % 4]:
            p = cross(k)
            poly.append(p)
            events.append((bool(inside[k]), p))
    chords = []
    for n, (is_exit, p) in enumerate(events):
        if is_exit:
            for m in range(1, len(events)):
                nxt_exit, q = events[(n + m) % len(events)]
                if not nxt_exit:
                    chords.append((p, q))
                    break
    return ([np.array(poly)] if len(poly) >= 3 else []), chords


def _fan(poly):
    c = poly.mean(axis=0)
    tris = []
    for k in range(len(poly)):
        tri = np.array([c, poly[k], poly[(k + 1) % len(poly)]])
        tris.append(tri)
    return tris


def _tri_area(t):
    return 0.5 * ((t[1, 0] - t[0, 0]) * (t[2, 1] - t[0, 1])
                  - (t[1, 1] - t[0, 1]) * (t[2, 0] - t[0, 0]))


def cut_cell_quadrature(cell, field_, rule=None):
    """Triangulated inside region and interface chords of one cut cell."""
    if rule is None:
        rule = triangle_rule(4)
    ref_pts, ref_w = rule
    i, j = cell
    g = field_.grid
    x0, y0, x1, y1 = g.cell_bounds(i, j)
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    p = field_.phi
    vals = np.array([p[i, j], p[i + 1, j], p[i + 1, j + 1], p[i, j + 1]])
    polys, chords = _clip_cell(corners, vals, vals.mean())
    scale = g.spacing[0] * g.spacing[1]
    tris = []
    for poly in polys:
        for t in _fan(poly):
            if _tri_area(t) > 1e-14 * scale:
                tris.append(t)
    tris = np.array(tris).reshape(-1, 3, 2)
    if len(tris):
        e1 = tris[:, 1] - tris[:, 0]
        e2 = tris[:, 2] - tris[:, 0]
        jac = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        pts = (tris[:, None, 0] + ref_pts[None, :, 0, None] * e1[:, None]
               + ref_pts[None, :, 1, None] * e2[:, None]).reshape(-1, 2)
        wts = (jac[:, None] * ref_w[None]).ravel()
    else:
        pts, wts = np.zeros((0, 2)), np.zeros(0)
    segs, normals = [], []
    for a, b in chords:
        d = b - a
        L = np.hypot(*d)
        if L <= 1e-14 * g.h:
            continue
        segs.append([a, b])
        # polygon is counter-clockwise with material on the left: outward is to the right
        normals.append([d[1] / L, -d[0] / L])
    return CutCellGeometry((i, j), tris, pts, wts, np.array(segs).reshape(-1, 2, 2),
                           np.array(normals).reshape(-1, 2))


@dataclass
class BoundaryQuadrature:
    """Points, weights and outward normals on the solid boundary.

    ``loop``/``element`` identify the nearest boundary-curve element; points on
    the grid box have ``loop == BOX_LOOP`` and ``element`` = side id
    (0 bottom, 1 right, 2 top, 3 left).
    """

    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    cells: np.ndarray
    loop: np.ndarray
    element: np.ndarray

    def __len__(self):
        return len(self.weights)

    def subset(self, mask):
        return BoundaryQuadrature(self.points[mask], self.weights[mask], self.normals[mask],
                                  self.cells[mask], self.loop[mask], self.element[mask])

    @property
    def on_curves(self):
        return self.loop >= 0


@dataclass
class Immersion:
    """Everything the solver needs from the geometry on one grid."""

    field: LevelSetField
    labels: np.ndarray
    cut: list
    boundary: BoundaryQuadrature

    @property
    def grid(self):
        return self.field.grid

    @cached_property
    def cut_points(self):
        pts = [c.points for c in self.cut]
        return np.vstack(pts) if pts else np.zeros((0, 2))

    @cached_property
    def cut_weights(self):
        return np.concatenate([c.weights for c in self.cut]) if self.cut else np.zeros(0)

    @cached_property
    def cut_cells(self):
        return np.array([c.cell for c in self.cut], dtype=np.int64).reshape(-1, 2)

    def solid_area(self):
        inside = np.count_nonzero(self.labels == INSIDE)
        g = self.grid
        return inside * g.spacing[0] * g.spacing[1] + float(self.cut_weights.sum())


def _box_faces(field_, n_line):
    """Quadrature on the solid parts of the grid's outer faces."""
    g = field_.grid
    nx, ny = g.counts
    p = field_.phi
    xs, ys = g.axis_nodes(0), g.axis_nodes(1)
    lp, lw = gauss_line(n_line)
    sides = [  # (start nodes, end nodes, values a, values b, normal, cells)
        (np.column_stack([xs[:-1], np.full(nx, ys[0])]), np.column_stack([xs[1:], np.full(nx, ys[0])]),
         p[:-1, 0], p[1:, 0], (0.0, -1.0), np.column_stack([np.arange(nx), np.zeros(nx, int)])),
        (np.column_stack([np.full(ny, xs[-1]), ys[:-1]]), np.column_stack([np.full(ny, xs[-1]), ys[1:]]),
         p[-1, :-1], p[-1, 1:], (1.0, 0.0), np.column_stack([np.full(ny, nx - 1), np.arange(ny)])),
        (np.column_stack([xs[:-1], np.full(nx, ys[-1])]), np.column_stack([xs[1:], np.full(nx, ys[-1])]),
         p[:-1, -1], p[1:, -1], (0.0, 1.0), np.column_stack([np.arange(nx), np.full(nx, ny - 1)])),
        (np.column_stack([np.full(ny, xs[0]), ys[:-1]]), np.column_stack([np.full(ny, xs[0]), ys[1:]]),
         p[0, :-1], p[0, 1:], (-1.0, 0.0), np.column_stack([np.zeros(ny, int), np.arange(ny)])),
    ]
    out = []
    for side, (A, B, va, vb, nrm, cells) in enumerate(sides):
        ta = np.zeros(len(A))
        tb = np.ones(len(A))
        ina, inb = va <= 0, vb <= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            tc = np.where(ina != inb, va / (va - vb), 0.0)
        tb = np.where(ina & ~inb, tc, tb)
        ta = np.where(~ina & inb, tc, ta)
        keep = (ina | inb) & (tb - ta > 1e-14)
        for k in np.nonzero(keep)[0]:
            a = A[k] + ta[k] * (B[k] - A[k])
            b = A[k] + tb[k] * (B[k] - A[k])
            L = np.hypot(*(b - a))
            out.append((a[None] + lp[:, None] * (b - a)[None], lw * L,
                        np.tile(nrm, (n_line, 1)), np.tile(cells[k], (n_line, 1)), side))
    return out


def boundary_quadrature(field_, cut, n_line=3, include_box=True):
    """Gauss points along every interface chord (and solid grid-box faces)."""
    lp, lw = gauss_line(n_line)
    P, W, N, C, L, E = [], [], [], [], [], []
    for geo in cut:
        for (a, b), nrm in zip(geo.segments, geo.normals):
            length = np.hypot(*(b - a))
            P.append(a[None] + lp[:, None] * (b - a)[None])
            W.append(lw * length)
            N.append(np.tile(nrm, (n_line, 1)))
            C.append(np.tile(geo.cell, (n_line, 1)))
    n_curve = sum(len(w) for w in W)
    if n_curve:
        loop, elem = field_.nearest_element(np.vstack(P))
        L.append(loop)
        E.append(elem)
    if include_box:
        for pts, w, nrm, cells, side in _box_faces(field_, n_line):
            P.append(pts)
            W.append(w)
            N.append(nrm)
            C.append(cells)
            L.append(np.full(len(w), BOX_LOOP))
            E.append(np.full(len(w), side))
    if not W:
        z = np.zeros((0, 2))
        return BoundaryQuadrature(z, np.zeros(0), z, np.zeros((0, 2), int),
                                  np.zeros(0, int), np.zeros(0, int))
    return BoundaryQuadrature(np.vstack(P), np.concatenate(W), np.vstack(N),
                              np.vstack(C).astype(np.int64),
                              np.concatenate(L).astype(np.int64),
                              np.concatenate(E).astype(np.int64))


def immerse(boundary, grid, degree=2, check=True, field_=None):
    """Level set, classification and all quadrature for ``boundary`` on ``grid``."""
    if field_ is None:
        field_ = build_level_set(boundary, grid, check=check)
    labels = classify_cells(field_)
    rule = triangle_rule(max(2, 2 * degree))
    cut = [cut_cell_quadrature((int(i), int(j)), field_, rule)
           for i, j in zip(*np.nonzero(labels == CUT))]
    bq = boundary_quadrature(field_, cut, n_line=degree + 1)
    return Immersion(field_, labels, cut, bq)


def write_vtk_level_set(path, field_, name="phi"):
    g = field_.grid
    nx, ny = g.counts
    vals = np.nan_to_num(field_.phi, posinf=1e30, neginf=-1e30)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nlevel set\nASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx + 1} {ny + 1} 1\n")
        fh.write(f"ORIGIN {g.origin[0]:.17g} {g.origin[1]:.17g} 0\n")
        fh.write(f"SPACING {g.spacing[0]:.17g} {g.spacing[1]:.17g} 1\n")
        fh.write(f"POINT_DATA {(nx + 1) * (ny + 1)}\nSCALARS {name} double 1\nLOOKUP_TABLE default\n")
        fh.write("\n".join("%.17g" % v for v in vals.ravel(order="F")) + "\n")
