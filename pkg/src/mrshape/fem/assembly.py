"""Stiffness and load assembly for the immersed Nitsche formulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..immersion import INSIDE
from .bspline import BsplineSpace, Extension


@dataclass
class System:
    """Full-space operators (both components stacked: ``[u_x; u_y]``)."""

    space: BsplineSpace
    extension: Extension
    K_bulk: sp.csr_matrix
    K_nitsche: sp.csr_matrix
    F: np.ndarray
    gamma: float

    @property
    def K(self):
        return (self.K_bulk + self.K_nitsche).tocsr()


def _coo(ids_r, ids_c, blocks, nf):
    """Scatter per-cell blocks ``(n, 2, nl, 2, nl)`` into a ``(2 nf, 2 nf)`` matrix."""
    n, _, nl, _, _ = blocks.shape
    comp = np.arange(2)
    R = (comp[None, :, None, None, None] * nf + ids_r[:, None, :, None, None])
    C = (comp[None, None, None, :, None] * nf + ids_c[:, None, None, None, :])
    R = np.broadcast_to(R, blocks.shape).ravel()
    C = np.broadcast_to(C, blocks.shape).ravel()
    return sp.coo_matrix((blocks.ravel(), (R, C)), shape=(2 * nf, 2 * nf))


def _inside_blocks(space, cells, lam, mu):
    Mx, Dx, Cx = space.bx.cell_matrices()
    My, Dy, Cy = space.by.cell_matrices()
    i, j = cells[:, 0], cells[:, 1]

    def kron(A, B):
        n, p1, _ = A.shape
        return np.einsum("nab,ncd->nacbd", A, B).reshape(n, p1 * p1, p1 * p1)

    DM = kron(Dx[i], My[j])
    MD = kron(Mx[i], Dy[j])
    # C[a, b] = int N_a' N_b, so int N_a,x N_b,y = kron(Cx, Cy^T)
    CxCyT = kron(Cx[i], np.transpose(Cy[j], (0, 2, 1)))
    CxTCy = kron(np.transpose(Cx[i], (0, 2, 1)), Cy[j])
    n, nl, _ = DM.shape
    B = np.empty((n, 2, nl, 2, nl))
    B[:, 0, :, 0, :] = (lam + 2 * mu) * DM + mu * MD
    B[:, 1, :, 1, :] = mu * DM + (lam + 2 * mu) * MD
    # rows: test function, cols: trial. test x / trial y: lam N_b,x N_a,y + mu N_b,y N_a,x
    B[:, 0, :, 1, :] = lam * CxCyT + mu * CxTCy
    B[:, 1, :, 0, :] = np.transpose(B[:, 0, :, 1, :], (0, 2, 1))
    return B


def _point_blocks(w, dx, dy, lam, mu):
    """Per-point bulk stiffness blocks ``(n, 2, nl, 2, nl)``."""
    xx = np.einsum("q,qa,qb->qab", w, dx, dx)
    yy = np.einsum("q,qa,qb->qab", w, dy, dy)
    xy = np.einsum("q,qa,qb->qab", w, dx, dy)
    n, nl, _ = xx.shape
    B = np.empty((n, 2, nl, 2, nl))
    B[:, 0, :, 0, :] = (lam + 2 * mu) * xx + mu * yy
    B[:, 1, :, 1, :] = mu * xx + (lam + 2 * mu) * yy
    B[:, 0, :, 1, :] = lam * xy + mu * np.transpose(xy, (0, 2, 1))
    B[:, 1, :, 0, :] = np.transpose(B[:, 0, :, 1, :], (0, 2, 1))
    return B


def _reduce_by_cell(cells, arr, grid):
    """Sum per-point arrays over points sharing a cell; returns (unique cells, sums)."""
    key = cells[:, 0] * grid.counts[1] + cells[:, 1]
    order = np.argsort(key, kind="stable")
    key = key[order]
    starts = np.concatenate([[0], np.nonzero(np.diff(key))[0] + 1])
    return cells[order][starts], np.add.reduceat(arr[order], starts, axis=0)


def traction_operator(material, dx, dy, normals):
    """``T[c_u][c_t]``: traction component ``c_t`` produced by local functions in ``c_u``."""
    lam, mu = material.lam, material.mu
    nx, ny = normals[:, 0:1], normals[:, 1:2]
    return (
        ((lam + 2 * mu) * dx * nx + mu * dy * ny, mu * dy * nx + lam * dx * ny),
        (lam * dy * nx + mu * dx * ny, mu * dx * nx + (lam + 2 * mu) * dy * ny),
    )


def assemble_system(space, immersion, material, loads, gamma=None):
    """Assemble bulk and Nitsche stiffness and the load vector on ``space``.

    ``gamma`` defaults to ``10 E``; the penalty term uses ``gamma / h``.
    """
    if gamma is None:
        gamma = 10.0 * material.E
    if gamma <= 0:
        raise ValueError("Nitsche parameter must be positive")
    grid = immersion.grid
    nf = space.n_funcs
    lam, mu = material.lam, material.mu
    ext = Extension(space, immersion.labels)

    inside = np.argwhere(immersion.labels == INSIDE)
    ids_in = space.cell_functions(inside)
    K = _coo(ids_in, ids_in, _inside_blocks(space, inside, lam, mu), nf).tocsr()

    F = np.zeros(2 * nf)
    if len(immersion.cut):
        pts, w, cc = immersion.cut_points, immersion.cut_weights, None
        cell_of_pt = np.repeat(immersion.cut_cells,
                               [len(c.weights) for c in immersion.cut], axis=0)
        ids, N, dx, dy = space.evaluate(pts, cell_of_pt)
        cells_u, blocks = _reduce_by_cell(cell_of_pt, _point_blocks(w, dx, dy, lam, mu), grid)
        ids_u = space.cell_functions(cells_u)
        K = K + _coo(ids_u, ids_u, blocks, nf).tocsr()
        if loads.has_body_force:
            for c in range(2):
                np.add.at(F, c * nf + ids, w[:, None] * N * loads.body_force[c])
    if loads.has_body_force and len(inside):
        _body_force_inside(space, inside, loads.body_force, F)

    bq = immersion.boundary
    K_n = sp.csr_matrix((2 * nf, 2 * nf))
    if len(bq):
        ids, N, dx, dy = space.evaluate(bq.points, bq.cells)
        t_bar = loads.traction_at(bq.points)
        for c in range(2):
            np.add.at(F, c * nf + ids, (bq.weights * t_bar[:, c])[:, None] * N)
        m = loads.dirichlet_mask(bq.points)
        sel = np.nonzero(m.any(axis=1))[0]
        if len(sel):
            K_n = _nitsche(material, gamma / grid.h, bq.weights[sel], m[sel], bq.normals[sel],
                           N[sel], dx[sel], dy[sel], ids[sel], nf)
    return System(space, ext, K.tocsr(), K_n, F, gamma)


def _nitsche(material, pen, w, m, normals, N, dx, dy, ids, nf):
    T = traction_operator(material, dx, dy, normals)
    n, nl = N.shape
    B = np.zeros((n, 2, nl, 2, nl))
    for i in range(2):          # test component
        for j in range(2):      # trial component
            # -m_i T[j][i]_a N_b - m_j N_a T[i][j]_b, a trial, b test
            blk = -m[:, i, None, None] * np.einsum("qb,qa->qba", N, T[j][i])
            blk -= m[:, j, None, None] * np.einsum("qb,qa->qba", T[i][j], N)
            if i == j:
                blk += pen * m[:, i, None, None] * np.einsum("qb,qa->qba", N, N)
            B[:, i, :, j, :] = w[:, None, None] * blk
    return _coo(ids, ids, B, nf).tocsr()


def _body_force_inside(space, cells, f, F):
    g = space.grid
    xg, wg = np.polynomial.legendre.leggauss(space.degree + 1)
    u = 0.5 * (xg + 1.0)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wg, wg).ravel() * 0.25 * g.spacing[0] * g.spacing[1]
    lo = np.asarray(g.origin) + cells * np.asarray(g.spacing)
    pts = (lo[:, None, :] + np.stack([U.ravel(), V.ravel()], 1)[None] * np.asarray(g.spacing))
    q = pts.shape[1]
    cell_rep = np.repeat(cells, q, axis=0)
    ids, N, _, _ = space.evaluate(pts.reshape(-1, 2), cell_rep)
    w = np.tile(W, len(cells))
    nf = space.n_funcs
    for c in range(2):
        np.add.at(F, c * nf + ids, (w * f[c])[:, None] * N)
