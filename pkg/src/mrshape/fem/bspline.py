"""Open-uniform tensor-product b-splines on a Cartesian grid and extension stabilisation."""

from __future__ import annotations

from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from ..errors import DomainTooThinError
from ..immersion import CUT, INSIDE


class Basis1D:
    """Open-uniform b-spline basis of ``degree`` over ``n_cells`` equal cells."""

    def __init__(self, x0, h, n_cells, degree):
        self.x0, self.h, self.n_cells, self.p = float(x0), float(h), int(n_cells), int(degree)
        inner = x0 + h * np.arange(n_cells + 1)
        self.knots = np.concatenate([[inner[0]] * degree, inner, [inner[-1]] * degree])
        self.n_funcs = n_cells + degree

    def cell_of(self, x):
        c = np.floor((np.asarray(x, float) - self.x0) / self.h).astype(np.int64)
        return np.clip(c, 0, self.n_cells - 1)

    def local(self, x, cell=None):
        """Values and first derivatives of the ``p + 1`` functions nonzero on ``cell``.

        Returns ``(N, dN)`` of shape ``(len(x), p + 1)``; local column ``r``
        is global function ``cell + r``.
        """
        x = np.atleast_1d(np.asarray(x, float))
        cell = self.cell_of(x) if cell is None else np.asarray(cell, np.int64)
        p, t = self.p, self.knots
        span = cell + p
        N = np.ones((len(x), 1))
        prev = N
        left = [None] + [x - t[span + 1 - j] for j in range(1, p + 1)]
        right = [None] + [t[span + j] - x for j in range(1, p + 1)]
        for j in range(1, p + 1):
            prev = N
            new = np.zeros((len(x), j + 1))
            saved = np.zeros(len(x))
            for r in range(j):
                temp = N[:, r] / (right[r + 1] + left[j - r])
                new[:, r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            new[:, j] = saved
            N = new
        dN = np.zeros_like(N)
        if p > 0:
            for r in range(p + 1):
                i = span - p + r
                if r >= 1:
                    dN[:, r] += p * prev[:, r - 1] / (t[i + p] - t[i])
                if r <= p - 1:
                    dN[:, r] -= p * prev[:, r] / (t[i + p + 1] - t[i + 1])
        return N, dN

    def greville(self):
        t, p = self.knots, self.p
        if p == 0:
            return 0.5 * (t[:-1] + t[1:])
        return np.array([t[k + 1:k + p + 1].mean() for k in range(self.n_funcs)])

    def cell_matrices(self):
        """Per-cell local matrices ``M = int N N``, ``D = int N' N'``, ``C = int N' N``."""
        xg, wg = np.polynomial.legendre.leggauss(self.p + 1)
        n = self.n_cells
        cells = np.repeat(np.arange(n), len(xg))
        x = self.x0 + self.h * (cells + np.tile(0.5 * (xg + 1.0), n))
        w = np.tile(0.5 * wg * self.h, n)
        N, dN = self.local(x, cells)
        q = len(xg)
        N = N.reshape(n, q, -1)
        dN = dN.reshape(n, q, -1)
        w = w.reshape(n, q)
        M = np.einsum("cq,cqa,cqb->cab", w, N, N)
        D = np.einsum("cq,cqa,cqb->cab", w, dN, dN)
        C = np.einsum("cq,cqa,cqb->cab", w, dN, N)
        return M, D, C

    def extrapolation_weights(self, k, cell):
        """Weights expressing function ``k``'s coefficient through the block of ``cell``.

        Exact for every polynomial of degree ``p``: uses the blossom of the
        (shifted, scaled) monomials at the knots of each function.
        """
        p, t = self.p, self.knots
        xc = self.x0 + (cell + 0.5) * self.h

        def rows(ids):
            out = np.empty((len(ids), p + 1))
            for r, i in enumerate(ids):
                args = (t[i + 1:i + p + 1] - xc) / self.h
                poly = np.poly(args) if p else np.array([1.0])
                # np.poly gives prod(x - a): coefficient of x^(p-m) is (-1)^m e_m
                e = poly * (-1.0) ** np.arange(p + 1)
                out[r] = [e[m] / comb(p, m) for m in range(p + 1)]
            return out

        block = cell + np.arange(p + 1)
        return rows([k])[0] @ np.linalg.inv(rows(block))


class BsplineSpace:
    """Tensor-product space; function ``a = ix * nfy + iy``."""

    def __init__(self, grid, degree=2):
        if not 1 <= degree <= 3:
            raise ValueError("degree must be 1, 2 or 3")
        self.grid = grid
        self.degree = degree
        self.bx = Basis1D(grid.origin[0], grid.spacing[0], grid.counts[0], degree)
        self.by = Basis1D(grid.origin[1], grid.spacing[1], grid.counts[1], degree)
        self.nfx, self.nfy = self.bx.n_funcs, self.by.n_funcs
        self.n_funcs = self.nfx * self.nfy
        self.n_local = (degree + 1) ** 2

    def cell_functions(self, cells):
        """Global ids of the functions supported on each cell, shape ``(n, (p+1)^2)``."""
        cells = np.atleast_2d(cells)
        r = np.arange(self.degree + 1)
        ix = cells[:, 0, None, None] + r[None, :, None]
        iy = cells[:, 1, None, None] + r[None, None, :]
        return (ix * self.nfy + iy).reshape(len(cells), -1)

    def evaluate(self, points, cells=None):
        """Local values and gradients at points: ``(ids, N, dNdx, dNdy)``."""
        points = np.atleast_2d(np.asarray(points, float))
        if cells is None:
            cells = self.grid.locate(points)
        Nx, dNx = self.bx.local(points[:, 0], cells[:, 0])
        Ny, dNy = self.by.local(points[:, 1], cells[:, 1])
        n = len(points)
        N = (Nx[:, :, None] * Ny[:, None, :]).reshape(n, -1)
        dx = (dNx[:, :, None] * Ny[:, None, :]).reshape(n, -1)
        dy = (Nx[:, :, None] * dNy[:, None, :]).reshape(n, -1)
        return self.cell_functions(cells), N, dx, dy

    def greville(self):
        gx, gy = self.bx.greville(), self.by.greville()
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


class Extension:
    """Map ``E`` from active (stable) coefficients to all function coefficients."""

    def __init__(self, space, labels):
        self.space = space
        inside = np.argwhere(labels == INSIDE)
        cut = np.argwhere(labels == CUT)
        if not len(inside):
            raise DomainTooThinError(
                "no cell lies fully inside the solid; refine the grid")
        nf = space.n_funcs
        stable = np.zeros(nf, dtype=bool)
        stable[space.cell_functions(inside).ravel()] = True
        candidate = stable.copy()
        if len(cut):
            candidate[space.cell_functions(cut).ravel()] = True
        self.stable = stable
        self.candidate = candidate
        self.unstable = np.nonzero(candidate & ~stable)[0]
        active = np.nonzero(stable)[0]
        self.active = active
        col = np.full(nf, -1)
        col[active] = np.arange(len(active))

        rows, cols, vals = list(active), list(range(len(active))), [1.0] * len(active)
        if len(self.unstable):
            g = space.grid
            centres = (np.asarray(g.origin) + (inside + 0.5) * np.asarray(g.spacing))
            tree = cKDTree(centres)
            _, near = tree.query(space.greville()[self.unstable])
            p = space.degree
            cache = {}
            for f, c in zip(self.unstable, near):
                kx, ky = divmod(int(f), space.nfy)
                cx, cy = (int(v) for v in inside[c])
                wx = cache.get(("x", kx, cx))
                if wx is None:
                    wx = cache[("x", kx, cx)] = space.bx.extrapolation_weights(kx, cx)
                wy = cache.get(("y", ky, cy))
                if wy is None:
                    wy = cache[("y", ky, cy)] = space.by.extrapolation_weights(ky, cy)
                block = space.cell_functions(np.array([[cx, cy]]))[0]
                rows += [int(f)] * len(block)
                cols += list(col[block])
                vals += list(np.outer(wx, wy).ravel())
        self.n_active = len(active)
        self.matrix = sp.csr_matrix((vals, (rows, cols)), shape=(nf, len(active)))

    def vector_matrix(self):
        """Block-diagonal ``E`` for the two displacement components."""
        return sp.block_diag([self.matrix, self.matrix], format="csr")
