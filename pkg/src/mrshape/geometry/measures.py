"""Boundary-integral area/volume and perimeter with exact discrete gradients.

All quantities use one quadrature point per control-mesh element, placed at
the element midpoint of the limit curve/surface.
"""

from __future__ import annotations

import numpy as np

from ..errors import StructuralError
from .limit import element_midpoint_masks


def _require_closed(mesh):
    if not mesh.is_closed:
        raise StructuralError("boundary integrals need a closed curve or surface")


def enclosed_measure(mesh):
    """Signed area (2D) or volume (3D) enclosed by the limit boundary."""
    _require_closed(mesh)
    X = mesh.vertices
    if mesh.is_curve:
        P, D = element_midpoint_masks(mesh)
        a, b = P @ X, D @ X
        return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]))
    P, U, W = element_midpoint_masks(mesh)
    a = P @ X
    return float(np.sum(a * np.cross(U @ X, W @ X))) / 3.0


def measure_gradient(mesh):
    """Gradient of :func:`enclosed_measure` w.r.t. every vertex coordinate."""
    _require_closed(mesh)
    X = mesh.vertices
    if mesh.is_curve:
        P, D = element_midpoint_masks(mesh)
        a, b = P @ X, D @ X
        ga = np.column_stack([b[:, 1], -b[:, 0]])
        gb = np.column_stack([-a[:, 1], a[:, 0]])
        return 0.5 * (P.T @ ga + D.T @ gb)
    P, U, W = element_midpoint_masks(mesh)
    a, u, w = P @ X, U @ X, W @ X
    return (P.T @ np.cross(u, w) + U.T @ np.cross(w, a) + W.T @ np.cross(a, u)) / 3.0


def perimeter_and_gradient(mesh):
    """Perimeter (2D) or surface area (3D) and its vertex gradient."""
    _require_closed(mesh)
    X = mesh.vertices
    if mesh.is_curve:
        _, D = element_midpoint_masks(mesh)
        b = D @ X
        ln = np.linalg.norm(b, axis=1)
        return float(ln.sum()), D.T @ (b / ln[:, None])
    _, U, W = element_midpoint_masks(mesh)
    u, w = U @ X, W @ X
    c = np.cross(u, w)
    ln = np.linalg.norm(c, axis=1)
    c_hat = c / ln[:, None]
    grad = U.T @ np.cross(w, c_hat) + W.T @ np.cross(c_hat, u)
    return float(ln.sum()), grad
