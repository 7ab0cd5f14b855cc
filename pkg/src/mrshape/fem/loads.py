from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_AXES = "xy"


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned region ``lower <= p <= upper`` (with a small tolerance)."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))

    def contains(self, points, tol=1e-9):
        p = np.atleast_2d(points)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return np.all((p >= lo - tol) & (p <= hi + tol), axis=1)

    def overlaps(self, other):
        return all(a <= d and c <= b for a, b, c, d in
                   zip(self.lower, self.upper, other.lower, other.upper))


@dataclass(frozen=True)
class Dirichlet:
    """Homogeneous displacement condition on the listed components."""

    region: Box
    components: str = "xy"

    def mask(self):
        return np.array([c in self.components for c in _AXES], dtype=float)


@dataclass(frozen=True)
class Traction:
    region: Box
    value: tuple


@dataclass
class LoadSpec:
    """Body force, traction regions, Dirichlet regions and rigid-mode pinning.

    ``pin`` lists rigid modes removed by fixing a few coefficients: any of
    ``"x"``, ``"y"`` (translations) and ``"r"`` (rotation). Only valid when
    the loads are self-equilibrated with respect to those modes.
    """

    dirichlet: list = field(default_factory=list)
    tractions: list = field(default_factory=list)
    body_force: tuple = (0.0, 0.0)
    pin: str = ""

    def dirichlet_mask(self, points):
        """Per-point component mask ``(n, 2)`` of constrained displacement."""
        m = np.zeros((len(points), 2))
        for d in self.dirichlet:
            m = np.maximum(m, d.region.contains(points)[:, None] * d.mask()[None])
        return m

    def traction_at(self, points):
        t = np.zeros((len(points), 2))
        for tr in self.tractions:
            t += tr.region.contains(points)[:, None] * np.asarray(tr.value, float)[None]
        return t

    def loaded_or_fixed(self, points):
        """True where a point belongs to a Dirichlet or traction region."""
        hit = np.zeros(len(points), dtype=bool)
        for d in self.dirichlet:
            hit |= d.region.contains(points)
        for tr in self.tractions:
            hit |= tr.region.contains(points)
        return hit

    @property
    def has_body_force(self):
        return any(v != 0.0 for v in self.body_force)
