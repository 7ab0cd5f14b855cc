from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PLANE_STRAIN = "plane_strain"
PLANE_STRESS = "plane_stress"


@dataclass(frozen=True)
class Material:
    """Isotropic linear elastic material in a 2D setting."""

    E: float
    nu: float
    model: str = PLANE_STRAIN

    def __post_init__(self):
        if self.model not in (PLANE_STRAIN, PLANE_STRESS):
            raise ValueError(f"unknown material model {self.model!r}")
        if not self.E > 0:
            raise ValueError("Young's modulus must be positive")
        upper_ok = self.nu < 0.5 if self.model == PLANE_STRAIN else self.nu <= 0.5
        if not (-1.0 < self.nu and upper_ok):
            raise ValueError(f"Poisson ratio {self.nu} out of range for {self.model}")

    @property
    def mu(self):
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self):
        """Effective in-plane Lame parameter."""
        E, nu = self.E, self.nu
        if self.model == PLANE_STRAIN:
            return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return E * nu / (1.0 - nu * nu)

    def stress(self, eps):
        """``sigma = lam tr(eps) I + 2 mu eps`` for arrays of shape ``(..., 2, 2)``."""
        tr = eps[..., 0, 0] + eps[..., 1, 1]
        return self.lam * tr[..., None, None] * np.eye(2) + 2.0 * self.mu * eps
