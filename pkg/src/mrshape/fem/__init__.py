"""Immersed b-spline finite elements for 2D linear elasticity."""

from .assembly import System, assemble_system
from .bspline import Basis1D, BsplineSpace, Extension
from .loads import Box, Dirichlet, LoadSpec, Traction
from .material import PLANE_STRAIN, PLANE_STRESS, Material
from .solve import (ElasticSolution, compliance, field_eval, sample_points, solve,
                    solve_primal, write_vtk_solution)


def build_space(grid, degree=2, labels=None):
    """B-spline space on ``grid``; with ``labels`` also returns the extension map."""
    space = BsplineSpace(grid, degree)
    return space if labels is None else (space, Extension(space, labels))


__all__ = [
    "Basis1D", "Box", "BsplineSpace", "Dirichlet", "ElasticSolution", "Extension",
    "LoadSpec", "Material", "PLANE_STRAIN", "PLANE_STRESS", "System", "Traction",
    "assemble_system", "build_space", "compliance", "field_eval", "sample_points",
    "solve", "solve_primal", "write_vtk_solution",
]
