"""Subdivision geometry, multiresolution editing and boundary measures."""

from .limit import (element_midpoint_masks, limit_normals, limit_position_matrix,
                    local_frames)
from .measures import enclosed_measure, measure_gradient, perimeter_and_gradient
from .mesh import CLOSED, OPEN, QUAD, ControlMesh, QuadTopology
from .multires import (MultiresModel, analyze, coarsen, level_operators, restrict_field,
                       synthesize, synthesize_from)
from .subdivision import (SubdivisionOperator, refine_topology, subdivide, subdivide_n,
                          subdivision_operator, unrefine_topology)

build_subdivision_operator = subdivision_operator

__all__ = [
    "CLOSED", "OPEN", "QUAD", "ControlMesh", "QuadTopology", "SubdivisionOperator",
    "MultiresModel", "analyze", "build_subdivision_operator", "coarsen",
    "element_midpoint_masks", "enclosed_measure", "level_operators", "limit_normals",
    "limit_position_matrix", "local_frames", "measure_gradient", "perimeter_and_gradient",
    "refine_topology", "restrict_field", "subdivide", "subdivide_n", "subdivision_operator",
    "synthesize", "synthesize_from", "unrefine_topology",
]
