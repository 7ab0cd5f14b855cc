"""Exception types raised across the package."""


class MrShapeError(Exception):
    """Base class for all package errors."""


class TopologyError(MrShapeError):
    """Non-manifold, inconsistently oriented or otherwise invalid connectivity."""


class SizeError(MrShapeError):
    """Too few vertices for the subdivision stencils."""


class StructuralError(MrShapeError):
    """Meshes, levels or quadratures that do not belong together."""


class LevelRangeError(MrShapeError):
    """Requested refinement level outside the stored range."""


class NumericalError(MrShapeError):
    """Degenerate geometry, e.g. a zero-length limit tangent."""


class GeometryError(MrShapeError):
    """Self-intersecting or otherwise invalid boundary geometry."""


class DomainTooThinError(MrShapeError):
    """No fully-inside cell exists, so the basis cannot be stabilised."""


class DefinitenessError(MrShapeError):
    """The system matrix is not positive definite."""


class ContractError(MrShapeError):
    """An operation was called outside its documented preconditions."""


class ConfigError(MrShapeError):
    """Invalid configuration file content."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
