"""Geometry kernel error types."""


class GeomError(Exception):
    """Base class for geometry evaluation errors."""


class SelfIntersecting(GeomError):
    """A loop's boundary crosses itself (or another loop of the same face)."""


class ZeroHeight(GeomError):
    """An extrusion's top and bottom planes coincide."""


class EmptyResult(GeomError):
    """A Boolean combination left no surface to sample."""
