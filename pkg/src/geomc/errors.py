"""Exception types shared across the package."""


class GeomcError(Exception):
    """Base class for errors raised by geomc."""


class DimensionError(GeomcError, ValueError):
    """Operand shapes are incompatible."""


class DomainError(GeomcError, ValueError):
    """Argument lies outside the domain where the operation is defined."""


class ManifoldError(GeomcError, ValueError):
    """A point does not lie on the manifold it is used with."""


class BoundaryError(ManifoldError):
    """A simplex position lies exactly on the boundary."""


class EssError(GeomcError, ValueError):
    """Effective sample size is undefined for the given series."""


class ConfigError(GeomcError, ValueError):
    """Invalid experiment configuration or input file."""
