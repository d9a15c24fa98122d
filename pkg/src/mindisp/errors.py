"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An argument lies outside the range where a formula or procedure is valid."""


class DimensionError(ValueError):
    """A box and a point (or point set) disagree on dimension."""


class PointFormatError(ValueError):
    """Malformed point-set CSV input."""
