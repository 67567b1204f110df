"""Exception types shared across the package."""


class CombKitError(Exception):
    """Base class for all combkit errors."""


class ShapeError(CombKitError, ValueError):
    """Matrix or leg dimensions do not line up."""


class ValidationError(CombKitError, ValueError):
    """A structural invariant (positivity, normalization, unitarity) is violated."""


class DimensionCapError(CombKitError, ValueError):
    """An operation would allocate a matrix above the configured entry cap."""


class NumericalIntegrityError(CombKitError, ArithmeticError):
    """A quantity that must be real carries an imaginary residue above tolerance."""


class SchemaError(CombKitError, ValueError):
    """A JSON document does not match the expected schema.

    ``path`` points at the first offending node, e.g. ``members[2].payload.choi.rows``.
    """

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
