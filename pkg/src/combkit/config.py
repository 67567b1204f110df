"""Tolerances and size limits.

The dimension cap bounds the number of entries of any matrix the package will
allocate; it exists to fail fast on accidental tensor blow-ups.  It can be
overridden through the ``COMBKIT_DIM_CAP`` environment variable.
"""

import os

from .errors import DimensionCapError

DEFAULT_TOL = 1e-10
"""Default tolerance for Hermiticity, positivity and trace conditions."""

FAMILY_TOL = 1e-9
"""Default tolerance for family-level consistency and classicality checks."""

IMAG_TOL = 1e-10
"""Maximum imaginary residue tolerated when a contraction must be real."""

DEFAULT_DIM_CAP = 1 << 20
"""Default maximum number of matrix entries (rows * cols)."""

ENV_DIM_CAP = "COMBKIT_DIM_CAP"
ENV_BACKEND = "COMBKIT_BACKEND"


def dim_cap() -> int:
    """Current matrix-entry cap, honoring the environment override."""
    raw = os.environ.get(ENV_DIM_CAP)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        value = int(raw)
    except ValueError as exc:
        raise DimensionCapError(f"{ENV_DIM_CAP} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise DimensionCapError(f"{ENV_DIM_CAP} must be positive, got {value}")
    return value


def ensure_within_cap(rows: int, cols: int, context: str = "matrix") -> None:
    """Raise :class:`DimensionCapError` if ``rows * cols`` exceeds the cap."""
    cap = dim_cap()
    if rows * cols > cap:
        raise DimensionCapError(
            f"{context} of shape {rows}x{cols} has {rows * cols} entries, "
            f"exceeding the cap of {cap} (set {ENV_DIM_CAP} to raise it)"
        )
