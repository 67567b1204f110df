"""Dense complex linear-algebra primitives.

Conventions used throughout the package:

* matrices are dense ``complex128`` arrays in row-major order;
* a matrix on a tensor-product space is annotated by a :class:`LegStructure`
  listing its factors left to right (leftmost leg = slowest index);
* ``basis_transpose`` is the plain transpose in the fixed reference basis,
  with no conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

from . import _kernels, config
from .errors import ShapeError, ValidationError


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    m = np.asarray(values, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValidationError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(m)


def require_square(m: np.ndarray, name: str = "matrix") -> int:
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m.shape[0]


def freeze(m: np.ndarray) -> np.ndarray:
    """Read-only view for storage in immutable containers.

    Copies only when the array is still writeable, so caller-owned buffers
    are never locked in place.
    """
    if m.flags.writeable:
        m = m.copy()
        m.setflags(write=False)
    return m


@dataclass(frozen=True)
class LegStructure:
    """Ordered tensor factorization of a square matrix dimension."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.labels) != len(self.dims):
            raise ShapeError("labels and dims must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(f"duplicate leg labels in {self.labels}")
        if any(d < 1 for d in self.dims):
            raise ValidationError("leg dimensions must be positive")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]]) -> "LegStructure":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ShapeError(f"unknown leg label {label!r}; have {self.labels}") from None


def kron(*matrices) -> np.ndarray:
    """Kronecker product, leftmost factor slowest, with a size guard."""
    if not matrices:
        raise ShapeError("kron needs at least one matrix")
    ms = [as_matrix(m) for m in matrices]
    rows = int(np.prod([m.shape[0] for m in ms], dtype=np.int64))
    cols = int(np.prod([m.shape[1] for m in ms], dtype=np.int64))
    config.ensure_within_cap(rows, cols, "kron result")
    return reduce(np.kron, ms)


def _resolve_legs(legs) -> LegStructure:
    if isinstance(legs, LegStructure):
        return legs
    first = list(legs)
    if first and isinstance(first[0], (tuple, list)):
        return LegStructure.from_pairs(first)
    # plain dimension list: positional labels
    return LegStructure(tuple(str(i) for i in range(len(first))), tuple(first))


def partial_trace(m, legs, traced) -> np.ndarray:
    """Trace out the named (or positionally indexed) legs of a square matrix."""
    m = as_matrix(m)
    dim = require_square(m)
    structure = _resolve_legs(legs)
    if structure.total_dim != dim:
        raise ShapeError(
            f"leg dims {structure.dims} have product {structure.total_dim}, "
            f"matrix dimension is {dim}"
        )
    traced_idx = set()
    for t in traced:
        traced_idx.add(t if isinstance(t, int) else structure.index(t))
    for i in traced_idx:
        if not 0 <= i < len(structure.dims):
            raise ShapeError(f"leg index {i} out of range")
    if not traced_idx:
        return m.copy()
    keep = [i not in traced_idx for i in range(len(structure.dims))]
    return _kernels.partial_trace(m, structure.dims, keep)


def basis_transpose(m) -> np.ndarray:
    """Transpose in the reference basis (no conjugation)."""
    m = as_matrix(m)
    require_square(m)
    return np.ascontiguousarray(m.T)


def max_entangled(d: int) -> np.ndarray:
    """Unnormalized maximally entangled state sum_ij |ii><jj| of dimension d^2."""
    if d < 1:
        raise ShapeError(f"dimension must be >= 1, got {d}")
    config.ensure_within_cap(d * d, d * d, "maximally entangled state")
    v = np.eye(d, dtype=np.complex128).reshape(d * d)
    return np.outer(v, v)


def is_hermitian(m, tol: float = config.DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    require_square(m)
    return bool(np.abs(m - m.conj().T).max() <= tol)


def is_psd(m, tol: float = config.DEFAULT_TOL) -> bool:
    """True iff the Hermitian matrix has minimum eigenvalue >= -tol."""
    m = as_matrix(m)
    require_square(m)
    if not is_hermitian(m, tol):
        raise ShapeError(f"matrix is not Hermitian within {tol}")
    symmetrized = (m + m.conj().T) / 2
    return bool(np.linalg.eigvalsh(symmetrized)[0] >= -tol)
