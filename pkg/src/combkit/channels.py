"""CP maps and instruments in Choi form.

A map M from a ``dim_in``-dimensional system to a ``dim_out``-dimensional one
is stored as its unnormalized Choi matrix

    choi = sum_ij M(E_ij) (x) E_ij

on (output leg) (x) (input leg), obtained by letting the map act on one half
of the unnormalized maximally entangled state.  Trace-preserving maps then
have ``tr choi == dim_in`` and the identity map's Choi is the maximally
entangled state itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import config
from .errors import ShapeError, ValidationError
from .tensor import (
    as_matrix,
    freeze,
    is_hermitian,
    kron,
    max_entangled,
    partial_trace,
    require_square,
)


def _check_density(state: np.ndarray, tol: float, name: str = "state") -> np.ndarray:
    state = as_matrix(state, name)
    require_square(state, name)
    if not is_hermitian(state, tol):
        raise ValidationError(f"{name} is not Hermitian within {tol}")
    if abs(np.trace(state).real - 1.0) > tol or abs(np.trace(state).imag) > tol:
        raise ValidationError(f"{name} must have unit trace, got {np.trace(state)}")
    if np.linalg.eigvalsh((state + state.conj().T) / 2)[0] < -tol:
        raise ValidationError(f"{name} is not positive semidefinite within {tol}")
    return state


@dataclass(frozen=True, eq=False)
class ChoiChannel:
    """A completely positive, trace non-increasing map in Choi form."""

    dim_in: int
    dim_out: int
    choi: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "choi", as_matrix(self.choi, "choi"))
        d = require_square(self.choi, "choi")
        if d != self.dim_out * self.dim_in:
            raise ShapeError(
                f"choi dimension {d} != dim_out*dim_in = {self.dim_out * self.dim_in}"
            )
        tol = config.DEFAULT_TOL
        if not is_hermitian(self.choi, tol):
            raise ValidationError("choi matrix is not Hermitian within tolerance")
        if np.linalg.eigvalsh((self.choi + self.choi.conj().T) / 2)[0] < -tol:
            raise ValidationError("choi matrix is not positive semidefinite (map not CP)")
        reduced = partial_trace(self.choi, [self.dim_out, self.dim_in], [0])
        excess = np.linalg.eigvalsh(
            (reduced + reduced.conj().T) / 2 - np.eye(self.dim_in)
        )[-1]
        if excess > tol:
            raise ValidationError(
                f"map increases trace: output partial trace exceeds identity by {excess:.3e}"
            )
        object.__setattr__(self, "choi", freeze(self.choi))

    @property
    def is_trace_preserving(self) -> bool:
        reduced = partial_trace(self.choi, [self.dim_out, self.dim_in], [0])
        return bool(np.abs(reduced - np.eye(self.dim_in)).max() <= config.DEFAULT_TOL)

    def relabel(self, label: str) -> "ChoiChannel":
        return ChoiChannel(self.dim_in, self.dim_out, self.choi, label)


def choi_matrix(m) -> np.ndarray:
    """Accept either a ChoiChannel or a raw matrix and return the matrix."""
    return m.choi if isinstance(m, ChoiChannel) else as_matrix(m)


def apply_channel(channel: ChoiChannel, rho) -> np.ndarray:
    """Apply a map to a state: out[o,o'] = sum_{b,i} choi[(o,b),(o',i)] rho[b,i]."""
    rho = as_matrix(rho, "rho")
    if rho.shape != (channel.dim_in, channel.dim_in):
        raise ShapeError(
            f"state has shape {rho.shape}, channel expects "
            f"({channel.dim_in}, {channel.dim_in})"
        )
    choi4 = channel.choi.reshape(
        channel.dim_out, channel.dim_in, channel.dim_out, channel.dim_in
    )
    return np.einsum("obpi,bi->op", choi4, rho)


def channel_from_action(
    dim_in: int,
    dim_out: int,
    action: Callable[[np.ndarray], np.ndarray],
    label: str = "",
) -> ChoiChannel:
    """Choi matrix of a linear map given as a function on matrices.

    The map is evaluated on every matrix unit of the input space; the caller
    guarantees linearity.
    """
    choi4 = np.zeros((dim_out, dim_in, dim_out, dim_in), dtype=np.complex128)
    for i in range(dim_in):
        for j in range(dim_in):
            unit = np.zeros((dim_in, dim_in), dtype=np.complex128)
            unit[i, j] = 1.0
            block = as_matrix(action(unit), "action output")
            if block.shape != (dim_out, dim_out):
                raise ShapeError(
                    f"action returned shape {block.shape}, expected ({dim_out}, {dim_out})"
                )
            choi4[:, i, :, j] = block
    d = dim_out * dim_in
    return ChoiChannel(dim_in, dim_out, choi4.reshape(d, d), label)


def channel_from_kraus(kraus: Sequence, label: str = "") -> ChoiChannel:
    """Choi matrix sum_K |vec K><vec K| with row-major vectorization."""
    ops = [as_matrix(k, "kraus operator") for k in kraus]
    if not ops:
        raise ShapeError("need at least one Kraus operator")
    dim_out, dim_in = ops[0].shape
    d = dim_out * dim_in
    choi = np.zeros((d, d), dtype=np.complex128)
    for op in ops:
        if op.shape != (dim_out, dim_in):
            raise ShapeError("all Kraus operators must share one shape")
        v = op.reshape(d)
        choi += np.outer(v, v.conj())
    return ChoiChannel(dim_in, dim_out, choi, label)


def identity_channel(d: int, label: str = "identity") -> ChoiChannel:
    return ChoiChannel(d, d, max_entangled(d), label)


def unitary_channel(u, label: str = "") -> ChoiChannel:
    u = as_matrix(u, "unitary")
    d = require_square(u, "unitary")
    if np.abs(u.conj().T @ u - np.eye(d)).max() > config.DEFAULT_TOL:
        raise ValidationError("matrix is not unitary within tolerance")
    return channel_from_kraus([u], label)


def replacement_channel(state, dim_in: int | None = None, label: str = "") -> ChoiChannel:
    """The map rho -> tr(rho) * state; its Choi matrix is state (x) identity."""
    state = _check_density(state, config.DEFAULT_TOL)
    if dim_in is None:
        dim_in = state.shape[0]
    return ChoiChannel(dim_in, state.shape[0], kron(state, np.eye(dim_in)), label)


def depolarizing_channel(d: int, label: str = "depolarizing") -> ChoiChannel:
    """rho -> tr(rho) * I/d."""
    return replacement_channel(np.eye(d) / d, dim_in=d, label=label)


def dephasing_channel(basis, label: str = "dephasing") -> ChoiChannel:
    """Kill all coherences with respect to the given orthonormal basis."""
    basis = _as_basis(basis)
    kraus = [np.outer(v, v.conj()) for v in basis.vectors.T]
    return channel_from_kraus(kraus, label)


def classical_channel(transition, basis=None, label: str = "classical") -> ChoiChannel:
    """Stochastic-matrix dynamics on the basis diagonal, dephasing everything else.

    ``transition[i, j]`` is the probability of moving from basis state j to i;
    columns must sum to one.
    """
    t = np.asarray(transition, dtype=float)
    require_square(as_matrix(t, "transition"), "transition")
    if np.any(t < -config.DEFAULT_TOL) or np.abs(t.sum(axis=0) - 1.0).max() > config.DEFAULT_TOL:
        raise ValidationError("transition matrix must be column-stochastic")
    d = t.shape[0]
    basis = _as_basis(basis if basis is not None else np.eye(d))
    vs = basis.vectors

    def action(rho):
        pops = np.einsum("ij,jk,ki->i", vs.conj().T, rho, vs)
        new_pops = t @ pops
        return (vs * new_pops) @ vs.conj().T

    return channel_from_action(d, d, action, label)


@dataclass(frozen=True, eq=False)
class Basis:
    """An orthonormal basis given by matrix columns, with outcome labels."""

    vectors: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = as_matrix(self.vectors, "basis")
        d = require_square(v, "basis")
        if np.abs(v.conj().T @ v - np.eye(d)).max() > config.DEFAULT_TOL:
            raise ValidationError("basis columns are not orthonormal within 1e-10")
        object.__setattr__(self, "vectors", v)
        labels = tuple(self.labels) or tuple(str(i) for i in range(d))
        if len(labels) != d:
            raise ShapeError(f"expected {d} labels, got {len(labels)}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vectors", freeze(self.vectors))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


def _as_basis(basis) -> Basis:
    if isinstance(basis, Basis):
        return basis
    return Basis(np.asarray(basis, dtype=np.complex128))


def named_basis(name: str, dim: int = 2, labels: Sequence[str] = ()) -> Basis:
    """Built-in bases: 'z' (computational, any dim) and 'x' (qubit Hadamard)."""
    if name == "z":
        return Basis(np.eye(dim), tuple(labels))
    if name == "x":
        if dim != 2:
            raise ShapeError("the 'x' basis is only defined for dim 2")
        h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
        return Basis(h, tuple(labels))
    raise ShapeError(f"unknown basis name {name!r}; expected 'z' or 'x'")


@dataclass(frozen=True, eq=False)
class Instrument:
    """A finite set of CP maps, one per outcome, summing to a CPTP map."""

    outcomes: tuple[tuple[str, ChoiChannel], ...]

    def __post_init__(self):
        outcomes = tuple((str(lbl), ch) for lbl, ch in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        if not outcomes:
            raise ShapeError("an instrument needs at least one outcome")
        labels = [lbl for lbl, _ in outcomes]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate outcome labels: {labels}")
        first = outcomes[0][1]
        for _, ch in outcomes:
            if (ch.dim_in, ch.dim_out) != (first.dim_in, first.dim_out):
                raise ShapeError("all outcome channels must share dim_in/dim_out")
        total = sum(ch.choi for _, ch in outcomes)
        reduced = partial_trace(total, [first.dim_out, first.dim_in], [0])
        if np.abs(reduced - np.eye(first.dim_in)).max() > config.DEFAULT_TOL:
            raise ValidationError("outcome maps do not sum to a trace-preserving map")

    @property
    def dim_in(self) -> int:
        return self.outcomes[0][1].dim_in

    @property
    def dim_out(self) -> int:
        return self.outcomes[0][1].dim_out

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.outcomes)

    @property
    def channels(self) -> tuple[ChoiChannel, ...]:
        return tuple(ch for _, ch in self.outcomes)

    def total_choi(self) -> np.ndarray:
        return sum(ch.choi for _, ch in self.outcomes)


def projective_instrument(basis, labels: Sequence[str] = ()) -> Instrument:
    """One outcome per basis vector v, with map rho -> <v|rho|v> |v><v|.

    The outcome Choi matrix is |v><v| (x) |v*><v*|.
    """
    basis = _as_basis(basis)
    if labels:
        basis = Basis(basis.vectors, tuple(labels))
    outcomes = []
    for lbl, v in zip(basis.labels, basis.vectors.T):
        choi = kron(np.outer(v, v.conj()), np.outer(v.conj(), v))
        outcomes.append((lbl, ChoiChannel(basis.dim, basis.dim, choi, lbl)))
    return Instrument(tuple(outcomes))


def replacement_instrument(basis, replacements, labels: Sequence[str] = ()) -> Instrument:
    """Measure in a basis, then reprepare: rho -> <v|rho|v> * sigma_v.

    ``replacements`` maps outcome labels (or indexes by position, when given
    as a sequence) to the density matrix left behind for that outcome.
    """
    basis = _as_basis(basis)
    if labels:
        basis = Basis(basis.vectors, tuple(labels))
    if isinstance(replacements, Mapping):
        states = [replacements[lbl] for lbl in basis.labels]
    else:
        states = list(replacements)
        if len(states) != basis.dim:
            raise ShapeError(f"expected {basis.dim} replacement states, got {len(states)}")
    outcomes = []
    for lbl, v, sigma in zip(basis.labels, basis.vectors.T, states):
        sigma = _check_density(sigma, config.DEFAULT_TOL, f"replacement for {lbl!r}")
        choi = kron(sigma, np.outer(v.conj(), v))
        outcomes.append((lbl, ChoiChannel(basis.dim, sigma.shape[0], choi, lbl)))
    return Instrument(tuple(outcomes))


def generalized_identity(
    dim_in: int,
    dim_out: int,
    ancilla,
    traced: str = "trailing",
    label: str = "generalized-identity",
) -> ChoiChannel:
    """Dimension-changing identity: rho -> tr_B(rho (x) ancilla).

    The composite input (x) ancilla space is split as kept (x) traced
    (``traced='trailing'``) or traced (x) kept (``traced='leading'``); the
    kept factor must have dimension ``dim_out``.  With a trivial ancilla and
    equal dimensions this reduces to the identity channel.
    """
    eta = _check_density(ancilla, config.DEFAULT_TOL, "ancilla")
    d_anc = eta.shape[0]
    total = dim_in * d_anc
    if total % dim_out != 0:
        raise ShapeError(
            f"dim_in*dim_ancilla = {total} is not divisible by dim_out = {dim_out}"
        )
    d_traced = total // dim_out
    if traced == "trailing":
        dims, drop = [dim_out, d_traced], [1]
    elif traced == "leading":
        dims, drop = [d_traced, dim_out], [0]
    else:
        raise ShapeError(f"traced must be 'leading' or 'trailing', got {traced!r}")

    def action(rho):
        return partial_trace(kron(rho, eta), dims, drop)

    return channel_from_action(dim_in, dim_out, action, label)


def compose(second: ChoiChannel, first: ChoiChannel, label: str = "") -> ChoiChannel:
    """Choi matrix of ``second o first``."""
    if first.dim_out != second.dim_in:
        raise ShapeError(
            f"cannot compose: first outputs dim {first.dim_out}, "
            f"second expects dim {second.dim_in}"
        )
    return channel_from_action(
        first.dim_in,
        second.dim_out,
        lambda rho: apply_channel(second, apply_channel(first, rho)),
        label or f"{second.label}*{first.label}",
    )
