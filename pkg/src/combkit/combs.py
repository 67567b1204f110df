"""Multi-time process combs in Choi form.

A k-step comb maps one CP map per time slot to a probability.  Its Choi
matrix lives on the tensor product of per-slot (output leg) (x) (input leg)
factors ordered by *descending* time: the latest slot comes first.  Time
labels themselves are kept in ascending order everywhere else (the JSON
schema records this split under ``leg_order``).

The probability of a sequence of maps is the elementwise contraction

    p = sum over all entries of (M_k (x) ... (x) M_1) * Upsilon

which equals ``tr[(M_k^T (x) ... (x) M_1^T) Upsilon]`` with transpositions in
the reference basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels, config
from .channels import ChoiChannel, Instrument, _check_density, choi_matrix, identity_channel
from .distributions import JointDistribution
from .errors import NumericalIntegrityError, ShapeError, ValidationError
from .tensor import as_matrix, freeze, is_hermitian, kron, require_square
from .times import as_times, default_times


@dataclass(frozen=True, eq=False)
class Comb:
    """A k-step process: ascending time labels, per-slot dims, Choi matrix."""

    times: tuple[str, ...]
    dims_in: tuple[int, ...]
    dims_out: tuple[int, ...]
    choi: np.ndarray

    def __post_init__(self):
        times = tuple(str(t) for t in self.times)
        if list(times) != sorted(set(times)):
            raise ValidationError(f"time labels must be strictly increasing: {times}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "dims_in", tuple(int(d) for d in self.dims_in))
        object.__setattr__(self, "dims_out", tuple(int(d) for d in self.dims_out))
        if not (len(times) == len(self.dims_in) == len(self.dims_out)):
            raise ShapeError("times, dims_in and dims_out must have equal length")
        if any(d < 1 for d in self.dims_in + self.dims_out):
            raise ValidationError("slot dimensions must be positive")
        object.__setattr__(self, "choi", as_matrix(self.choi, "comb choi"))
        d = require_square(self.choi, "comb choi")
        expected = 1
        for din, dout in zip(self.dims_in, self.dims_out):
            expected *= din * dout
        if d != expected:
            raise ShapeError(f"choi dimension {d} != product of slot dims {expected}")
        config.ensure_within_cap(d, d, "comb choi")
        if not is_hermitian(self.choi, config.DEFAULT_TOL):
            raise ValidationError("comb choi matrix is not Hermitian within tolerance")
        object.__setattr__(self, "choi", freeze(self.choi))

    @property
    def k(self) -> int:
        return len(self.times)

    def slot_index(self, time: str) -> int:
        try:
            return self.times.index(time)
        except ValueError:
            raise ShapeError(f"unknown time {time!r}; comb times are {self.times}") from None

    def slot_dims(self, time: str) -> tuple[int, int]:
        i = self.slot_index(time)
        return self.dims_in[i], self.dims_out[i]

    @property
    def composite_dims_desc(self) -> tuple[int, ...]:
        """Per-slot (out*in) dimensions in storage (descending-time) order."""
        return tuple(
            self.dims_out[i] * self.dims_in[i] for i in reversed(range(self.k))
        )

    @property
    def leg_dims_desc(self) -> tuple[int, ...]:
        dims = []
        for i in reversed(range(self.k)):
            dims.extend((self.dims_out[i], self.dims_in[i]))
        return tuple(dims)

    def validate(self, tol: float = config.DEFAULT_TOL) -> None:
        """Check positivity of the Choi matrix (Hermiticity is checked at init)."""
        sym = (self.choi + self.choi.conj().T) / 2
        low = np.linalg.eigvalsh(sym)[0]
        if low < -tol:
            raise ValidationError(f"comb choi has negative eigenvalue {low:.3e}")


@dataclass(frozen=True, eq=False)
class Dilation:
    """System-environment realization: initial joint state plus one joint
    unitary per inter-time interval (the j-th unitary propagates into time j)."""

    system_dim: int
    env_dim: int
    initial: np.ndarray
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        ds, de = int(self.system_dim), int(self.env_dim)
        if ds < 1 or de < 1:
            raise ValidationError("system and environment dimensions must be positive")
        object.__setattr__(self, "system_dim", ds)
        object.__setattr__(self, "env_dim", de)
        initial = _check_density(self.initial, config.DEFAULT_TOL, "initial state")
        if initial.shape[0] != ds * de:
            raise ShapeError(
                f"initial state dimension {initial.shape[0]} != system*env = {ds * de}"
            )
        object.__setattr__(self, "initial", initial)
        us = tuple(as_matrix(u, "unitary") for u in self.unitaries)
        for u in us:
            if u.shape != (ds * de, ds * de):
                raise ShapeError(f"unitary has shape {u.shape}, expected {(ds * de,) * 2}")
            if np.abs(u.conj().T @ u - np.eye(ds * de)).max() > config.DEFAULT_TOL:
                raise ValidationError("propagator is not unitary within tolerance")
        object.__setattr__(self, "unitaries", tuple(freeze(u) for u in us))
        object.__setattr__(self, "initial", freeze(initial))


def _maps_in_storage_order(comb: Comb, maps) -> list[np.ndarray]:
    if isinstance(maps, Mapping):
        missing = [t for t in comb.times if t not in maps]
        if missing:
            raise ShapeError(f"missing maps for times {missing}")
        ordered = [maps[t] for t in comb.times]
    else:
        ordered = list(maps)
        if len(ordered) != comb.k:
            raise ShapeError(f"expected {comb.k} maps, got {len(ordered)}")
    mats = []
    for i, m in enumerate(ordered):
        mat = choi_matrix(m)
        d = comb.dims_out[i] * comb.dims_in[i]
        if mat.shape != (d, d):
            raise ShapeError(
                f"map at time {comb.times[i]!r} has shape {mat.shape}, "
                f"slot expects ({d}, {d})"
            )
        if isinstance(m, ChoiChannel) and (m.dim_in, m.dim_out) != (
            comb.dims_in[i],
            comb.dims_out[i],
        ):
            raise ShapeError(
                f"channel at time {comb.times[i]!r} maps dim {m.dim_in}->{m.dim_out}, "
                f"slot expects {comb.dims_in[i]}->{comb.dims_out[i]}"
            )
        mats.append(mat)
    return list(reversed(mats))


def contract(comb: Comb, maps, imag_tol: float = config.IMAG_TOL) -> float:
    """Probability of a sequence of maps, one per slot (ascending order or
    keyed by time).  Raw matrices are accepted alongside ChoiChannels so the
    contraction can be probed linearly."""
    mats = _maps_in_storage_order(comb, maps)
    value = _kernels.contract_sequence(comb.choi, comb.composite_dims_desc, mats)
    if abs(value.imag) > imag_tol:
        raise NumericalIntegrityError(
            f"contraction has imaginary residue {value.imag:.3e} (tol {imag_tol})"
        )
    return float(value.real)


def outcome_distribution(comb: Comb, instruments) -> JointDistribution:
    """Joint outcome distribution of one instrument per slot."""
    if isinstance(instruments, Mapping):
        missing = [t for t in comb.times if t not in instruments]
        if missing:
            raise ShapeError(f"missing instruments for times {missing}")
        ordered = [instruments[t] for t in comb.times]
    else:
        ordered = list(instruments)
        if len(ordered) != comb.k:
            raise ShapeError(f"expected {comb.k} instruments, got {len(ordered)}")
    for i, inst in enumerate(ordered):
        if not isinstance(inst, Instrument):
            raise ShapeError(f"expected an Instrument at time {comb.times[i]!r}")
        if (inst.dim_in, inst.dim_out) != (comb.dims_in[i], comb.dims_out[i]):
            raise ShapeError(
                f"instrument at time {comb.times[i]!r} maps dim "
                f"{inst.dim_in}->{inst.dim_out}, slot expects "
                f"{comb.dims_in[i]}->{comb.dims_out[i]}"
            )

    comp = list(comb.composite_dims_desc)
    tensor = comb.choi.reshape(comp + comp)
    col = comb.k
    for inst in reversed(ordered):
        stack = np.stack([ch.choi for ch in inst.channels])
        tensor = np.tensordot(tensor, stack, axes=([0, col], [1, 2]))
        col -= 1
    # outcome axes are now in descending time order
    tensor = tensor.transpose(tuple(reversed(range(comb.k))))
    imag = np.abs(tensor.imag).max() if tensor.size else 0.0
    if imag > config.IMAG_TOL:
        raise NumericalIntegrityError(
            f"outcome table has imaginary residue {imag:.3e}"
        )
    return JointDistribution(
        comb.times,
        tuple(inst.labels for inst in ordered),
        np.ascontiguousarray(tensor.real),
    )


def restrict(comb: Comb, subset, identities: Mapping[str, ChoiChannel] | None = None) -> Comb:
    """Comb on fewer times, obtained by inserting the identity channel at the
    removed slots (equivalently: projecting those slots onto the maximally
    entangled state and tracing them out).

    Removed slots with unequal in/out dimensions need an explicit
    dimension-changing identity supplied through ``identities``.
    """
    subset = as_times(subset)
    unknown = [t for t in subset if t not in comb.times]
    if unknown:
        raise ShapeError(f"subset times {unknown} not in comb times {comb.times}")
    if subset == comb.times:
        return Comb(comb.times, comb.dims_in, comb.dims_out, comb.choi)

    identities = dict(identities or {})
    removed = [t for t in comb.times if t not in subset]
    special = []
    for t in removed:
        din, dout = comb.slot_dims(t)
        if t in identities:
            special.append(t)
        elif din != dout:
            raise ShapeError(
                f"slot {t!r} has dims {din}->{dout}; removing it needs a "
                f"registered dimension-changing identity"
            )

    times_desc = list(reversed(comb.times))
    comp = list(comb.composite_dims_desc)
    matrix = comb.choi
    if special:
        tensor = matrix.reshape(comp + comp)
        k_cur = len(times_desc)
        for t in special:
            g = identities[t]
            din, dout = comb.slot_dims(t)
            if (g.dim_in, g.dim_out) != (din, dout):
                raise ShapeError(
                    f"registered identity at {t!r} maps dim {g.dim_in}->{g.dim_out}, "
                    f"slot has {din}->{dout}"
                )
            s = times_desc.index(t)
            tensor = np.tensordot(tensor, g.choi, axes=([s, k_cur + s], [0, 1]))
            del times_desc[s]
            del comp[s]
            k_cur -= 1
        d_rem = int(np.prod(comp, dtype=np.int64)) if comp else 1
        matrix = tensor.reshape(d_rem, d_rem)

    removed_mask = [t not in subset for t in times_desc]
    out_desc = [comb.dims_out[comb.slot_index(t)] for t in times_desc]
    in_desc = [comb.dims_in[comb.slot_index(t)] for t in times_desc]
    if any(removed_mask):
        matrix = _kernels.restrict_slots(matrix, out_desc, in_desc, removed_mask)

    kept_idx = [comb.slot_index(t) for t in subset]
    return Comb(
        subset,
        tuple(comb.dims_in[i] for i in kept_idx),
        tuple(comb.dims_out[i] for i in kept_idx),
        matrix,
    )


def pad_with_identities(
    maps: Mapping[str, ChoiChannel],
    comb: Comb,
    identities: Mapping[str, ChoiChannel] | None = None,
) -> dict[str, ChoiChannel]:
    """Extend maps given on a subset of the comb's times to all of them by
    inserting the identity channel (or a registered dimension-changing one)
    at each missing time."""
    identities = dict(identities or {})
    unknown = [t for t in maps if t not in comb.times]
    if unknown:
        raise ShapeError(f"map times {unknown} not in comb times {comb.times}")
    padded: dict[str, ChoiChannel] = {}
    for t in comb.times:
        if t in maps:
            padded[t] = maps[t]
            continue
        din, dout = comb.slot_dims(t)
        if t in identities:
            g = identities[t]
            if (g.dim_in, g.dim_out) != (din, dout):
                raise ShapeError(
                    f"registered identity at {t!r} maps dim {g.dim_in}->{g.dim_out}, "
                    f"slot has {din}->{dout}"
                )
            padded[t] = g
        elif din == dout:
            padded[t] = identity_channel(din)
        else:
            raise ShapeError(
                f"slot {t!r} has dims {din}->{dout}; padding it needs a "
                f"registered dimension-changing identity"
            )
    return padded


def comb_from_dilation(dilation: Dilation, times) -> Comb:
    """Comb of a system-environment process: the j-th unitary propagates the
    joint state into time j, the intervention acts on the system alone, and
    the environment is traced after the last time."""
    times = as_times(times)
    k = len(times)
    if len(dilation.unitaries) != k:
        raise ShapeError(
            f"need one propagator per time: {k} times, {len(dilation.unitaries)} unitaries"
        )
    ds, de = dilation.system_dim, dilation.env_dim
    final_dim = ds ** (2 * k)
    config.ensure_within_cap(final_dim, final_dim, "comb choi")
    config.ensure_within_cap(final_dim * de, final_dim * de, "dilation intermediate")

    tensor = dilation.initial.reshape(ds, de, ds, de)
    m = 2  # row axes: system, environment, then frozen slot legs (latest first)
    for j, u in enumerate(dilation.unitaries):
        u4 = u.reshape(ds, de, ds, de)
        labels = list(range(2 * m))
        a, b, c, d = 2 * m, 2 * m + 1, 2 * m + 2, 2 * m + 3
        out = [a, b] + labels[2:m] + [c, d] + labels[m + 2 :]
        tensor = np.einsum(u4, [a, b, 0, 1], tensor, labels, u4.conj(), [c, d, m, m + 1], out)
        if j < k - 1:
            # freeze the system leg as this slot's input leg; the slot's output
            # leg and the fresh system leg are locked equal by a delta
            labels = list(range(2 * m))
            sa, oa, sc, oc = 2 * m, 2 * m + 1, 2 * m + 2, 2 * m + 3
            eye = np.eye(ds, dtype=np.complex128)
            out_rows = [sa, 1, oa, 0] + labels[2:m]
            out_cols = [sc, m + 1, oc, m] + labels[m + 2 :]
            tensor = np.einsum(eye, [sa, oa], eye, [sc, oc], tensor, labels, out_rows + out_cols)
            m += 2

    # last slot: trace the environment, freeze the system leg as the input
    # leg, then prepend the identity output leg
    labels = list(range(2 * m))
    labels[m + 1] = 1
    out = [0] + labels[2:m] + [m] + labels[m + 2 :]
    tensor = np.einsum(tensor, labels, out)
    m -= 1
    labels = list(range(2 * m))
    x, y = 2 * m, 2 * m + 1
    eye = np.eye(ds, dtype=np.complex128)
    out = [x] + labels[:m] + [y] + labels[m:]
    tensor = np.einsum(eye, [x, y], tensor, labels, out)

    choi = tensor.reshape(final_dim, final_dim)
    return Comb(times, (ds,) * k, (ds,) * k, choi)


def comb_from_chain(initial, links: Sequence[ChoiChannel], times=None) -> Comb:
    """Memoryless comb: an initial state feeding a chain of channels, one
    between each pair of consecutive times.  The Choi matrix factorizes as
    identity (x) link_{k-1} (x) ... (x) link_1 (x) initial in storage order."""
    initial = _check_density(initial, config.DEFAULT_TOL, "initial state")
    links = list(links)
    k = len(links) + 1
    times = as_times(times) if times is not None else default_times(k)
    if len(times) != k:
        raise ShapeError(f"need {k} time labels for {len(links)} links, got {len(times)}")
    dims_in = [initial.shape[0]] + [l.dim_out for l in links]
    dims_out = [l.dim_in for l in links] + [dims_in[-1]]
    factors = [np.eye(dims_out[-1], dtype=np.complex128)]
    factors += [l.choi for l in reversed(links)]
    factors += [initial]
    choi = kron(*factors)
    return Comb(times, tuple(dims_in), tuple(dims_out), choi)


@dataclass(frozen=True)
class CausalOrderReport:
    """Per-level deviations of the recursive causal-order trace conditions."""

    ok: bool
    tol: float
    levels: tuple[tuple[str, float], ...]
    first_violation: str | None

    @property
    def max_deviation(self) -> float:
        return max((d for _, d in self.levels), default=0.0)

    def __str__(self) -> str:
        status = "ok" if self.ok else f"violated at {self.first_violation}"
        rows = ", ".join(f"{name}={dev:.3e}" for name, dev in self.levels)
        return f"causal order {status} (tol {self.tol:g}): {rows}"


def check_causal_order(comb: Comb, tol: float = config.DEFAULT_TOL) -> CausalOrderReport:
    """Check, latest slot first, that the comb factorizes as identity on the
    slot's output leg times a comb on the remaining slots, peeling one slot
    per level; the fully peeled scalar must be 1.  Equivalently: replacing
    the intervention at the latest remaining time by any trace-preserving
    map cannot change earlier statistics."""
    cur = comb.choi
    leg_dims = list(comb.leg_dims_desc)
    levels: list[tuple[str, float]] = []
    first_violation = None
    for t in reversed(comb.times):
        d_out = leg_dims[0]
        keep = [False] + [True] * (len(leg_dims) - 1)
        reduced = _kernels.partial_trace(cur, leg_dims, keep) / d_out
        deviation = float(np.abs(cur - kron(np.eye(d_out), reduced)).max())
        levels.append((t, deviation))
        if deviation > tol and first_violation is None:
            first_violation = t
        leg_dims = leg_dims[1:]
        keep = [False] + [True] * (len(leg_dims) - 1)
        cur = _kernels.partial_trace(reduced, leg_dims, keep)
        leg_dims = leg_dims[1:]
    norm_dev = float(abs(cur[0, 0] - 1.0))
    levels.append(("normalization", norm_dev))
    if norm_dev > tol and first_violation is None:
        first_violation = "normalization"
    return CausalOrderReport(
        ok=first_violation is None,
        tol=tol,
        levels=tuple(levels),
        first_violation=first_violation,
    )
