"""Families of combs / distributions over subsets of a ground time set, and
the checks that decide whether they fit together.

A distribution family is consistent when every member is the marginal of
every containing member.  A comb family is consistent when every member is
recovered from every containing member by inserting identity channels at the
extra times.  A comb family is classical with respect to per-time reference
bases when its fixed-basis outcome statistics form a consistent distribution
family.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import config
from .channels import Basis, ChoiChannel, named_basis, projective_instrument
from .combs import Comb, check_causal_order, outcome_distribution, restrict
from .distributions import JointDistribution, marginalize
from .errors import ShapeError, ValidationError
from .times import as_times


def _normalize_members(members) -> dict[tuple[str, ...], object]:
    out = {}
    for key, value in dict(members).items():
        out[as_times(key)] = value
    return out


@dataclass(frozen=True, eq=False)
class DistributionFamily:
    """Joint distributions indexed by finite subsets of a ground time set."""

    ground_times: tuple[str, ...]
    members: Mapping[tuple[str, ...], JointDistribution]

    def __post_init__(self):
        object.__setattr__(self, "ground_times", as_times(self.ground_times))
        members = _normalize_members(self.members)
        alphabets: dict[str, tuple[str, ...]] = {}
        for times, dist in members.items():
            if dist.times != times:
                raise ShapeError(f"member keyed {times} has times {dist.times}")
            missing = [t for t in times if t not in self.ground_times]
            if missing:
                raise ShapeError(f"member times {missing} outside ground set")
            for t in times:
                alpha = dist.alphabet(t)
                if alphabets.setdefault(t, alpha) != alpha:
                    raise ValidationError(
                        f"alphabet mismatch at time {t!r}: {alphabets[t]} vs {alpha}"
                    )
        object.__setattr__(self, "members", members)


@dataclass(frozen=True, eq=False)
class CombFamily:
    """Combs indexed by finite subsets of a ground time set.

    Construction verifies that members agree on slot dimensions at shared
    times, are positive semidefinite, and individually satisfy the
    causal-order trace conditions.
    """

    ground_times: tuple[str, ...]
    members: Mapping[tuple[str, ...], Comb]

    def __post_init__(self):
        object.__setattr__(self, "ground_times", as_times(self.ground_times))
        members = _normalize_members(self.members)
        dims: dict[str, tuple[int, int]] = {}
        for times, comb in members.items():
            if comb.times != times:
                raise ShapeError(f"member keyed {times} has times {comb.times}")
            missing = [t for t in times if t not in self.ground_times]
            if missing:
                raise ShapeError(f"member times {missing} outside ground set")
            for t in times:
                slot = comb.slot_dims(t)
                if dims.setdefault(t, slot) != slot:
                    raise ShapeError(
                        f"slot dimension mismatch at time {t!r}: {dims[t]} vs {slot}"
                    )
            comb.validate()
            order = check_causal_order(comb)
            if not order.ok:
                raise ValidationError(
                    f"member {times} violates causal order at {order.first_violation} "
                    f"(deviation {order.max_deviation:.3e})"
                )
        object.__setattr__(self, "members", members)

    def slot_dims(self, time: str) -> tuple[int, int]:
        for times, comb in self.members.items():
            if time in times:
                return comb.slot_dims(time)
        raise ShapeError(f"no member contains time {time!r}")


@dataclass(frozen=True)
class PairDeviation:
    sub: tuple[str, ...]
    sup: tuple[str, ...]
    deviation: float


@dataclass(frozen=True)
class ConsistencyReport:
    """Deviation per nested pair of members, with a global verdict at ``tol``."""

    pairs: tuple[PairDeviation, ...]
    tol: float

    @property
    def max_deviation(self) -> float:
        return max((p.deviation for p in self.pairs), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def deviation_at(self, sub, sup) -> float:
        sub, sup = as_times(sub), as_times(sup)
        for p in self.pairs:
            if p.sub == sub and p.sup == sup:
                return p.deviation
        raise ShapeError(f"no pair ({sub}, {sup}) in report")

    def as_dict(self) -> dict:
        return {
            "pairs": [
                {"sub": list(p.sub), "super": list(p.sup), "deviation": p.deviation}
                for p in self.pairs
            ],
            "pass": self.passed,
            "tol": self.tol,
        }

    def to_table(self) -> str:
        lines = [f"{'subset':<24} {'superset':<24} {'deviation':<24} status"]
        for p in self.pairs:
            status = "ok" if p.deviation <= self.tol else "FAIL"
            lines.append(
                f"{','.join(p.sub):<24} {','.join(p.sup):<24} {p.deviation:<24.17g} {status}"
            )
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(
            f"{verdict}: {len(self.pairs)} pair(s), max deviation "
            f"{self.max_deviation:.17g}, tol {self.tol:.17g}"
        )
        return "\n".join(lines)


def _nested_pairs(keys) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """All (sub, sup) pairs of member keys with sub a proper subset of sup."""
    keys = sorted(keys, key=lambda k: (len(k), k))
    pairs = []
    for sub, sup in itertools.permutations(keys, 2):
        if set(sub) < set(sup):
            pairs.append((sub, sup))
    pairs.sort(key=lambda p: (len(p[0]), p[0], len(p[1]), p[1]))
    return pairs


def check_distribution_consistency(
    family: DistributionFamily, tol: float = config.FAMILY_TOL
) -> ConsistencyReport:
    """For every nested pair, compare the smaller member against the marginal
    of the larger one (maximum absolute probability difference)."""
    pairs = []
    for sub, sup in _nested_pairs(family.members):
        marg = marginalize(family.members[sup], sub)
        deviation = float(np.abs(family.members[sub].table - marg.table).max())
        pairs.append(PairDeviation(sub, sup, deviation))
    return ConsistencyReport(tuple(pairs), tol)


def check_comb_consistency(
    family: CombFamily,
    tol: float = config.FAMILY_TOL,
    identities: Mapping[str, ChoiChannel] | None = None,
) -> ConsistencyReport:
    """For every nested pair, compare the smaller member against the
    identity-restriction of the larger one (entrywise max norm on Choi
    matrices)."""
    pairs = []
    for sub, sup in _nested_pairs(family.members):
        restricted = restrict(family.members[sup], sub, identities)
        deviation = float(np.abs(family.members[sub].choi - restricted.choi).max())
        pairs.append(PairDeviation(sub, sup, deviation))
    return ConsistencyReport(tuple(pairs), tol)


def verify_extension(
    candidate: Comb,
    family: CombFamily,
    tol: float = config.FAMILY_TOL,
    identities: Mapping[str, ChoiChannel] | None = None,
) -> ConsistencyReport:
    """Check that restricting the candidate reproduces every family member."""
    if candidate.times != family.ground_times:
        raise ShapeError(
            f"candidate times {candidate.times} != family ground set {family.ground_times}"
        )
    pairs = []
    for times in sorted(family.members, key=lambda k: (len(k), k)):
        restricted = restrict(candidate, times, identities)
        deviation = float(np.abs(family.members[times].choi - restricted.choi).max())
        pairs.append(PairDeviation(times, candidate.times, deviation))
    return ConsistencyReport(tuple(pairs), tol)


def embed_classical(dist: JointDistribution) -> Comb:
    """Embed a joint distribution as a diagonal comb.

    Each slot carries the identity on its output leg and the reference-basis
    projector of the recorded outcome on its input leg; contracting with the
    matching projective instruments returns the original probabilities.
    """
    dims = [len(a) for a in dist.alphabets]
    k = len(dims)
    total = 1
    for din in dims:
        total *= din * din
    config.ensure_within_cap(total, total, "embedded comb choi")
    table_desc = dist.table.transpose(tuple(reversed(range(k)))) if k else dist.table
    operands: list = [table_desc, [2 * j + 1 for j in range(k)]]
    for j, d in enumerate(reversed(dims)):
        operands += [np.ones(d), [2 * j]]
    diag = np.einsum(*operands, list(range(2 * k)))
    choi = np.diag(diag.reshape(-1).astype(np.complex128))
    return Comb(dist.times, tuple(dims), tuple(dims), choi)


def _resolve_bases(family: CombFamily, bases) -> dict[str, Basis]:
    """Per-time reference bases from a name, a Basis, or a per-time mapping."""
    resolved: dict[str, Basis] = {}
    present = sorted({t for times in family.members for t in times})
    for t in present:
        din, dout = family.slot_dims(t)
        if din != dout:
            raise ShapeError(
                f"slot {t!r} has dims {din}->{dout}; fixed-basis statistics "
                f"need square slots"
            )
        spec = bases[t] if isinstance(bases, Mapping) else bases
        if isinstance(spec, str):
            resolved[t] = named_basis(spec, din)
        elif isinstance(spec, Basis):
            if spec.dim != din:
                raise ShapeError(
                    f"basis at {t!r} has dim {spec.dim}, slot has dim {din}"
                )
            resolved[t] = spec
        else:
            resolved[t] = Basis(np.asarray(spec, dtype=np.complex128))
    return resolved


def fixed_basis_distributions(family: CombFamily, bases) -> DistributionFamily:
    """Outcome statistics of every member under projective measurements in
    the per-time reference bases (the family's classical shadow)."""
    basis_by_time = _resolve_bases(family, bases)
    members = {
        times: outcome_distribution(
            comb, [projective_instrument(basis_by_time[t]) for t in times]
        )
        for times, comb in family.members.items()
    }
    return DistributionFamily(family.ground_times, members)


def check_classicality(
    family: CombFamily, bases, tol: float = config.FAMILY_TOL
) -> ConsistencyReport:
    """A family is classical w.r.t. the given bases iff summing the larger
    member's fixed-basis statistics over the extra times reproduces the
    smaller member's statistics, for every nested pair and outcome tuple."""
    shadow = fixed_basis_distributions(family, bases)
    return check_distribution_consistency(shadow, tol)


def restriction_family(comb: Comb, subsets=None) -> CombFamily:
    """The family of restrictions of one comb (all nonempty subsets of its
    times by default)."""
    if subsets is None:
        subsets = [
            combo
            for size in range(1, comb.k + 1)
            for combo in itertools.combinations(comb.times, size)
        ]
    members = {as_times(s): restrict(comb, s) for s in subsets}
    return CombFamily(comb.times, members)
