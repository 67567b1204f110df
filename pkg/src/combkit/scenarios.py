"""Named, reproducible constructions exercising the full stack.

Each builder returns a :class:`ScenarioResult` bundling the families it
constructs with a list of numeric expectations.  Every expectation carries a
provenance tag: ``exact`` (a definitional identity), ``analytic`` (a closed
form derived by hand), or ``oracle:<name>`` (a value frozen from an
independent reference computation).
"""

from __future__ import annotations

import inspect
import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .channels import (
    Basis,
    Instrument,
    channel_from_kraus,
    classical_channel,
    named_basis,
    projective_instrument,
    unitary_channel,
)
from .combs import Dilation, comb_from_chain, comb_from_dilation, outcome_distribution
from .consistency import (
    CombFamily,
    DistributionFamily,
    check_classicality,
    check_comb_consistency,
    check_distribution_consistency,
    embed_classical,
    restriction_family,
)
from .distributions import JointDistribution, marginalize
from .errors import ShapeError, ValidationError
from .times import as_times, default_times


@dataclass(frozen=True)
class Expectation:
    label: str
    expected: float
    actual: float
    tol: float
    provenance: str

    @property
    def ok(self) -> bool:
        return abs(self.actual - self.expected) <= self.tol


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    expectations: tuple[Expectation, ...]
    comb_families: Mapping[str, CombFamily] = field(default_factory=dict)
    dist_families: Mapping[str, DistributionFamily] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.expectations)

    def family(self, key: str):
        if key in self.dist_families:
            return self.dist_families[key]
        if key in self.comb_families:
            return self.comb_families[key]
        raise ShapeError(
            f"scenario {self.name!r} has no family {key!r}; available: "
            f"{sorted(self.dist_families) + sorted(self.comb_families)}"
        )

    def to_table(self) -> str:
        width = max((len(e.label) for e in self.expectations), default=10)
        lines = [
            f"{'expectation':<{width}} {'expected':<24} {'actual':<24} "
            f"{'tol':<12} {'provenance':<28} status"
        ]
        for e in self.expectations:
            lines.append(
                f"{e.label:<{width}} {e.expected:<24.17g} {e.actual:<24.17g} "
                f"{e.tol:<12.3g} {e.provenance:<28} {'ok' if e.ok else 'FAIL'}"
            )
        verdict = "PASS" if self.ok else "FAIL"
        lines.append(f"{verdict}: {sum(e.ok for e in self.expectations)}/"
                     f"{len(self.expectations)} expectations within tolerance")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.ok,
            "expectations": [
                {
                    "label": e.label,
                    "expected": e.expected,
                    "actual": e.actual,
                    "tol": e.tol,
                    "provenance": e.provenance,
                    "ok": e.ok,
                }
                for e in self.expectations
            ],
            "families": sorted(self.dist_families) + sorted(self.comb_families),
        }


# ---------------------------------------------------------------------------
# seeded random primitives


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-style random unitary: QR of a complex Gaussian matrix with the
    R-diagonal phases folded into Q."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_density(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_instrument(
    rng: np.random.Generator,
    dim_in: int,
    dim_out: int | None = None,
    n_outcomes: int = 2,
    kraus_per_outcome: int = 1,
) -> Instrument:
    """A random instrument: Gaussian Kraus operators renormalized so the
    outcome maps sum to a trace-preserving map."""
    dim_out = dim_in if dim_out is None else dim_out
    total = n_outcomes * kraus_per_outcome
    ops = [
        rng.standard_normal((dim_out, dim_in)) + 1j * rng.standard_normal((dim_out, dim_in))
        for _ in range(total)
    ]
    gram = sum(k.conj().T @ k for k in ops)
    vals, vecs = np.linalg.eigh(gram)
    inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.conj().T
    ops = [k @ inv_sqrt for k in ops]
    outcomes = []
    for j in range(n_outcomes):
        chunk = ops[j * kraus_per_outcome : (j + 1) * kraus_per_outcome]
        outcomes.append((str(j), channel_from_kraus(chunk, label=str(j))))
    return Instrument(tuple(outcomes))


# ---------------------------------------------------------------------------
# concatenated spin-measurement scenario

_SG_TIMES = ("t1", "t2", "t3")


def stern_gerlach() -> ScenarioResult:
    """Three sequential spin measurements (z, x, z) on a spin starting in the
    +x eigenstate, with no dynamics in between.

    Every three-outcome sequence has probability 1/8; summing the full
    statistics over the middle time gives 1/4 for (up, up), while measuring
    only at the outer times gives 1/2 - the family of measured statistics is
    not marginal-consistent and certifies non-classicality.
    """
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    dilation = Dilation(2, 1, plus, (eye, eye, eye))
    comb = comb_from_dilation(dilation, _SG_TIMES)
    family = restriction_family(comb)

    z = Basis(np.eye(2), ("up", "down"))
    x = named_basis("x", 2, ("right", "left"))
    instruments = {
        "t1": projective_instrument(z),
        "t2": projective_instrument(x),
        "t3": projective_instrument(z),
    }
    dist_members = {
        times: outcome_distribution(member, [instruments[t] for t in times])
        for times, member in family.members.items()
    }
    dist_family = DistributionFamily(_SG_TIMES, dist_members)

    full = dist_members[_SG_TIMES]
    expectations = []
    for outcomes, p in full.items():
        expectations.append(
            Expectation(
                label="P(" + ",".join(outcomes) + ")",
                expected=0.125,
                actual=p,
                tol=1e-10,
                provenance="analytic",
            )
        )
    expectations.append(
        Expectation(
            label="sum over middle outcomes of P(up,.,up)",
            expected=0.25,
            actual=marginalize(full, ("t1", "t3")).prob(("up", "up")),
            tol=1e-10,
            provenance="analytic",
        )
    )
    expectations.append(
        Expectation(
            label="restricted two-time P(up,up)",
            expected=0.5,
            actual=dist_members[("t1", "t3")].prob(("up", "up")),
            tol=1e-10,
            provenance="analytic",
        )
    )
    ket_report = check_distribution_consistency(dist_family)
    expectations.append(
        Expectation(
            label="marginal-consistency deviation at ((t1,t3),(t1,t2,t3))",
            expected=0.25,
            actual=ket_report.deviation_at(("t1", "t3"), _SG_TIMES),
            tol=1e-10,
            provenance="analytic",
        )
    )
    classical_report = check_classicality(family, {"t1": z, "t2": x, "t3": z})
    expectations.append(
        Expectation(
            label="classicality deviation at ((t1,t3),(t1,t2,t3))",
            expected=0.25,
            actual=classical_report.deviation_at(("t1", "t3"), _SG_TIMES),
            tol=1e-10,
            provenance="analytic",
        )
    )
    get_report = check_comb_consistency(family)
    expectations.append(
        Expectation(
            label="restriction-consistency max deviation",
            expected=0.0,
            actual=get_report.max_deviation,
            tol=1e-10,
            provenance="exact",
        )
    )
    return ScenarioResult(
        "stern-gerlach",
        tuple(expectations),
        comb_families={"restrictions": family},
        dist_families={"measured": dist_family},
    )


# ---------------------------------------------------------------------------
# ball-drawing scenario

_URN_COLORS = ("yellow", "green", "red")
_URN_INITIAL = ("yellow", "green")
_URN_DROPS = {"t2": "red"}
_URN_RULES = {
    "t1": {"yellow": "green"},
    "t2": {"green": "yellow"},
    "t3": {"red": "yellow"},
}
# Exact enumeration of the default setup gives these family deviations.
_URN_INTERVENTION_DEVIATION = float(Fraction(1, 6))
_URN_WITNESS = (("t2",), ("t1", "t2"))


def _urn_distribution(colors, initial, drops, rules, times, measured, intervene) -> JointDistribution:
    """Trajectory enumeration over urn contents (sorted multiset tuples)."""
    index = {c: i for i, c in enumerate(colors)}
    table = np.zeros(tuple([len(colors)] * len(measured)))

    def rec(i, urn, weight, record):
        if i == len(times):
            table[record] += weight
            return
        t = times[i]
        if t in drops:
            urn = urn + (drops[t],)
        if t not in measured:
            rec(i + 1, urn, weight, record)
            return
        n = len(urn)
        for color, count in sorted(Counter(urn).items()):
            back = rules.get(t, {}).get(color, color) if intervene else color
            rest = list(urn)
            rest.remove(color)
            rest.append(back)
            rec(i + 1, tuple(sorted(rest)), weight * count / n, record + (index[color],))

    rec(0, tuple(sorted(initial)), 1.0, ())
    alphabets = tuple(tuple(colors) for _ in measured)
    return JointDistribution(tuple(measured), alphabets, table)


def urn(
    colors=_URN_COLORS,
    initial=_URN_INITIAL,
    drops=_URN_DROPS,
    rules=_URN_RULES,
    times=("t1", "t2", "t3"),
) -> ScenarioResult:
    """Drawing colored balls from an urn, with and without replacement rules.

    A configured ball drops into the urn at a fixed time regardless of what
    the experimenter does.  In the idle variant each drawn ball is returned
    unchanged and the recorded statistics are marginal-consistent; with
    replacement rules the drawn ball is swapped for a different color and
    consistency breaks down.  The default setup (two balls, one drop, one
    rule per time) is small enough to embed as a comb family within the
    default dimension cap; its deviations are frozen from an exact
    enumeration with rational arithmetic.
    """
    times = as_times(times)
    for t, color in drops.items():
        if color not in colors:
            raise ValidationError(f"drop color {color!r} not in alphabet {colors}")
    for t, mapping in rules.items():
        for src, dst in mapping.items():
            if src not in colors or dst not in colors:
                raise ValidationError(f"rule {src!r}->{dst!r} uses colors outside {colors}")
    if any(c not in colors for c in initial):
        raise ValidationError(f"initial contents {initial} use colors outside {colors}")

    subsets = [
        s for size in range(1, len(times) + 1) for s in itertools.combinations(times, size)
    ]
    idle_family = DistributionFamily(
        times,
        {s: _urn_distribution(colors, initial, drops, rules, times, s, False) for s in subsets},
    )
    intervention_family = DistributionFamily(
        times,
        {s: _urn_distribution(colors, initial, drops, rules, times, s, True) for s in subsets},
    )
    embedded = CombFamily(
        times, {s: embed_classical(d) for s, d in idle_family.members.items()}
    )

    idle_report = check_distribution_consistency(idle_family, tol=1e-12)
    intervention_report = check_distribution_consistency(intervention_family, tol=1e-12)
    classical_report = check_classicality(embedded, "z")
    embedded_get = check_comb_consistency(embedded)

    default_setup = (
        colors == _URN_COLORS
        and tuple(initial) == _URN_INITIAL
        and drops == _URN_DROPS
        and rules == _URN_RULES
        and times == ("t1", "t2", "t3")
    )
    expectations = [
        Expectation(
            label="idle family marginal-consistency max deviation",
            expected=0.0,
            actual=idle_report.max_deviation,
            tol=1e-12,
            provenance="oracle:urn-trajectory-enumeration",
        ),
        Expectation(
            label="embedded idle family classicality max deviation",
            expected=0.0,
            actual=classical_report.max_deviation,
            tol=1e-9,
            provenance="exact",
        ),
        Expectation(
            label="embedded idle family restriction-consistency max deviation",
            expected=0.0,
            actual=embedded_get.max_deviation,
            tol=1e-9,
            provenance="exact",
        ),
    ]
    if default_setup:
        expectations.append(
            Expectation(
                label="intervention family deviation at ((t2),(t1,t2))",
                expected=_URN_INTERVENTION_DEVIATION,
                actual=intervention_report.deviation_at(*_URN_WITNESS),
                tol=1e-12,
                provenance="oracle:urn-trajectory-enumeration",
            )
        )
        expectations.append(
            Expectation(
                label="intervention family max deviation",
                expected=_URN_INTERVENTION_DEVIATION,
                actual=intervention_report.max_deviation,
                tol=1e-12,
                provenance="oracle:urn-trajectory-enumeration",
            )
        )
    return ScenarioResult(
        "urn",
        tuple(expectations),
        comb_families={"idle-embedded": embedded},
        dist_families={"idle": idle_family, "intervention": intervention_family},
    )


# ---------------------------------------------------------------------------
# seeded random process families


def random_dilation_family(
    seed: int = 0, system_dim: int = 2, env_dim: int = 2, steps: int = 3
) -> ScenarioResult:
    """Restriction family of a random system-environment process.

    Deterministic in the seed: the initial joint state is a normalized
    Gaussian Gram matrix and the propagators are QR-orthogonalized Gaussian
    matrices.  Any such family is restriction-consistent by construction, and
    full instrument statistics are normalized.
    """
    rng = np.random.default_rng(seed)
    d = system_dim * env_dim
    initial = random_density(rng, d)
    unitaries = tuple(random_unitary(rng, d) for _ in range(steps))
    dilation = Dilation(system_dim, env_dim, initial, unitaries)
    times = default_times(steps)
    comb = comb_from_dilation(dilation, times)
    family = restriction_family(comb)

    get_report = check_comb_consistency(family)
    instruments = [
        random_instrument(rng, system_dim, n_outcomes=2) for _ in range(steps)
    ]
    born = outcome_distribution(comb, instruments).table.sum()

    rebuilt = comb_from_dilation(
        Dilation(system_dim, env_dim, initial, unitaries), times
    )
    deterministic = 0.0 if rebuilt.choi.tobytes() == comb.choi.tobytes() else 1.0

    expectations = (
        Expectation(
            label="restriction-consistency max deviation",
            expected=0.0,
            actual=get_report.max_deviation,
            tol=1e-10,
            provenance="analytic",
        ),
        Expectation(
            label="outcome normalization over random instruments",
            expected=1.0,
            actual=float(born),
            tol=1e-9,
            provenance="exact",
        ),
        Expectation(
            label="rebuild from seed is byte-identical",
            expected=0.0,
            actual=deterministic,
            tol=0.0,
            provenance="exact",
        ),
    )
    return ScenarioResult(
        f"random-dilation(seed={seed})",
        expectations,
        comb_families={"restrictions": family},
    )


def dephasing_markov(seed: int = 0, steps: int = 3, basis="z") -> ScenarioResult:
    """Memoryless qubit dynamics that stays diagonal in a reference basis,
    plus a control variant with two coherence-generating unitary links.

    The classical variant chains column-stochastic transition channels (which
    dephase in the reference basis); its fixed-basis statistics are marginal-
    consistent.  The control replaces the first two links by a Hadamard-type
    unitary, so coherence built after the first time survives to the third:
    skipping the middle measurement then yields a deterministic repeat of the
    first outcome, while the measured-and-summed statistics stay uniform.
    The witness deviation is max(p)/2 for an initial diagonal (p, 1-p).
    """
    if steps < 3:
        raise ValidationError("dephasing-markov needs at least 3 steps")
    rng = np.random.default_rng(seed)
    ref = named_basis(basis, 2) if isinstance(basis, str) else basis
    p_top = rng.uniform(0.55, 0.95)
    populations = np.array([p_top, 1.0 - p_top])
    vs = ref.vectors
    rho0 = (vs * populations) @ vs.conj().T

    transitions = []
    for _ in range(steps - 1):
        t = rng.uniform(0.05, 1.0, size=(2, 2))
        transitions.append(t / t.sum(axis=0, keepdims=True))
    classical_links = [classical_channel(t, ref) for t in transitions]

    hadamard = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    coherence_gate = vs @ hadamard @ vs.conj().T
    control_links = list(classical_links)
    control_links[0] = unitary_channel(coherence_gate, "coherence-gate")
    control_links[1] = unitary_channel(coherence_gate, "coherence-gate")

    times = default_times(steps)
    classical_comb = comb_from_chain(rho0, classical_links, times)
    control_comb = comb_from_chain(rho0, control_links, times)
    classical_family = restriction_family(classical_comb)
    control_family = restriction_family(control_comb)

    bases = {t: ref for t in times}
    classical_report = check_classicality(classical_family, bases)
    control_report = check_classicality(control_family, bases)

    expectations = (
        Expectation(
            label="dephasing variant classicality max deviation",
            expected=0.0,
            actual=classical_report.max_deviation,
            tol=1e-9,
            provenance="oracle:classical-chain-enumeration",
        ),
        Expectation(
            label="control variant deviation at ((t1,t3),(t1,t2,t3))",
            expected=float(populations.max() / 2),
            actual=control_report.deviation_at(
                (times[0], times[2]), (times[0], times[1], times[2])
            ),
            tol=1e-9,
            provenance="analytic",
        ),
        Expectation(
            label="dephasing variant restriction-consistency max deviation",
            expected=0.0,
            actual=check_comb_consistency(classical_family).max_deviation,
            tol=1e-10,
            provenance="exact",
        ),
        Expectation(
            label="control variant restriction-consistency max deviation",
            expected=0.0,
            actual=check_comb_consistency(control_family).max_deviation,
            tol=1e-10,
            provenance="exact",
        ),
    )
    return ScenarioResult(
        f"dephasing-markov(seed={seed})",
        expectations,
        comb_families={"dephasing": classical_family, "control": control_family},
    )


SCENARIOS: dict[str, Callable[..., ScenarioResult]] = {
    "stern-gerlach": stern_gerlach,
    "urn": urn,
    "random-dilation": random_dilation_family,
    "dephasing-markov": dephasing_markov,
}


def build_scenario(name: str, **params) -> ScenarioResult:
    """Look up a scenario by name and build it, forwarding only the keyword
    parameters its builder accepts; unknown explicit parameters are errors."""
    if name not in SCENARIOS:
        raise ShapeError(f"unknown scenario {name!r}; available: {sorted(SCENARIOS)}")
    builder = SCENARIOS[name]
    accepted = set(inspect.signature(builder).parameters)
    given = {k: v for k, v in params.items() if v is not None}
    unknown = sorted(set(given) - accepted)
    if unknown:
        raise ShapeError(f"scenario {name!r} does not accept parameters {unknown}")
    return builder(**given)
