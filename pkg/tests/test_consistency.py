import itertools

import numpy as np
import pytest

from combkit import (
    CombFamily,
    Dilation,
    DistributionFamily,
    JointDistribution,
    ShapeError,
    check_classicality,
    check_comb_consistency,
    check_distribution_consistency,
    classical_channel,
    comb_from_chain,
    comb_from_dilation,
    contract,
    dephasing_channel,
    embed_classical,
    fixed_basis_distributions,
    marginalize,
    named_basis,
    projective_instrument,
    random_density,
    random_unitary,
    restrict,
    restriction_family,
    unitary_channel,
    verify_extension,
)
from oracles import classical_chain_joint


def random_distribution(rng, times, sizes):
    table = rng.uniform(0.05, 1.0, size=sizes)
    table /= table.sum()
    alphabets = tuple(tuple(str(i) for i in range(s)) for s in sizes)
    return JointDistribution(times, alphabets, table)


def marginal_family(dist):
    members = {}
    for size in range(1, dist.k + 1):
        for sub in itertools.combinations(dist.times, size):
            members[sub] = marginalize(dist, sub)
    return DistributionFamily(dist.times, members)


def random_dilation_comb(rng, steps):
    d = Dilation(2, 2, random_density(rng, 4), tuple(random_unitary(rng, 4) for _ in range(steps)))
    return comb_from_dilation(d, [f"t{j}" for j in range(1, steps + 1)])


def test_marginal_family_is_consistent(rng):
    family = marginal_family(random_distribution(rng, ("t1", "t2", "t3"), (2, 3, 2)))
    report = check_distribution_consistency(family)
    assert report.passed
    assert report.max_deviation < 1e-14
    assert len(report.pairs) == 12


def test_singleton_family_passes_vacuously(rng):
    dist = random_distribution(rng, ("t1", "t2"), (2, 2))
    family = DistributionFamily(("t1", "t2"), {("t1", "t2"): dist})
    report = check_distribution_consistency(family)
    assert report.passed and len(report.pairs) == 0


def test_inconsistent_distribution_family_fails(rng):
    dist = random_distribution(rng, ("t1", "t2"), (2, 2))
    other = random_distribution(rng, ("t1",), (2,))
    family = DistributionFamily(
        ("t1", "t2"), {("t1", "t2"): dist, ("t1",): other}
    )
    report = check_distribution_consistency(family)
    want = np.abs(other.table - dist.table.sum(axis=1)).max()
    assert report.deviation_at(("t1",), ("t1", "t2")) == pytest.approx(want)


def test_restriction_family_passes(rng):
    family = restriction_family(random_dilation_comb(rng, 4))
    assert len(family.members) == 15
    report = check_comb_consistency(family)
    assert report.passed
    assert report.max_deviation < 1e-12
    assert len(report.pairs) == 50


def test_corrupted_member_fails_at_its_pairs(rng):
    comb = random_dilation_comb(rng, 3)
    family = restriction_family(comb)
    members = dict(family.members)
    other = restrict(random_dilation_comb(rng, 3), ("t1", "t2"))
    members[("t1", "t2")] = other
    corrupted = CombFamily(comb.times, members)
    report = check_comb_consistency(corrupted, tol=1e-9)
    assert not report.passed
    assert report.deviation_at(("t1", "t2"), ("t1", "t2", "t3")) > 1e-3


def test_comb_family_requires_matching_slot_dims(rng):
    comb = random_dilation_comb(rng, 2)
    qutrit = comb_from_chain(np.eye(3, dtype=complex) / 3, [], ("t1",))
    with pytest.raises(ShapeError):
        CombFamily(comb.times, {comb.times: comb, ("t1",): qutrit})


def test_verify_extension_accepts_the_generator(rng):
    comb = random_dilation_comb(rng, 3)
    family = restriction_family(comb)
    report = verify_extension(comb, family, tol=1e-10)
    assert report.passed
    assert len(report.pairs) == len(family.members)


def test_verify_extension_detects_perturbation(rng):
    from combkit import channel_from_kraus

    rho = random_density(rng, 2)
    u = random_unitary(rng, 2)
    links = [unitary_channel(u)]
    comb = comb_from_chain(rho, links, ("t1", "t2"))
    family = restriction_family(comb)

    eps = 1e-3
    kraus = [np.sqrt(1 - eps) * u, np.sqrt(eps) * np.eye(2)]
    perturbed = comb_from_chain(rho, [channel_from_kraus(kraus)], ("t1", "t2"))
    report = verify_extension(perturbed, family, tol=1e-9)
    assert not report.passed
    assert 1e-5 < report.max_deviation < 1e-1


def test_verify_extension_rejects_wrong_ground_set(rng):
    comb = random_dilation_comb(rng, 3)
    family = restriction_family(comb)
    with pytest.raises(ShapeError):
        verify_extension(restrict(comb, ("t1", "t2")), family)


def test_embed_uniform_contracts_to_quarter():
    table = np.full((2, 2), 0.25)
    dist = JointDistribution(("t1", "t2"), (("0", "1"), ("0", "1")), table)
    comb = embed_classical(dist)
    inst = projective_instrument(np.eye(2))
    for i, j in itertools.product((0, 1), repeat=2):
        p = contract(comb, [inst.channels[i], inst.channels[j]])
        assert abs(p - 0.25) < 1e-13


def test_embed_full_dephasing_instrument_sums_to_one(rng):
    dist = random_distribution(rng, ("t1", "t2"), (2, 2))
    comb = embed_classical(dist)
    total = projective_instrument(np.eye(2)).total_choi()
    assert abs(contract(comb, [total, total]) - 1.0) < 1e-12


def test_embedded_comb_is_diagonal(rng):
    dist = random_distribution(rng, ("t1", "t2", "t3"), (2, 2, 2))
    comb = embed_classical(dist)
    off = comb.choi - np.diag(np.diag(comb.choi))
    assert np.abs(off).max() < 1e-14


def test_embed_reproduces_probabilities_exactly(rng):
    dist = random_distribution(rng, ("t1", "t2"), (2, 3))
    comb = embed_classical(dist)
    i2 = projective_instrument(np.eye(2))
    i3 = projective_instrument(np.eye(3))
    for (a, b), p in dist.items():
        got = contract(comb, [i2.channels[int(a)], i3.channels[int(b)]])
        assert abs(got - p) < 1e-12


def test_embed_commutes_with_marginalization(rng):
    dist = random_distribution(rng, ("t1", "t2", "t3"), (2, 2, 2))
    for sub in [("t1",), ("t1", "t3"), ("t2", "t3")]:
        a = restrict(embed_classical(dist), sub)
        b = embed_classical(marginalize(dist, sub))
        assert np.abs(a.choi - b.choi).max() < 1e-12


def test_embedded_family_round_trip(rng):
    """Embedding then reading fixed-basis statistics recovers the family."""
    family = marginal_family(random_distribution(rng, ("t1", "t2", "t3"), (2, 2, 2)))
    embedded = CombFamily(
        family.ground_times, {s: embed_classical(d) for s, d in family.members.items()}
    )
    get_report = check_comb_consistency(embedded, tol=1e-11)
    assert get_report.passed
    shadow = fixed_basis_distributions(embedded, "z")
    for times, dist in family.members.items():
        assert np.abs(shadow.members[times].table - dist.table).max() < 1e-12
    assert check_distribution_consistency(shadow, tol=1e-11).passed


def test_classicality_of_embedded_consistent_family(rng):
    family = marginal_family(random_distribution(rng, ("t1", "t2"), (2, 2)))
    embedded = CombFamily(
        family.ground_times, {s: embed_classical(d) for s, d in family.members.items()}
    )
    assert check_classicality(embedded, "z").passed


def test_classicality_fails_for_outer_basis_clash(rng):
    """x-measurement in the middle of two z-measurements breaks consistency."""
    plus = np.full((2, 2), 0.5, dtype=complex)
    eye = np.eye(2, dtype=complex)
    comb = comb_from_dilation(Dilation(2, 1, plus, (eye, eye, eye)), ("t1", "t2", "t3"))
    family = restriction_family(comb)
    bases = {"t1": "z", "t2": "x", "t3": "z"}
    report = check_classicality(family, bases)
    assert not report.passed
    assert report.deviation_at(("t1", "t3"), ("t1", "t2", "t3")) == pytest.approx(0.25)


def test_classicality_of_dephasing_chain_matches_oracle(rng):
    steps = 3
    transitions = []
    for _ in range(steps - 1):
        t = rng.uniform(0.05, 1.0, size=(2, 2))
        transitions.append(t / t.sum(axis=0, keepdims=True))
    pops = rng.uniform(0.1, 1.0, size=2)
    pops /= pops.sum()
    rho0 = np.diag(pops).astype(complex)
    links = [classical_channel(t) for t in transitions]
    comb = comb_from_chain(rho0, links, ("t1", "t2", "t3"))
    family = restriction_family(comb)
    assert check_classicality(family, "z").passed

    shadow = fixed_basis_distributions(family, "z")
    times = ("t1", "t2", "t3")
    for measured in [("t1",), ("t2",), ("t1", "t3"), times]:
        want = classical_chain_joint(pops, transitions, times, measured)
        assert np.abs(shadow.members[measured].table - want).max() < 1e-11


def test_classicality_fails_with_coherent_links(rng):
    pops = np.array([0.8, 0.2])
    rho0 = np.diag(pops).astype(complex)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    links = [unitary_channel(h), unitary_channel(h)]
    comb = comb_from_chain(rho0, links, ("t1", "t2", "t3"))
    family = restriction_family(comb)
    report = check_classicality(family, "z")
    assert not report.passed
    assert report.deviation_at(("t1", "t3"), ("t1", "t2", "t3")) == pytest.approx(0.4)


def test_get_and_ket_agree_on_classical_families(rng):
    """Embedding a consistent family gives a consistent comb family and back."""
    for trial in range(10):
        family = marginal_family(random_distribution(rng, ("t1", "t2", "t3"), (2, 2, 2)))
        embedded = CombFamily(
            family.ground_times,
            {s: embed_classical(d) for s, d in family.members.items()},
        )
        assert check_comb_consistency(embedded, tol=1e-11).passed
        shadow = fixed_basis_distributions(embedded, "z")
        for times, dist in family.members.items():
            assert np.abs(shadow.members[times].table - dist.table).max() < 1e-11


def test_comb_consistency_failure_blocks_every_extension(rng):
    comb = random_dilation_comb(rng, 3)
    members = dict(restriction_family(comb).members)
    members[("t1", "t2")] = restrict(random_dilation_comb(rng, 3), ("t1", "t2"))
    broken = CombFamily(comb.times, members)
    assert not check_comb_consistency(broken, tol=1e-9).passed
    for candidate in (comb, random_dilation_comb(rng, 3)):
        assert not verify_extension(candidate, broken, tol=1e-9).passed


def test_dephasing_channel_statistics_are_classical(rng):
    basis = named_basis("z", 2)
    rho0 = np.diag([0.6, 0.4]).astype(complex)
    links = [dephasing_channel(basis.vectors), dephasing_channel(basis.vectors)]
    family = restriction_family(comb_from_chain(rho0, links, ("t1", "t2", "t3")))
    assert check_classicality(family, "z").passed


def test_report_serialization_shape(rng):
    family = restriction_family(random_dilation_comb(rng, 2))
    report = check_comb_consistency(family)
    doc = report.as_dict()
    assert set(doc) == {"pairs", "pass", "tol"}
    assert doc["pass"] is True
    for pair in doc["pairs"]:
        assert set(pair) == {"sub", "super", "deviation"}
