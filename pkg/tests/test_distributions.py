import numpy as np
import pytest

from combkit import JointDistribution, ShapeError, ValidationError, marginalize
from oracles import urn_table_exact

COLORS = ("yellow", "green", "red")
INITIAL = ("yellow", "green")
DROPS = {"t2": "red"}
RULES = {"t1": {"yellow": "green"}, "t2": {"green": "yellow"}, "t3": {"red": "yellow"}}
TIMES = ("t1", "t2", "t3")


def uniform(times, sizes):
    alphabets = tuple(tuple(str(i) for i in range(s)) for s in sizes)
    table = np.full(sizes, 1.0 / np.prod(sizes))
    return JointDistribution(times, alphabets, table)


def test_marginalize_noop():
    d = uniform(("t1", "t2"), (2, 2))
    again = marginalize(d, d.times)
    assert np.array_equal(again.table, d.table)


def test_marginalize_uniform():
    d = uniform(("t1", "t2"), (2, 2))
    m = marginalize(d, ("t1",))
    assert m.times == ("t1",)
    assert np.abs(m.table - 0.5).max() < 1e-15


def test_marginalize_requires_contained_subset():
    d = uniform(("t1", "t2"), (2, 2))
    with pytest.raises(ShapeError):
        marginalize(d, ("t3",))


def test_marginalize_matches_urn_enumeration():
    full = urn_table_exact(COLORS, INITIAL, DROPS, RULES, TIMES, TIMES, False)
    dist = JointDistribution(TIMES, (COLORS,) * 3, full)
    marg = marginalize(dist, ("t1", "t3"))
    want = urn_table_exact(COLORS, INITIAL, DROPS, RULES, TIMES, ("t1", "t3"), False)
    assert np.abs(marg.table - want).max() < 1e-12


def test_prob_lookup():
    d = uniform(("t1",), (3,))
    assert d.prob(("1",)) == pytest.approx(1 / 3)
    with pytest.raises(ShapeError):
        d.prob(("9",))
    with pytest.raises(ShapeError):
        d.prob(("1", "1"))


def test_items_enumerates_all_tuples():
    d = uniform(("t1", "t2"), (2, 3))
    entries = list(d.items())
    assert len(entries) == 6
    assert entries[0][0] == ("0", "0")
    assert abs(sum(p for _, p in entries) - 1.0) < 1e-12


def test_validation_rejects_bad_tables():
    with pytest.raises(ValidationError):
        JointDistribution(("t1",), (("a", "b"),), np.array([0.6, 0.6]))
    with pytest.raises(ValidationError):
        JointDistribution(("t1",), (("a", "b"),), np.array([1.5, -0.5]))
    with pytest.raises(ShapeError):
        JointDistribution(("t1",), (("a", "b"),), np.array([1.0]))
    with pytest.raises(ValidationError):
        JointDistribution(("t1",), (("a", "a"),), np.array([0.5, 0.5]))
