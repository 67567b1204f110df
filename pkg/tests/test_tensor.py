import numpy as np
import pytest

from combkit import (
    DimensionCapError,
    LegStructure,
    ShapeError,
    basis_transpose,
    is_psd,
    kron,
    max_entangled,
    partial_trace,
)
from oracles import kron_by_formula, partial_trace_by_loops


def test_kron_scalar_identity():
    m = np.array([[1, 2j], [3, 4]], dtype=complex)
    assert np.array_equal(kron(np.eye(1), m), m)
    assert np.array_equal(kron(m, np.eye(1)), m)


def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_diagonal():
    got = kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
    assert np.array_equal(got, np.diag([3.0, 4.0, 6.0, 8.0]))


def test_kron_matches_index_formula(rng):
    a = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    b = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    assert np.abs(kron(a, b) - kron_by_formula(a, b)).max() < 1e-13


def test_kron_associativity_exact_on_integer_entries(rng):
    mats = [rng.integers(-3, 4, size=(2, 2)).astype(complex) for _ in range(3)]
    assert np.array_equal(kron(kron(mats[0], mats[1]), mats[2]),
                          kron(mats[0], kron(mats[1], mats[2])))


def test_kron_associativity_random(rng):
    mats = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(3)]
    d = np.abs(kron(kron(mats[0], mats[1]), mats[2]) - kron(mats[0], kron(mats[1], mats[2]))).max()
    assert d < 1e-13


def test_kron_respects_dim_cap(monkeypatch):
    monkeypatch.setenv("COMBKIT_DIM_CAP", "16")
    kron(np.eye(2), np.eye(2))
    with pytest.raises(DimensionCapError):
        kron(np.eye(2), np.eye(4))


def test_max_entangled_trivial():
    assert np.array_equal(max_entangled(1), np.array([[1.0]]))


def test_max_entangled_qubit():
    expected = np.zeros((4, 4))
    for i in (0, 3):
        for j in (0, 3):
            expected[i, j] = 1.0
    assert np.array_equal(max_entangled(2), expected)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_max_entangled_trace_and_rank(d):
    phi = max_entangled(d)
    assert abs(np.trace(phi) - d) == 0.0
    assert np.linalg.matrix_rank(phi) == 1


def test_partial_trace_max_entangled():
    reduced = partial_trace(max_entangled(2), [2, 2], [1])
    assert np.abs(reduced - np.eye(2)).max() < 1e-14


def test_partial_trace_product_factorizes(rng):
    for da, db in [(2, 3), (4, 2), (8, 2)]:
        a = rng.standard_normal((da, da)) + 1j * rng.standard_normal((da, da))
        b = rng.standard_normal((db, db)) + 1j * rng.standard_normal((db, db))
        got = partial_trace(kron(a, b), [da, db], [1])
        assert np.abs(got - a * np.trace(b)).max() < 1e-12


def test_partial_trace_noop():
    m = np.arange(16, dtype=complex).reshape(4, 4)
    assert np.array_equal(partial_trace(m, [2, 2], []), m)


def test_partial_trace_preserves_trace(rng):
    dims = [2, 3, 2]
    d = int(np.prod(dims))
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    for traced in ([0], [1], [0, 2], [0, 1, 2]):
        reduced = partial_trace(m, dims, traced)
        assert abs(np.trace(reduced) - np.trace(m)) < 1e-12


def test_partial_trace_matches_loop_oracle(rng):
    dims = [2, 2, 3]
    d = int(np.prod(dims))
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    for traced in ([1], [0, 2], [2]):
        got = partial_trace(m, dims, traced)
        want = partial_trace_by_loops(m, dims, traced)
        assert np.abs(got - want).max() < 1e-12


def test_partial_trace_by_labels():
    legs = LegStructure(("sys", "env"), (2, 2))
    reduced = partial_trace(max_entangled(2), legs, ["env"])
    assert np.abs(reduced - np.eye(2)).max() < 1e-14
    with pytest.raises(ShapeError):
        partial_trace(max_entangled(2), legs, ["nope"])


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ShapeError):
        partial_trace(np.eye(5), [2, 2], [0])


def test_basis_transpose():
    m = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
    assert np.array_equal(basis_transpose(m), m.T)
    h = np.diag([1.0, -2.0]).astype(complex)
    assert np.array_equal(basis_transpose(h), h)
    r = np.array([[1, 2j], [3, 4]], dtype=complex)
    assert np.array_equal(basis_transpose(basis_transpose(r)), r)
    with pytest.raises(ShapeError):
        basis_transpose(np.ones((2, 3)))


def test_is_psd():
    assert is_psd(np.eye(4), 1e-10)
    assert not is_psd(np.diag([1.0, -0.01]), 1e-10)
    assert is_psd(max_entangled(2), 1e-10)
    with pytest.raises(ShapeError):
        is_psd(np.array([[0, 1], [0, 0]], dtype=complex), 1e-10)


def test_leg_structure_validation():
    with pytest.raises(Exception):
        LegStructure(("a", "a"), (2, 2))
    legs = LegStructure.from_pairs([("a", 2), ("b", 3)])
    assert legs.total_dim == 6
    assert legs.index("b") == 1
