import numpy as np
import pytest

from combkit import (
    Basis,
    ChoiChannel,
    Instrument,
    ShapeError,
    ValidationError,
    apply_channel,
    channel_from_action,
    channel_from_kraus,
    compose,
    dephasing_channel,
    depolarizing_channel,
    generalized_identity,
    identity_channel,
    kron,
    max_entangled,
    named_basis,
    partial_trace,
    projective_instrument,
    replacement_channel,
    replacement_instrument,
)
from oracles import apply_choi_by_loops

X = np.array([[0, 1], [1, 0]], dtype=complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)


def _random_kraus_cp_map(rng, dim_in, dim_out, n_kraus):
    """A random CP map scaled to be trace non-increasing."""
    ops = [
        rng.standard_normal((dim_out, dim_in)) + 1j * rng.standard_normal((dim_out, dim_in))
        for _ in range(n_kraus)
    ]
    gram = sum(k.conj().T @ k for k in ops)
    scale = np.sqrt(np.linalg.eigvalsh(gram)[-1])
    return [k / scale for k in ops]


def test_identity_channel_choi_is_max_entangled():
    assert np.array_equal(identity_channel(2).choi, max_entangled(2))


def test_choi_of_computational_projection():
    def action(rho):
        return np.array([[rho[0, 0], 0], [0, 0]], dtype=complex)

    ch = channel_from_action(2, 2, action)
    p0 = np.zeros((4, 4), dtype=complex)
    p0[0, 0] = 1.0  # |0><0| (x) |0><0|
    assert np.abs(ch.choi - p0).max() == 0.0


def test_choi_of_unitary_is_rank_one_with_trace_dim():
    ch = channel_from_kraus([X])
    vals = np.linalg.eigvalsh(ch.choi)
    assert abs(np.trace(ch.choi) - 2.0) < 1e-14
    assert (vals > 1e-12).sum() == 1
    expected = np.zeros((4, 4), dtype=complex)
    for i in (1, 2):
        for j in (1, 2):
            expected[i, j] = 1.0  # outer product of vec(X)
    assert np.abs(ch.choi - expected).max() == 0.0


def test_apply_identity():
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]], dtype=complex)
    assert np.abs(apply_channel(identity_channel(2), rho) - rho).max() < 1e-14


def test_apply_projector_on_plus_state():
    up = projective_instrument(Basis(np.eye(2), ("up", "down"))).channels[0]
    out = apply_channel(up, PLUS)
    assert np.abs(out - np.diag([0.5, 0.0])).max() < 1e-14


def test_apply_replacement_scales_with_trace():
    sigma = np.diag([0.25, 0.75]).astype(complex)
    ch = replacement_channel(sigma, dim_in=2)
    rho = np.diag([0.5, 0.5]).astype(complex)
    assert np.abs(apply_channel(ch, rho) - sigma).max() < 1e-14
    assert np.abs(apply_channel(ch, 2 * rho) - 2 * sigma).max() < 1e-14


def test_choi_round_trip_against_kraus_action(rng):
    """Choi-from-action then apply must reproduce the direct Kraus action."""
    for trial in range(100):
        dim_in = int(rng.integers(1, 4))
        dim_out = int(rng.integers(1, 4))
        kraus = _random_kraus_cp_map(rng, dim_in, dim_out, int(rng.integers(1, 4)))

        def action(rho, kraus=kraus):
            return sum(k @ rho @ k.conj().T for k in kraus)

        ch = channel_from_action(dim_in, dim_out, action)
        rho = rng.standard_normal((dim_in, dim_in)) + 1j * rng.standard_normal((dim_in, dim_in))
        rho = rho + rho.conj().T
        assert np.abs(apply_channel(ch, rho) - action(rho)).max() < 1e-11
        # and the Kraus-built Choi agrees with the action-built one
        assert np.abs(channel_from_kraus(kraus).choi - ch.choi).max() < 1e-11


def test_apply_matches_loop_oracle(rng):
    kraus = _random_kraus_cp_map(rng, 3, 2, 2)
    ch = channel_from_kraus(kraus)
    rho = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    want = apply_choi_by_loops(ch.choi, 3, 2, rho)
    assert np.abs(apply_channel(ch, rho) - want).max() < 1e-12


def test_channel_rejects_trace_increasing():
    with pytest.raises(ValidationError):
        ChoiChannel(2, 2, 2.0 * max_entangled(2))


def test_channel_rejects_non_cp():
    m = np.diag([1.0, -0.5, 0.5, 1.0]).astype(complex)
    with pytest.raises(ValidationError):
        ChoiChannel(2, 2, m)


def test_projective_instrument_computational():
    inst = projective_instrument(np.eye(2), ("0", "1"))
    assert inst.labels == ("0", "1")
    p0, p1 = (ch.choi for ch in inst.channels)
    assert p0[0, 0] == 1.0 and np.abs(p0).sum() == 1.0
    assert p1[3, 3] == 1.0 and np.abs(p1).sum() == 1.0


def test_projective_instrument_x_basis():
    inst = projective_instrument(named_basis("x", 2, ("right", "left")))
    right = inst.channels[0]
    assert np.abs(apply_channel(right, PLUS) - PLUS).max() < 1e-12
    left = inst.channels[1]
    assert np.abs(apply_channel(left, PLUS)).max() < 1e-12


def test_projective_instrument_complex_basis_round_trip(rng):
    """Choi of <v|rho|v>|v><v| must conjugate the input leg correctly."""
    from combkit import random_unitary

    u = random_unitary(rng, 3)
    inst = projective_instrument(Basis(u))
    rho = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    rho = rho @ rho.conj().T
    for k, ch in enumerate(inst.channels):
        v = u[:, k]
        want = (v.conj() @ rho @ v) * np.outer(v, v.conj())
        assert np.abs(apply_channel(ch, rho) - want).max() < 1e-11


def test_projective_instrument_trivial_dimension():
    inst = projective_instrument(np.eye(1))
    assert len(inst.outcomes) == 1
    assert np.array_equal(inst.channels[0].choi, np.array([[1.0]]))


def test_projective_instrument_rejects_non_orthonormal():
    with pytest.raises(ValidationError):
        projective_instrument(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_instrument_completeness(rng):
    from combkit import random_instrument

    for trial in range(5):
        inst = random_instrument(rng, 3, n_outcomes=int(rng.integers(1, 5)))
        total = inst.total_choi()
        reduced = partial_trace(total, [inst.dim_out, inst.dim_in], [0])
        assert np.abs(reduced - np.eye(3)).max() < 1e-10


def test_instrument_rejects_incomplete():
    half = ChoiChannel(2, 2, 0.5 * max_entangled(2))
    with pytest.raises(ValidationError):
        Instrument((("only", half),))


def test_replacement_with_same_states_equals_projective():
    basis = Basis(np.eye(2), ("0", "1"))
    proj = projective_instrument(basis)
    repl = replacement_instrument(basis, [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    for a, b in zip(proj.channels, repl.channels):
        assert np.abs(a.choi - b.choi).max() == 0.0


def test_replacement_permutation_rule():
    # swap the two outcomes on repreparation: measuring 0 leaves state 1
    basis = Basis(np.eye(2), ("0", "1"))
    inst = replacement_instrument(
        basis, {"0": np.diag([0.0, 1.0]), "1": np.diag([1.0, 0.0])}
    )
    out = apply_channel(inst.channels[0], np.diag([1.0, 0.0]).astype(complex))
    assert np.abs(out - np.diag([0.0, 1.0])).max() < 1e-14


def test_replacement_measure_and_reset_sums_to_replacement():
    sigma = np.array([[0.5, 0.25], [0.25, 0.5]], dtype=complex)
    inst = replacement_instrument(np.eye(2), [sigma, sigma])
    total = sum(ch.choi for ch in inst.channels)
    assert np.abs(total - kron(sigma, np.eye(2))).max() < 1e-12
    rho = np.array([[0.9, 0.1], [0.1, 0.1]], dtype=complex)
    summed = sum(apply_channel(ch, rho) for ch in inst.channels)
    assert np.abs(summed - sigma).max() < 1e-12


def test_projective_average_is_identity_on_diagonal_states(rng):
    """Summing projective outcomes reproduces basis-diagonal states."""
    inst = projective_instrument(np.eye(3))
    rho = np.diag(rng.uniform(0, 1, size=3)).astype(complex)
    rho /= np.trace(rho)
    summed = sum(apply_channel(ch, rho) for ch in inst.channels)
    assert np.abs(summed - rho).max() < 1e-12


def test_generalized_identity_reduces_to_identity():
    ch = generalized_identity(2, 2, np.eye(1))
    assert np.abs(ch.choi - max_entangled(2)).max() < 1e-14


def test_generalized_identity_embeds():
    anc = np.diag([1.0, 0.0]).astype(complex)
    ch = generalized_identity(2, 4, anc)
    rho = np.array([[0.75, 0.1j], [-0.1j, 0.25]], dtype=complex)
    assert np.abs(apply_channel(ch, rho) - kron(rho, anc)).max() < 1e-12


def test_generalized_identity_traces():
    ch = generalized_identity(4, 2, np.eye(1), traced="trailing")
    rho = np.arange(16, dtype=complex).reshape(4, 4)
    rho = rho + rho.conj().T + 8 * np.eye(4)
    rho /= np.trace(rho)
    want = partial_trace(rho, [2, 2], [1])
    assert np.abs(apply_channel(ch, rho) - want).max() < 1e-12
    lead = generalized_identity(4, 2, np.eye(1), traced="leading")
    want = partial_trace(rho, [2, 2], [0])
    assert np.abs(apply_channel(lead, rho) - want).max() < 1e-12


def test_generalized_identity_rejects_bad_factorization():
    with pytest.raises(ShapeError):
        generalized_identity(2, 3, np.eye(1))


def test_compose_matches_sequential_application(rng):
    a = channel_from_kraus(_random_kraus_cp_map(rng, 2, 3, 2))
    b = channel_from_kraus(_random_kraus_cp_map(rng, 3, 2, 1))
    ba = compose(b, a)
    rho = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = rho @ rho.conj().T
    want = apply_channel(b, apply_channel(a, rho))
    assert np.abs(apply_channel(ba, rho) - want).max() < 1e-11


def test_depolarizing_and_dephasing():
    rho = np.array([[0.6, 0.3], [0.3, 0.4]], dtype=complex)
    assert np.abs(apply_channel(depolarizing_channel(2), rho) - np.eye(2) / 2).max() < 1e-12
    out = apply_channel(dephasing_channel(np.eye(2)), rho)
    assert np.abs(out - np.diag([0.6, 0.4])).max() < 1e-12


def test_construction_does_not_freeze_caller_arrays():
    arr = max_entangled(2)
    ch = ChoiChannel(2, 2, arr)
    arr[0, 0] = 5.0  # caller keeps ownership
    assert ch.choi[0, 0] == 1.0
    with pytest.raises(ValueError):
        ch.choi[0, 0] = 7.0  # stored matrix is read-only


def test_apply_channel_rejects_dimension_mismatch():
    with pytest.raises(ShapeError):
        apply_channel(identity_channel(2), np.eye(3))
