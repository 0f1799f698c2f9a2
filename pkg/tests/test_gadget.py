import numpy as np
import pytest

from stabdecomp.algebra import CycloNumber, omega
from stabdecomp.clifford import gate_matrix, weyl_matrix
from stabdecomp.gadget import (
    CLASS_CLIFFORD,
    CLASS_NONCLIFFORD,
    CLASS_NONE,
    branch_operator,
    check_reduction,
    circuit_matrix,
    is_nonclifford_diagonal,
    is_phase_state,
    replay_protocol,
    sweep_injection,
    sweep_two_copy,
)
from stabdecomp.stabilizer import magic_state

H3_WORD = "H1 SUM H1 SUM H1 S2 SUM H1 H2^2"
N_WORD = "H1 H2 SUM H1^3 H2 SUM H1"


def rand_word(rng, n, length):
    word = []
    for _ in range(length):
        kind = rng.integers(0, 3)
        if kind == 0:
            word.append(("H", (int(rng.integers(0, n)),), int(rng.integers(1, 4))))
        elif kind == 1:
            word.append(("S", (int(rng.integers(0, n)),), int(rng.integers(1, 3))))
        else:
            c, t = rng.choice(n, size=2, replace=False)
            word.append(("SUM", (int(c), int(t)), int(rng.integers(1, 3))))
    return word


# ---------------------------------------------------------------------------
# branch operators
# ---------------------------------------------------------------------------


def test_branch_operator_identity():
    for name in ("S", "N", "H3", "T3"):
        m = magic_state(name).complex_vector()
        for k in range(3):
            E = branch_operator(np.eye(9), m, k)
            assert np.allclose(E, m[k] * np.eye(3), atol=1e-14)


def test_branch_operator_sum_is_selector():
    SUM = gate_matrix("SUM", 2, (0, 1))
    ket0 = np.array([1, 0, 0], dtype=np.complex128)
    for k in range(3):
        E = branch_operator(SUM, ket0, k)
        want = np.zeros((3, 3))
        want[k, k] = 1  # SUM copies the data digit into the ancilla
        assert np.allclose(E, want)


def test_branch_operator_validation():
    with pytest.raises(ValueError):
        branch_operator(np.eye(3), np.zeros(3), 0)
    with pytest.raises(ValueError):
        branch_operator(np.eye(9), np.zeros(9), 0)


def test_check_reduction_random():
    rng = np.random.default_rng(79)
    m = magic_state("H3").complex_vector()
    for _ in range(110):
        C = circuit_matrix(rand_word(rng, 2, 6), 2)
        D = weyl_matrix(1, [rng.integers(0, 3)], [rng.integers(0, 3)])
        a, b = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        assert check_reduction(D, a, b, C, m, tol=1e-12)
    # dropping the omega^{b(k-a)} phase must break the identity
    assert not check_reduction(np.eye(3), 0, 1, np.eye(9), m, include_phase=False)


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


def test_is_phase_state():
    v = np.array([1, 1j, np.exp(1j * np.pi / 3)]) / np.sqrt(3)
    ok, phases = is_phase_state(v)
    assert ok
    assert phases == pytest.approx((np.pi / 2, np.pi / 3), abs=1e-12)
    ok, phases = is_phase_state(magic_state("H3").complex_vector())
    assert not ok and phases is None
    assert is_phase_state(magic_state("T3").complex_vector())[0]
    with pytest.raises(ValueError):
        is_phase_state(np.zeros(3))


def test_is_nonclifford_diagonal():
    assert is_nonclifford_diagonal((np.pi / 2, np.pi / 3))
    assert not is_nonclifford_diagonal((2 * np.pi / 3, 4 * np.pi / 3))
    assert is_nonclifford_diagonal((np.pi, np.pi))
    assert not is_nonclifford_diagonal((0.0, -2 * np.pi / 3))
    # just inside / outside the tolerance
    assert not is_nonclifford_diagonal((2 * np.pi / 3 + 0.9e-5, 0), atol=1e-5)
    assert is_nonclifford_diagonal((2 * np.pi / 3 + 1.1e-5, 0), atol=1e-5)


# ---------------------------------------------------------------------------
# protocol invariants
# ---------------------------------------------------------------------------


def test_branch_probabilities_sum_to_one():
    rng = np.random.default_rng(83)
    for name in ("S", "N", "H3", "T3"):
        m = magic_state(name).complex_vector()
        for _ in range(5):
            C = circuit_matrix(rand_word(rng, 2, 7), 2)
            total = sum(
                float(np.linalg.norm(branch_operator(C, m, k) @ m) ** 2) for k in range(3)
            )
            assert abs(total - 1) < 1e-12


def test_weyl_prefactor_preserves_classifications():
    # multiset of branch classifications is invariant under C -> (Weyl) C
    rng = np.random.default_rng(89)
    m = magic_state("H3").complex_vector()

    def classes(C):
        out = []
        for k in range(3):
            v = branch_operator(C, m, k) @ m
            if np.abs(v).max() < 1e-7:
                out.append(CLASS_NONE)
                continue
            ok, phases = is_phase_state(v)
            if not ok:
                out.append(CLASS_NONE)
            elif is_nonclifford_diagonal(phases):
                out.append(CLASS_NONCLIFFORD)
            else:
                out.append(CLASS_CLIFFORD)
        return sorted(out)

    for _ in range(20):
        C = circuit_matrix(rand_word(rng, 2, 6), 2)
        W = np.kron(
            weyl_matrix(1, [rng.integers(0, 3)], [rng.integers(0, 3)]),
            weyl_matrix(1, [rng.integers(0, 3)], [rng.integers(0, 3)]),
        )
        assert classes(C) == classes(W @ C)


def test_norrell_fourier_component_vanishes():
    # the unnormalized DFT of (1, 1, -2): zero at j=0, -3w^2 and -3w elsewhere
    one = CycloNumber.one()
    w = omega()
    c = [one, one, CycloNumber.from_rational(-2)]
    for j, want in ((0, CycloNumber.zero()), (1, -3 * w * w), (2, -3 * w)):
        got = sum((c[y] * w ** (j * y) for y in range(3)), CycloNumber.zero())
        assert got == want
    # numerically: after the first gate of the N protocol (H on the data leg)
    # the data-digit-0 block of the two-copy state vanishes
    m = magic_state("N").complex_vector()
    state = circuit_matrix("H1", 2) @ np.kron(m, m)
    assert np.abs(state[:3]).max() < 1e-15


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def test_replay_h3_protocol():
    rep = replay_protocol(H3_WORD, "H3", 1)
    assert rep.classification == CLASS_NONCLIFFORD
    assert rep.probability == pytest.approx(3 / 8, abs=1e-12)
    assert rep.phases == pytest.approx((np.pi / 2, np.pi / 3), abs=1e-12)


def test_replay_norrell_protocol():
    rep = replay_protocol(N_WORD, "N", 0)
    assert rep.probability == pytest.approx(1 / 4, abs=1e-12)
    want = np.array([1, -1, -1]) / np.sqrt(3)
    got = rep.vector / np.linalg.norm(rep.vector)
    phase = got[0] / want[0]
    assert np.allclose(got, phase * want, atol=1e-12)
    assert abs(abs(rep.phases[0]) - np.pi) < 1e-12
    assert abs(abs(rep.phases[1]) - np.pi) < 1e-12
    assert rep.classification == CLASS_NONCLIFFORD


def test_replay_empty_word():
    for name in ("N", "T3"):
        m = magic_state(name).complex_vector()
        for k in range(3):
            rep = replay_protocol("", name, k)
            assert np.allclose(rep.vector, m[k] * m, atol=1e-14)


# ---------------------------------------------------------------------------
# exhaustive sweeps
# ---------------------------------------------------------------------------


def test_sweep_two_copy_h3():
    res = sweep_two_copy("H3")
    assert res.total == 51840 * 3
    nc = res.nonclifford_hits()
    assert nc, "H3 must admit two-copy conversion protocols"
    for r in nc:
        assert abs(r.probability - 3 / 8) < 1e-10
    exact = [
        r
        for r in nc
        if abs(r.phases[0] - np.pi / 2) < 1e-8 and abs(r.phases[1] - np.pi / 3) < 1e-8
    ]
    assert exact, "the canonical (pi/2, pi/3) output must appear in the sweep"


def test_sweep_two_copy_norrell():
    res = sweep_two_copy("N")
    nc = res.nonclifford_hits()
    assert nc
    for r in nc:
        assert abs(r.probability - 1 / 4) < 1e-10
    exact = [
        r
        for r in nc
        if abs(abs(r.phases[0]) - np.pi) < 1e-8 and abs(abs(r.phases[1]) - np.pi) < 1e-8
    ]
    assert exact


def test_sweep_two_copy_strange_has_no_nonclifford_hits():
    res = sweep_two_copy("S")
    assert res.nonclifford_hits() == []
    # S x S does reach phase states, but they all inject Clifford gates
    assert res.counts[CLASS_CLIFFORD] > 0


def test_sweep_injection_t3_positive_control():
    res = sweep_injection("T3")
    assert res.hits, "T3 admits a deterministic injection gadget"
    want = (2 * np.pi / 9, 4 * np.pi / 9)
    canonical = [
        g
        for g in res.hits
        if g.diagonal_phases is not None
        and abs(g.diagonal_phases[0] - want[0]) < 1e-8
        and abs(g.diagonal_phases[1] - want[1]) < 1e-8
    ]
    assert canonical, "diag(1, w9, w9^2) must be recovered"
    g = canonical[0]
    assert set(g.corrections) == {k for k in range(3)} - {g.k_star}


@pytest.mark.parametrize("name", ["S", "H3", "N"])
def test_sweep_injection_other_states_have_no_gadget(name):
    res = sweep_injection(name)
    assert res.hits == []
