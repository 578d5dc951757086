import itertools

import numpy as np
import pytest

from kkdirac.clifford import (
    SIGMA1,
    SIGMA2,
    SIGMA3,
    build_gamma_0_3,
    build_gamma_1_2,
    eye,
    is_zero,
    kron,
    lift_to_6d,
    lorentz_generators,
    su2_basis,
    su2_euler,
    to_complex,
    verify_clifford_relation,
    verify_generator_blocks,
    verify_lorentz_closure,
    verify_pauli_products,
    verify_su2_bracket,
)
from kkdirac.qi import QI
from kkdirac.symexpr import evaluate, evaluate_array, sym

I = QI(0, 1)


@pytest.fixture(scope="module")
def reps():
    g3, gS = build_gamma_1_2(), build_gamma_0_3()
    return g3, gS, lift_to_6d(g3, gS)


def test_explicit_matrices(reps):
    g3, gS, _ = reps
    assert is_zero(g3[0] - I * SIGMA2)
    assert is_zero(g3[1] + SIGMA3) and is_zero(g3[2] + SIGMA1)
    assert is_zero(gS[5] + SIGMA3) and is_zero(gS[6] - SIGMA1) and is_zero(gS[7] - SIGMA2)


def test_clifford_relations_exact(reps):
    for g, name, npairs in zip(reps, ("3", "S", "6"), (6, 6, 21)):
        checks = verify_clifford_relation(g, name)
        assert len(checks) == npairs
        assert all(c.passed for c in checks)


def test_anticommutators_by_hand(reps):
    _, _, g6 = reps
    for a, b in itertools.product(g6.labels, repeat=2):
        ac = g6[a] @ g6[b] + g6[b] @ g6[a]
        assert is_zero(ac - eye(8) * (2 * g6.eta(a, b)))


def test_corrupted_gamma_is_named(reps):
    g3, gS, g6 = reps
    bad = g6.replace(6, g6[6] * I)
    failing = [c.name for c in verify_clifford_relation(bad, "6") if not c.passed]
    assert failing == ["6{G6,G6}=2eta"]
    assert not all(c.passed for c in verify_lorentz_closure(lorentz_generators(bad)))


def test_lift_rejects_wrong_signature(reps):
    g3, gS, _ = reps
    with pytest.raises(ValueError):
        lift_to_6d(gS, g3)


def test_sigma56_is_half_product(reps):
    _, gS, _ = reps
    sig = lorentz_generators(gS)
    assert is_zero(sig(5, 6) - gS[5] @ gS[6] * (QI(1) / 2))
    assert is_zero(sig(6, 5) + sig(5, 6))


def test_generator_blocks_and_closure(reps):
    g3, gS, g6 = reps
    sig6 = lorentz_generators(g6)
    blocks = verify_generator_blocks(sig6, g3, gS)
    assert len(blocks) == 15 and all(c.passed for c in blocks)
    assert all(c.passed for c in verify_lorentz_closure(sig6))


def test_mixed_generator_block(reps):
    g3, gS, g6 = reps
    sig6 = lorentz_generators(g6)
    assert is_zero(sig6(0, 5) - kron(SIGMA3, gS[5], g3[0]) * (I / 2))


def test_pauli_and_su2():
    assert all(c.passed for c in verify_pauli_products())
    X = su2_basis()
    assert all(c.passed for c in verify_su2_bracket(X))
    for a in X:
        assert is_zero(X[a] + np.vectorize(lambda q: q.conjugate(), otypes=[object])(X[a]).T)


def test_euler_element_is_unitary():
    G = su2_euler(sym("theta"), sym("phi"), sym("psi"))
    assert G.det().is_zero() is False
    env = {"theta": 0.7, "phi": -1.3, "psi": 2.9}
    assert abs(evaluate(G.det(), env) - 1) < 1e-14
    pts = {k: np.array([v]) for k, v in env.items()}
    from kkdirac.symexpr import Points

    m = evaluate_array(G.matrix, Points(pts))[0]
    assert np.allclose(m @ m.conj().T, np.eye(2))
    assert np.allclose(evaluate_array(G.inverse(), Points(pts))[0], np.linalg.inv(m))


def test_euler_identity_at_zero():
    G = su2_euler(0, 0, 0)
    assert np.allclose(to_complex(np.vectorize(lambda e: e.constant_value(), otypes=[object])(G.matrix)), np.eye(2))
