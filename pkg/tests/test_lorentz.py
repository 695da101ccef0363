import itertools

import numpy as np
import pytest
import sympy as sp

from geoverify.errors import PreconditionError
from geoverify.geometry import perm_sign, witt_frame, witt_gram
from geoverify.lorentz import (
    LorentzBivector,
    annihilator,
    basis_vector,
    bivector_matrix,
    classify_shape,
    embed_screen_form,
    invariant_subspace_check,
    is_antisymmetric,
    lie_closure_residual,
    matrix_bivector,
    random_stabilizer_element,
    reassemble_shape,
    screen_project,
    stabilizer_basis,
    wedge,
    wedge_p_omega,
)
from geoverify.torsion import form_action


def form3(N, *triples):
    """Sum of the elementary 3-forms dx^i ^ dx^j ^ dx^k in coordinates."""
    out = np.zeros((N,) * 3)
    for t in triples:
        for p in itertools.permutations(range(3)):
            out[tuple(t[i] for i in p)] += perm_sign(p)
    return out


def brute_action(L, omega):
    """(L . omega)(X, Y, Z) by explicit loops."""
    N = omega.shape[0]
    out = np.zeros_like(omega)
    for i, j, k in itertools.product(range(N), repeat=3):
        out[i, j, k] = -sum(L[m, i] * omega[m, j, k] + L[m, j] * omega[i, m, k]
                            + L[m, k] * omega[i, j, m] for m in range(N))
    return out


@pytest.mark.parametrize("n", range(7))
def test_stabilizer_dimensions(n):
    line = stabilizer_basis("line", n)
    vec = stabilizer_basis("vector", n)
    assert len(line) == 1 + n * (n - 1) // 2 + n
    assert len(vec) == n * (n - 1) // 2 + n
    G = witt_gram(n)
    for b in line:
        assert is_antisymmetric(b.matrix(), G)
    for b in vec:
        assert not (b.matrix() @ basis_vector(n, 0)).any()
    if line:
        assert lie_closure_residual(line) < 1e-10
    assert lie_closure_residual(vec) < 1e-10


def test_stabilizer_counts_n3():
    assert len(stabilizer_basis("line", 3)) == 7
    assert len(stabilizer_basis("vector", 3)) == 6


def test_stabilizer_n0():
    line = stabilizer_basis("line", 0)
    assert len(line) == 1 and line[0].a == 1.0
    assert stabilizer_basis("vector", 0) == []


def test_stabilizer_bad_kind():
    with pytest.raises(ValueError):
        stabilizer_basis("plane", 2)


def test_bivector_matrix_pq():
    b = LorentzBivector(1.0, np.zeros((0, 0)), np.zeros(0))
    assert np.array_equal(bivector_matrix(b), np.diag([1.0, -1.0]))
    b3 = LorentzBivector(1.0, np.zeros((3, 3)), np.zeros(3))
    assert np.array_equal(b3.matrix(), np.diag([1.0, 0, 0, 0, -1.0]))


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_bivector_round_trip(n):
    rng = np.random.default_rng(n)
    for kind in ("line", "vector"):
        b = random_stabilizer_element(kind, n, rng)
        back = matrix_bivector(b.matrix())
        assert back.a == b.a
        assert np.array_equal(back.A, b.A)
        assert np.array_equal(back.X, b.X)


def test_matrix_bivector_rejects_general_matrix():
    m = np.zeros((4, 4))
    m[1, 0] = 1.0
    with pytest.raises(PreconditionError):
        matrix_bivector(m)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_matrix_action_matches_wedge_expansion(n):
    rng = np.random.default_rng(20 + n)
    G = witt_gram(n)
    b = random_stabilizer_element("line", n, rng)
    p, q = basis_vector(n, 0), basis_vector(n, n + 1)
    e = [basis_vector(n, 1 + i) for i in range(n)]

    def act(X, Y, Z):  # (X ^ Y) Z = g(X, Z) Y - g(Y, Z) X
        return (X @ G @ Z) * Y - (Y @ G @ Z) * X

    for _ in range(5):
        v = rng.normal(size=n + 2)
        expected = -b.a * act(p, q, v)
        for i, j in itertools.combinations(range(n), 2):
            expected = expected + b.A[j, i] * act(e[i], e[j], v)
        for i in range(n):
            expected = expected + b.X[i] * act(p, e[i], v)
        assert np.max(np.abs(b.matrix() @ v - expected)) < 1e-12
        assert np.max(np.abs(wedge(p, q, G) @ v - act(p, q, v))) < 1e-12


def test_annihilator_of_zero():
    basis = stabilizer_basis("line", 3)
    ann = annihilator(np.zeros((5, 5, 5)), basis)
    assert len(ann) == len(basis)


def test_volume_form_fixed_by_rotations():
    n = 3
    vol = embed_screen_form(form3(3, (0, 1, 2)))
    so3 = [b for b in stabilizer_basis("vector", n) if not b.X.any()]
    assert len(so3) == 3
    for b in so3:
        assert not brute_action(b.matrix(), vol).any()
    assert len(annihilator(vol, so3)) == 3


def exact_rank(cols):
    return sp.Matrix([[sp.nsimplify(x) for x in row] for row in cols]).rank()


def test_annihilator_of_p_e1_e2():
    n = 3
    N = n + 2
    # p^flat is dual to q (last index); screen indices 1..3
    tau = form3(N, (1, 2, N - 1))
    basis = stabilizer_basis("vector", n)
    cols = np.column_stack([brute_action(b.matrix(), tau).ravel() for b in basis])
    oracle_dim = len(basis) - exact_rank(cols)
    ann = annihilator(tau, basis)
    assert len(ann) == oracle_dim == 4  # e_1^e_2 plus all of p^R^3
    for L in ann:
        assert np.max(np.abs(form_action(L, tau))) < 1e-10
    # a basis element outside the annihilator breaks the condition
    excluded = [b for b in basis if np.max(np.abs(form_action(b.matrix(), tau))) > 1e-10]
    assert excluded
    for b in excluded:
        stacked = np.column_stack([m.ravel() for m in ann] + [b.matrix().ravel()])
        assert np.linalg.matrix_rank(stacked) == len(ann) + 1


def test_classify_p_omega():
    omega = np.zeros((3, 3))
    omega[0, 1], omega[1, 0] = 1.0, -1.0
    S = wedge_p_omega(omega)
    res = classify_shape(S)
    assert res.shape == "p^omega"
    assert np.array_equal(res.omega, omega)
    assert res.norm2 == 0.0
    assert np.array_equal(reassemble_shape(res), S)


def test_classify_p_omega_plus_screen_form():
    n = 5
    omega = np.zeros((n, n))
    omega[0, 1], omega[1, 0] = 1.0, -1.0
    S = wedge_p_omega(omega) + embed_screen_form(form3(n, (2, 3, 4)))
    res = classify_shape(S)
    assert res.shape == "p^omega+omega_E"
    assert res.norm2 > 0
    assert np.array_equal(reassemble_shape(res), S)


def test_classify_other_and_zero():
    N = 5
    # q^flat is dual to p (index 0): a q-leg
    assert classify_shape(form3(N, (0, 1, 2))).shape == "other"
    assert classify_shape(np.zeros((N,) * 3)).shape == "zero"


def test_invariant_subspaces():
    n = 3
    gens = stabilizer_basis("vector", n)
    p = basis_vector(n, 0)
    assert invariant_subspace_check(gens, p)
    perp = np.column_stack([basis_vector(n, k) for k in range(n + 1)])  # p, e_1..e_n
    assert invariant_subspace_check(gens, perp)
    assert not invariant_subspace_check(gens, basis_vector(n, n + 1))


def test_random_subspace_not_invariant():
    rng = np.random.default_rng(12345)
    gens = [random_stabilizer_element("line", 3, rng) for _ in range(3)]
    assert not invariant_subspace_check(gens, rng.normal(size=(5, 2)))


def test_screen_project_examples():
    n = 3
    p = basis_vector(n, 0)
    assert not screen_project(p).any()
    v = basis_vector(n, 2) + 5 * p
    assert np.array_equal(screen_project(v), [0.0, 1.0, 0.0])
    with pytest.raises(PreconditionError):
        screen_project(basis_vector(n, n + 1))


def test_screen_project_lift():
    rng = np.random.default_rng(3)
    n = 4
    for _ in range(10):
        s = rng.normal(size=n)
        lift = np.concatenate([[rng.normal()], s, [0.0]])
        assert np.max(np.abs(screen_project(lift) - s)) < 1e-14


def test_screen_project_in_general_frame():
    rng = np.random.default_rng(7)
    g = np.diag([-1.0, 1, 1, 1])
    fr = witt_frame(g, np.array([1.0, 1.0, 0.0, 0.0]))
    F = fr.matrix()
    s = rng.normal(size=2)
    v = F[:, 1:-1] @ s + 2.0 * F[:, 0]
    assert np.max(np.abs(screen_project(v, F, g) - s)) < 1e-12
