import itertools

import numpy as np
import pytest

from _builders import random_lorentzian, random_spec, random_three_form
from geoverify import catalog
from geoverify.geometry import perm_sign
from geoverify.torsion import (
    action_identity_residual,
    bianchi_residual,
    cyclic_sum3,
    decompose_torsion,
    form_action,
    four_form_components,
    identity_suite,
    lemma1_check,
    sigma_tau,
    torsion_norm,
    vectorial_torsion,
)
from geoverify.errors import PreconditionError


def elementary_form(dim, *triples):
    """Sum of e^{ijk} for the given increasing triples, as a full array."""
    out = np.zeros((dim,) * 3)
    for t in triples:
        for p in itertools.permutations(range(3)):
            out[tuple(t[i] for i in p)] += perm_sign(p)
    return out


# --- decomposition ---------------------------------------------------------


def test_decompose_zero():
    d = decompose_torsion(np.zeros((4, 4, 4)), np.eye(4))
    assert not d.xi.any() and not d.skew.any() and not d.twist.any()


@pytest.mark.parametrize("dim", [3, 4, 5, 6])
def test_decompose_round_trip(dim):
    rng = np.random.default_rng(dim)
    g = random_lorentzian(rng, dim)
    xi0 = rng.normal(size=dim)
    S0 = random_three_form(rng, dim)
    T = vectorial_torsion(g, xi0) + S0
    d = decompose_torsion(T, g)
    assert np.max(np.abs(d.xi - xi0)) < 1e-10
    assert np.max(np.abs(d.skew - S0)) < 1e-10
    assert np.max(np.abs(d.twist)) < 1e-10


@pytest.mark.parametrize("seed", range(4))
def test_pure_twistor_is_fixed(seed):
    rng = np.random.default_rng(seed)
    dim = 5
    g = random_lorentzian(rng, dim)
    T = rng.normal(size=(dim,) * 3)
    T = T - np.transpose(T, (1, 0, 2))
    Q = decompose_torsion(T, g).twist
    ginv = np.linalg.inv(g)
    assert np.max(np.abs(np.einsum("il,ijl->j", ginv, Q))) < 1e-10
    assert np.max(np.abs(cyclic_sum3(Q))) < 1e-10
    d = decompose_torsion(Q, g)
    assert np.max(np.abs(d.xi)) < 1e-10
    assert np.max(np.abs(d.skew)) < 1e-10
    assert np.max(np.abs(d.twist - Q)) < 1e-10
    # reassembly of the original
    full = decompose_torsion(T, g)
    assert np.max(np.abs(vectorial_torsion(g, full.xi) + full.skew + full.twist - T)) < 1e-12


def test_decompose_rejects_non_antisymmetric():
    with pytest.raises(PreconditionError):
        decompose_torsion(np.ones((3, 3, 3)), np.eye(3))


# --- sigma_tau -------------------------------------------------------------


def brute_sigma(tau, g):
    """sigma(X,Y,Z,V) by explicit loops over basis vectors."""
    d = tau.shape[0]
    ginv = np.linalg.inv(g)

    def tau_vec(a, b):  # tau(e_a, e_b) as a vector
        return [sum(tau[a, b, l] * ginv[l, m] for l in range(d)) for m in range(d)]

    def t3(vec, c, v):
        return sum(vec[m] * tau[m, c, v] for m in range(d))

    out = np.zeros((d,) * 4)
    for x, y, z, v in itertools.product(range(d), repeat=4):
        out[x, y, z, v] = (t3(tau_vec(x, y), z, v) + t3(tau_vec(y, z), x, v)
                           + t3(tau_vec(z, x), y, v))
    return out


def test_sigma_vanishes_in_dim3():
    rng = np.random.default_rng(0)
    tau = random_three_form(rng, 3)
    assert np.max(np.abs(sigma_tau(tau, random_lorentzian(rng, 3)))) < 1e-12


def test_sigma_vanishes_on_su2_su2():
    _, B, tau = catalog.lie_point_data("su2xsu2")
    assert tau.shape == (6, 6, 6)
    assert np.max(np.abs(brute_sigma(tau, B))) < 1e-12
    assert np.max(np.abs(sigma_tau(tau, B))) < 1e-12


def test_sigma_of_two_overlapping_planes():
    tau = elementary_form(5, (0, 1, 2), (0, 3, 4))
    oracle = brute_sigma(tau, np.eye(5))
    comps = four_form_components(oracle)
    nonzero = {k: v for k, v in comps.items() if v}
    assert nonzero == {(1, 2, 3, 4): 1.0}
    ours = sigma_tau(tau, np.eye(5))
    assert np.array_equal(ours, oracle)
    for p in itertools.permutations(range(4)):
        assert np.array_equal(np.transpose(ours, p), perm_sign(p) * ours)


def test_sigma_decomposable_is_zero():
    assert not sigma_tau(elementary_form(5, (0, 1, 2)), np.eye(5)).any()


@pytest.mark.parametrize("seed", range(3))
def test_sigma_matches_brute_force_lorentzian(seed):
    rng = np.random.default_rng(seed)
    g = random_lorentzian(rng, 4)
    tau = random_three_form(rng, 4)
    assert np.max(np.abs(sigma_tau(tau, g) - brute_sigma(tau, g))) < 1e-10


# --- form action -----------------------------------------------------------


def rotation(d, a, b):
    """Endomorphism e_a ^ e_b of Euclidean space: e_a -> e_b, e_b -> -e_a."""
    L = np.zeros((d, d))
    L[b, a] = 1.0
    L[a, b] = -1.0
    return L


def two_form(d, a, b):
    w = np.zeros((d, d))
    w[a, b], w[b, a] = 1.0, -1.0
    return w


def test_rotation_fixes_its_plane():
    assert not form_action(rotation(3, 0, 1), two_form(3, 0, 1), np.eye(3)).any()


def test_rotation_on_other_plane():
    L = rotation(3, 0, 1)
    w = two_form(3, 0, 2)
    oracle = np.zeros((3, 3))
    E = np.eye(3)
    for i, j in itertools.product(range(3), repeat=2):
        oracle[i, j] = -(L @ E[i]) @ w @ E[j] - E[i] @ w @ (L @ E[j])
    ours = form_action(L, w, np.eye(3))
    assert np.array_equal(ours, oracle)
    assert np.array_equal(ours, two_form(3, 1, 2))


def test_non_antisymmetric_endomorphism_warns():
    with pytest.warns(UserWarning):
        form_action(np.diag([1.0, 0, 0]), two_form(3, 0, 1), np.eye(3))


@pytest.mark.parametrize("dim", [3, 4, 5, 6])
def test_action_identity_random(dim):
    rng = np.random.default_rng(100 + dim)
    for _ in range(3):
        assert action_identity_residual(random_three_form(rng, dim), random_lorentzian(rng, dim)) < 1e-10


# --- identity suite and the parallelism conditions -------------------------


@pytest.mark.parametrize("dim", [3, 4, 5, 6])
def test_identity_suite_random(dim):
    rng = np.random.default_rng(dim)
    spec = random_spec(rng, dim, S=True)
    rep = identity_suite(spec, spec.sample_points(20, rng))
    assert rep.n_points == 20
    assert rep.dT1 < 1e-7 and rep.dT2 < 1e-7 and rep.action < 1e-10


def test_identity_suite_zero_tau():
    spec = random_spec(np.random.default_rng(1), 4)
    zero = np.full((4, 4, 4), None, dtype=object)
    rep = identity_suite(spec, spec.sample_points(5, np.random.default_rng(0)), zero)
    assert (rep.dT1, rep.dT2, rep.action) == (0.0, 0.0, 0.0)


def test_identity_suite_constant_flat():
    spec = catalog.build_spec(
        "flat5", [f"x{i}" for i in range(5)], {}, {(i, i): "1" for i in range(5)},
        S={(0, 1, 2): "1.5", (0, 3, 4): "-0.5", (1, 2, 4): "2"}, domain=[(-1, 1)] * 5,
    )
    pts = spec.sample_points(5, np.random.default_rng(0))
    rep = identity_suite(spec, pts)
    assert rep.dT1 < 1e-12 and rep.dT2 < 1e-12
    res = lemma1_check(spec, pts)
    assert res.d_tau == 0.0 and res.nabla_g_tau == 0.0


def test_lemma1_pp_wave():
    spec = catalog.skew_pp_wave()
    res = lemma1_check(spec, spec.sample_points(20, np.random.default_rng(0)))
    assert res.as_tuple() == (True, True, True)


def test_lemma1_decomposable_flat():
    spec = catalog.build_spec(
        "flat5", [f"x{i}" for i in range(5)], {}, {(i, i): "1" for i in range(5)},
        S={(0, 1, 2): "1"}, domain=[(-1, 1)] * 5,
    )
    res = lemma1_check(spec, spec.sample_points(10, np.random.default_rng(0)))
    assert res.as_tuple() == (True, True, True)


@pytest.mark.parametrize("seed", range(3))
def test_lemma1_random_not_parallel(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, 5, S=True)
    res = lemma1_check(spec, spec.sample_points(10, rng))
    assert res.as_tuple() == (False, False, False)
    assert res.uniform


# --- Bianchi ---------------------------------------------------------------


@pytest.mark.parametrize("entry", ["kundt3", "plane_wave"])
def test_bianchi_on_parallel_entries(entry):
    spec = catalog.build(entry)
    rep = bianchi_residual(spec, spec.sample_points(10, np.random.default_rng(4)))
    assert rep.asserted
    assert rep.residual < 1e-7
    assert rep.general_residual < 1e-7


def test_bianchi_not_asserted_for_nonparallel_torsion():
    spec = random_spec(np.random.default_rng(9), 4, xi=True, S=True)
    rep = bianchi_residual(spec, spec.sample_points(5, np.random.default_rng(0)))
    assert not rep.asserted
    assert rep.general_residual < 1e-7


# --- torsion norm ----------------------------------------------------------


def test_norm_of_degenerate_form():
    # Witt basis (p, e1, e2, q): p isotropic, omega = e1 ^ e2 on the screen
    g = np.zeros((4, 4))
    g[0, 3] = g[3, 0] = 1.0
    g[1, 1] = g[2, 2] = 1.0
    assert torsion_norm(elementary_form(4, (0, 1, 2)), g) == 0.0


def test_norm_of_euclidean_volume():
    assert torsion_norm(elementary_form(3, (0, 1, 2)), np.eye(3)) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_norm_of_lorentzian_volume(a):
    g = np.diag([-1.0, 1.0, 1.0])
    S = a * elementary_form(3, (0, 1, 2))
    ginv = np.linalg.inv(g)
    oracle = 0.0
    for i, j, k in itertools.product(range(3), repeat=3):
        up = sum(ginv[i, x] * ginv[j, y] * ginv[k, z] * S[x, y, z]
                 for x, y, z in itertools.product(range(3), repeat=3))
        oracle += S[i, j, k] * up
    assert torsion_norm(S, g) == pytest.approx(oracle / 6.0, abs=1e-14)
    assert torsion_norm(S, g) == pytest.approx(-a * a, abs=1e-14)
