"""Torsion decomposition, sigma_tau, form actions and the identity checks.

All 3-tensors are lowered (``T[i, j, l] = g(T(e_i, e_j), e_l)``) and stored
as full arrays.  Forms are full antisymmetric arrays.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from . import connection as cn
from . import expr as ex
from .errors import PreconditionError
from .geometry import MetricSpec, invert_metric, perm_sign

LEMMA1_TOL = 1e-8


@dataclass(frozen=True)
class TorsionDecomposition:
    xi: np.ndarray
    skew: np.ndarray
    twist: np.ndarray


def vectorial_torsion(g, xi) -> np.ndarray:
    """Lowered ``(X ^ Y) xi``."""
    xl = np.asarray(g) @ np.asarray(xi, dtype=float)
    return np.einsum("i,jl->ijl", xl, g) - np.einsum("j,il->ijl", xl, g)


def cyclic_sum3(T: np.ndarray) -> np.ndarray:
    """``T_ijl + T_jli + T_lij`` on the first three axes."""
    return T + np.transpose(T, (2, 0, 1)) + np.transpose(T, (1, 2, 0))


def decompose_torsion(T, g) -> TorsionDecomposition:
    """Split a torsion tensor into vectorial, skew and twistorial parts.

    The vector is the metric trace scaled by ``-1/(dim-1)`` so that a purely
    vectorial torsion returns its own generator; the skew part is a third of
    the cyclic sum; the rest is the twistorial part.
    """
    T = np.asarray(T, dtype=float)
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    scale = max(1.0, float(np.max(np.abs(T))))
    if np.max(np.abs(T + np.transpose(T, (1, 0, 2)))) > 1e-10 * scale:
        raise PreconditionError("torsion must be antisymmetric in its first two slots")
    if d < 2:
        return TorsionDecomposition(np.zeros(d), np.zeros_like(T), T.copy())
    ginv = invert_metric(g)
    trace = np.einsum("il,ijl->j", ginv, T)
    xi_low = -trace / (d - 1)
    xi = ginv @ xi_low
    skew = cyclic_sum3(T) / 3.0
    twist = T - vectorial_torsion(g, xi) - skew
    return TorsionDecomposition(xi, skew, twist)


def inner3(A, B, g_inv) -> float:
    """Full metric contraction of two 3-tensors."""
    return float(np.einsum("abc,ai,bj,ck,ijk->", A, g_inv, g_inv, g_inv, B))


def raise_last(tau, g_inv):
    return np.einsum("ijl,lm->ijm", tau, g_inv)


def sigma_tau(tau, g) -> np.ndarray:
    """``sigma(X,Y,Z,V) = cyclic_{XYZ} tau(tau(X,Y), Z, V)`` as a full 4-array.

    The cyclic sum is antisymmetrized and entries with a repeated index are
    set to zero, so in dimension 3 the result is exactly zero.
    """
    tau = np.asarray(tau, dtype=float)
    g = np.asarray(g, dtype=float)
    tup = raise_last(tau, invert_metric(g))
    # P[x,y,z,v] = tau(tau(x,y), z, v)
    P = np.einsum("xym,mzv->xyzv", tup, tau)
    C = P + np.transpose(P, (2, 0, 1, 3)) + np.transpose(P, (1, 2, 0, 3))
    out = np.zeros_like(C)
    for perm in itertools.permutations(range(4)):
        out += perm_sign(perm) * np.transpose(C, perm)
    out /= 24.0
    d = C.shape[0]
    idx = np.indices((d,) * 4)
    distinct = np.ones(C.shape, dtype=bool)
    for a, b in itertools.combinations(range(4), 2):
        distinct &= idx[a] != idx[b]
    out[~distinct] = 0.0
    return out


def four_form_components(sigma: np.ndarray) -> dict:
    """Increasing-index storage ``{(i,j,k,l): value}`` of a 4-form."""
    d = sigma.shape[0]
    out = {}
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(j + 1, d):
                for l in range(k + 1, d):
                    out[(i, j, k, l)] = float(sigma[i, j, k, l])
    return out


def endomorphism_of(tau, X, g_inv) -> np.ndarray:
    """Matrix of ``Y -> tau(X, Y)`` (column convention)."""
    return np.einsum("i,ijl,lm->mj", np.asarray(X, float), tau, g_inv)


def check_antisymmetric(L, g, tol: float = 1e-10) -> float:
    """Residual of ``g(LX, Y) + g(X, LY) = 0``; warns above ``tol``."""
    M = np.asarray(g) @ np.asarray(L)
    res = float(np.max(np.abs(M + M.T))) if M.size else 0.0
    if res > tol * max(1.0, float(np.max(np.abs(M)))):
        warnings.warn(f"endomorphism is not g-antisymmetric (residual {res:.2e})")
    return res


def form_action(L, omega, g=None) -> np.ndarray:
    """``(L . omega)(X_1..X_k) = -sum_i omega(.., L X_i, ..)``."""
    L = np.asarray(L, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if g is not None:
        check_antisymmetric(L, g)
    out = np.zeros_like(omega)
    for r in range(omega.ndim):
        # omega(..., L X_r, ...): contract slot r with L[m, a_r]
        t = np.tensordot(omega, L, axes=([r], [0]))  # slot r moved to the end
        out -= np.moveaxis(t, -1, r)
    return out


def action_identity_residual(tau, g) -> float:
    """``max |(tau(X) . tau)(Y,Z,V) + sigma_tau(X,Y,Z,V)|`` over basis X."""
    tau = np.asarray(tau, dtype=float)
    ginv = invert_metric(g)
    sigma = sigma_tau(tau, g)
    d = tau.shape[0]
    worst = 0.0
    for x in range(d):
        X = np.zeros(d)
        X[x] = 1.0
        lhs = form_action(endomorphism_of(tau, X, ginv), tau)
        worst = max(worst, float(np.max(np.abs(lhs + sigma[x]))))
    return worst


def torsion_norm(S, g) -> float:
    """Signed squared norm ``S_ijk S^ijk / 3!``; no square root is taken."""
    ginv = invert_metric(np.asarray(g, float))
    S = np.asarray(S, dtype=float)
    return inner3(S, S, ginv) / 6.0


# ---------------------------------------------------------------------------
# pointwise identity data for skew torsion tau (connection nabla^g + tau/2)


@dataclass(frozen=True)
class SkewPointData:
    tau: np.ndarray
    d_tau: np.ndarray
    nabla_tau: np.ndarray
    nabla_g_tau: np.ndarray
    sigma: np.ndarray
    g: np.ndarray


def skew_point_data(spec: MetricSpec, point, tau_exprs=None) -> SkewPointData:
    """Everything the skew-torsion identities need at one point.

    ``tau_exprs`` defaults to the spec's S; the connection is always
    ``nabla^g + tau/2`` regardless of the spec's xi.
    """
    point = np.asarray(point, dtype=float)
    if tau_exprs is None:
        tau_exprs = spec.S_exprs()
    cv = cn.christoffels_at(spec, point)
    g = cv.metric.g
    tau, dtau, _ = ex.jets_of(tau_exprs, point, spec.params, order=1)
    A = np.einsum("kl,ijl->kij", cv.metric.g_inv, 0.5 * tau)
    nabla_g = cn.nabla_covariant(tau, dtau, cv.gamma)
    nabla = cn.nabla_covariant(tau, dtau, cv.gamma + A)
    return SkewPointData(
        tau, cn.exterior_derivative_values(dtau), nabla, nabla_g, sigma_tau(tau, g), g
    )


def dT1_residual(sd: SkewPointData) -> float:
    N = sd.nabla_tau  # N[x, y, z, v] = (nabla_x tau)(y, z, v)
    cyc = N + np.transpose(N, (2, 0, 1, 3)) + np.transpose(N, (1, 2, 0, 3))
    # (nabla_V tau)(X, Y, Z): axes (x,y,z,v) <- N[v, x, y, z]
    last = np.transpose(N, (1, 2, 3, 0))
    rhs = cyc - last + 2.0 * sd.sigma
    return float(np.max(np.abs(sd.d_tau - rhs)))


def dT2_residual(sd: SkewPointData) -> float:
    return float(np.max(np.abs(sd.nabla_tau - (sd.nabla_g_tau - 0.5 * sd.sigma))))


@dataclass(frozen=True)
class IdentityReport:
    dT1: float
    dT2: float
    action: float
    n_points: int


def identity_suite(spec: MetricSpec, points, tau_exprs=None) -> IdentityReport:
    """Max residuals of the exterior-derivative and covariant-derivative identities."""
    w1 = w2 = w3 = 0.0
    n = 0
    for pt in points:
        sd = skew_point_data(spec, pt, tau_exprs)
        w1 = max(w1, dT1_residual(sd))
        w2 = max(w2, dT2_residual(sd))
        w3 = max(w3, action_identity_residual(sd.tau, sd.g))
        n += 1
    return IdentityReport(w1, w2, w3, n)


@dataclass(frozen=True)
class Lemma1Result:
    cond1: bool
    cond2: bool
    cond3: bool
    nabla_tau: float
    d_tau: float
    sigma: float
    nabla_g_tau: float

    @property
    def uniform(self) -> bool:
        return self.cond1 == self.cond2 == self.cond3

    def as_tuple(self):
        return self.cond1, self.cond2, self.cond3


def lemma1_check(spec: MetricSpec, points, tau_exprs=None, tol: float = LEMMA1_TOL) -> Lemma1Result:
    """Evaluate the three equivalent parallelism conditions independently."""
    nt = dt = sg = ng = 0.0
    for pt in points:
        sd = skew_point_data(spec, pt, tau_exprs)
        nt = max(nt, float(np.max(np.abs(sd.nabla_tau))))
        dt = max(dt, float(np.max(np.abs(sd.d_tau))))
        sg = max(sg, float(np.max(np.abs(sd.sigma))))
        ng = max(ng, float(np.max(np.abs(sd.nabla_g_tau))))
    return Lemma1Result(
        nt < tol and dt < tol,
        nt < tol and sg < tol,
        ng < tol and sg < tol,
        nt, dt, sg, ng,
    )


# ---------------------------------------------------------------------------
# first Bianchi identity


def bianchi_lhs(curv: cn.CurvatureValue) -> np.ndarray:
    """``B[x,y,z,w] = g(cyclic_{xyz} R(x,y)z, w)``."""
    R = curv.R_low
    return R + np.transpose(R, (2, 0, 1, 3)) + np.transpose(R, (1, 2, 0, 3))


def _cyclic4(P):
    return P + np.transpose(P, (2, 0, 1, 3)) + np.transpose(P, (1, 2, 0, 3))


def bianchi_rhs_components(g, xi, S) -> np.ndarray:
    """Right-hand side of the first Bianchi identity for parallel twistor-free torsion."""
    ginv = invert_metric(g)
    xl = g @ xi
    Sup = raise_last(S, ginv)
    t1 = np.einsum("xym,mzw->xyzw", Sup, S)
    t2 = np.einsum("x,yzw->xyzw", xl, S)
    t3 = np.einsum("m,myz,xw->xyzw", xi, S, g)
    return _cyclic4(t1) + _cyclic4(t2) + _cyclic4(t3)


def bianchi_rhs_general(cv: cn.ConnectionValue) -> np.ndarray:
    """``cyclic {T(T(X,Y),Z) + (nabla_X T)(Y,Z)}`` lowered; valid for any torsion."""
    g = cv.metric.g
    T = cn.torsion_closed_form(g, cv.xi, cv.S)
    Tup = raise_last(T, cv.metric.g_inv)
    tt = np.einsum("xym,mzw->xyzw", Tup, T)
    nT = cn.nabla_torsion(cv)  # [x, y, z, w]
    return _cyclic4(tt) + _cyclic4(nT)


@dataclass(frozen=True)
class BianchiReport:
    residual: float
    general_residual: float
    parallel_torsion: float
    asserted: bool


def bianchi_residual(spec: MetricSpec, points, parallel_tol: float = 1e-8) -> BianchiReport:
    """First Bianchi residual with the component right-hand side.

    The component form is asserted only when the torsion is parallel at the
    sampled points; the general form (with the ``nabla T`` term) is always
    reported.
    """
    res = gen = par = 0.0
    for pt in points:
        cv = cn.full_connection_at(spec, pt, derivs=True)
        curv = cn.curvature_from(cv, use_full=True)
        lhs = bianchi_lhs(curv)
        par = max(par, float(np.max(np.abs(cn.nabla_torsion(cv)))))
        res = max(res, float(np.max(np.abs(lhs - bianchi_rhs_components(cv.metric.g, cv.xi, cv.S)))))
        gen = max(gen, float(np.max(np.abs(lhs - bianchi_rhs_general(cv)))))
    return BianchiReport(res, gen, par, par < parallel_tol)
