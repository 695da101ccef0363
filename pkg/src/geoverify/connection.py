"""Levi-Civita and torsion connections in coordinate frames.

Index conventions used throughout:

* ``gamma[k, i, j]`` is the coefficient of ``d_k`` in ``nabla_{d_i} d_j``;
  the full connection adds ``A[k, i, j]`` from
  ``A(X) = X ^ xi + S(X)/2`` where ``(X ^ Y) Z = g(X, Z) Y - g(Y, Z) X``.
* ``T[i, j, l] = g(T(d_i, d_j), d_l)``.
* ``R[i, j, k, l]`` is the ``d_l`` component of ``R(d_i, d_j) d_k`` and
  ``R_low[i, j, k, l] = g(R(d_i, d_j) d_k, d_l)``.
* Covariant derivatives put the derivative index first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import PreconditionError
from .geometry import MetricSpec, MetricValue, metric_at


@dataclass(frozen=True)
class ConnectionValue:
    gamma: np.ndarray
    A: np.ndarray
    metric: MetricValue
    xi: np.ndarray
    S: np.ndarray
    # first derivatives, derivative index last; present when requested
    dgamma: np.ndarray | None = None
    dA: np.ndarray | None = None
    dxi: np.ndarray | None = None
    dS: np.ndarray | None = None

    @property
    def full(self) -> np.ndarray:
        return self.gamma + self.A

    @property
    def dfull(self) -> np.ndarray:
        return self.dgamma + self.dA


@dataclass(frozen=True)
class CurvatureValue:
    R: np.ndarray
    R_low: np.ndarray


def _lc(mv: MetricValue, with_derivs: bool):
    dg, ginv = mv.dg, mv.g_inv
    low = 0.5 * (
        np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    )
    gamma = np.einsum("kl,lij->kij", ginv, low)
    if not with_derivs:
        return gamma, None
    d2g = mv.d2g
    dlow = 0.5 * (
        np.einsum("jlim->lijm", d2g)
        + np.einsum("iljm->lijm", d2g)
        - np.einsum("ijlm->lijm", d2g)
    )
    dginv = -np.einsum("ka,abm,bl->klm", ginv, dg, ginv)
    dgamma = np.einsum("klm,lij->kijm", dginv, low) + np.einsum("kl,lijm->kijm", ginv, dlow)
    return gamma, dgamma


def _torsion_data(spec: MetricSpec, point, order: int):
    xi, dxi, _ = ex.jets_of(spec.xi_exprs(), point, spec.params, order=order)
    S, dS, _ = ex.jets_of(spec.S_exprs(), point, spec.params, order=order)
    return xi, dxi, S, dS


def contorsion_lowered(g, xi, S):
    """``g(A(d_i) d_j, d_l) = g_ij xi_l - xi_j g_il + S_ijl / 2``."""
    xl = g @ xi
    return (
        np.einsum("ij,l->ijl", g, xl) - np.einsum("j,il->ijl", xl, g) + 0.5 * S
    )


def christoffels_at(spec: MetricSpec, point, derivs: bool = False) -> ConnectionValue:
    """Levi-Civita connection; torsion fields are ignored."""
    point = np.asarray(point, dtype=float)
    mv = metric_at(spec, point, order=2 if derivs else 1)
    gamma, dgamma = _lc(mv, derivs)
    d = spec.dim
    z3 = np.zeros((d, d, d))
    return ConnectionValue(
        gamma, z3, mv, np.zeros(d), z3,
        dgamma,
        np.zeros((d, d, d, d)) if derivs else None,
        np.zeros((d, d)) if derivs else None,
        np.zeros((d, d, d, d)) if derivs else None,
    )


def full_connection_at(spec: MetricSpec, point, derivs: bool = False) -> ConnectionValue:
    """Levi-Civita connection plus the ``X ^ xi + S(X)/2`` term."""
    point = np.asarray(point, dtype=float)
    mv = metric_at(spec, point, order=2 if derivs else 1)
    gamma, dgamma = _lc(mv, derivs)
    xi, dxi, S, dS = _torsion_data(spec, point, order=1)
    g, ginv, dg = mv.g, mv.g_inv, mv.dg
    A_low = contorsion_lowered(g, xi, S)
    A = np.einsum("kl,ijl->kij", ginv, A_low)
    dA = None
    if derivs:
        xl = g @ xi
        dxl = np.einsum("jkm,k->jm", dg, xi) + g @ dxi
        dA_low = (
            np.einsum("ijm,l->ijlm", dg, xl)
            + np.einsum("ij,lm->ijlm", g, dxl)
            - np.einsum("jm,il->ijlm", dxl, g)
            - np.einsum("j,ilm->ijlm", xl, dg)
            + 0.5 * dS
        )
        dginv = -np.einsum("ka,abm,bl->klm", ginv, dg, ginv)
        dA = np.einsum("klm,ijl->kijm", dginv, A_low) + np.einsum("kl,ijlm->kijm", ginv, dA_low)
    return ConnectionValue(gamma, A, mv, xi, S, dgamma, dA, dxi, dS)


def connection_at(spec: MetricSpec, point, use_full: bool = True, derivs: bool = False):
    if use_full:
        return full_connection_at(spec, point, derivs)
    return christoffels_at(spec, point, derivs)


# ---------------------------------------------------------------------------
# covariant derivatives of numeric tensor jets


def nabla_covariant(val: np.ndarray, dval: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Covariant derivative of a (0,k) tensor.

    ``val`` has k axes, ``dval`` has the derivative axis last; ``coeffs`` are
    the connection coefficients ``[k, i, j]``.  Result axes: ``(m, a_1..a_k)``.
    """
    k = val.ndim
    out = np.moveaxis(dval, -1, 0).copy()
    for r in range(k):
        # sum_p coeffs[p, m, a_r] * val[..., p, ...]
        t = np.tensordot(coeffs, val, axes=([0], [r]))  # (m, a_r, rest...)
        # move a_r from axis 1 to its slot at r + 1
        out -= np.moveaxis(t, 1, r + 1)
    return out


def nabla_vector(val: np.ndarray, dval: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``(nabla_m X)^k = d_m X^k + coeffs[k, m, p] X^p``; axes ``(m, k)``."""
    return dval.T + np.einsum("kmp,p->mk", coeffs, val)


def covariant_derivative(spec: MetricSpec, field, point, use_full: bool = True) -> np.ndarray:
    """Covariant derivative of a (0,k)-tensor field of expressions at ``point``."""
    field = np.asarray(field, dtype=object)
    if field.ndim == 0 or any(s != spec.dim for s in field.shape):
        raise PreconditionError("field rank/shape does not match the chart")
    point = np.asarray(point, dtype=float)
    cv = connection_at(spec, point, use_full)
    val, dval, _ = ex.jets_of(field, point, spec.params, order=1)
    return nabla_covariant(val, dval, cv.full)


def covariant_derivative_vector(spec: MetricSpec, field, point, use_full: bool = True):
    """Covariant derivative of a vector field of expressions; axes ``(m, k)``."""
    field = np.asarray(field, dtype=object)
    if field.shape != (spec.dim,):
        raise PreconditionError("vector field must have dim components")
    point = np.asarray(point, dtype=float)
    cv = connection_at(spec, point, use_full)
    val, dval, _ = ex.jets_of(field, point, spec.params, order=1)
    return nabla_vector(val, dval, cv.full)


def nabla_metric(cv: ConnectionValue) -> np.ndarray:
    return nabla_covariant(cv.metric.g, cv.metric.dg, cv.full)


def nabla_xi(cv: ConnectionValue) -> np.ndarray:
    return nabla_vector(cv.xi, cv.dxi, cv.full)


def nabla_S(cv: ConnectionValue) -> np.ndarray:
    return nabla_covariant(cv.S, cv.dS, cv.full)


def torsion_lowered(cv: ConnectionValue) -> np.ndarray:
    c = cv.full
    return np.einsum("lk,kij->ijl", cv.metric.g, c - np.transpose(c, (0, 2, 1)))


def torsion_closed_form(g, xi, S) -> np.ndarray:
    """Lowered ``T(X, Y) = (X ^ Y) xi + S(X, Y)``."""
    xl = g @ xi
    return np.einsum("i,jl->ijl", xl, g) - np.einsum("j,il->ijl", xl, g) + S


def torsion_at(spec: MetricSpec, point) -> np.ndarray:
    return torsion_lowered(full_connection_at(spec, point))


def nabla_torsion(cv: ConnectionValue) -> np.ndarray:
    """``(nabla_m T)_{ijl}`` for the full connection (needs ``derivs``)."""
    g, dg = cv.metric.g, cv.metric.dg
    xl = g @ cv.xi
    dxl = np.einsum("jkm,k->jm", dg, cv.xi) + g @ cv.dxi
    T = torsion_closed_form(g, cv.xi, cv.S)
    dT = (
        np.einsum("im,jl->ijlm", dxl, g)
        + np.einsum("i,jlm->ijlm", xl, dg)
        - np.einsum("jm,il->ijlm", dxl, g)
        - np.einsum("j,ilm->ijlm", xl, dg)
        + cv.dS
    )
    return nabla_covariant(T, dT, cv.full)


def curvature_from(cv: ConnectionValue, use_full: bool = True) -> CurvatureValue:
    c = cv.full if use_full else cv.gamma
    dc = cv.dfull if use_full else cv.dgamma
    R = (
        np.einsum("ljki->ijkl", dc)
        - np.einsum("likj->ijkl", dc)
        + np.einsum("lim,mjk->ijkl", c, c)
        - np.einsum("ljm,mik->ijkl", c, c)
    )
    R_low = np.einsum("ijka,la->ijkl", R, cv.metric.g)
    return CurvatureValue(R, R_low)


def curvature_at(spec: MetricSpec, point, use_full: bool = True) -> CurvatureValue:
    cv = connection_at(spec, point, use_full, derivs=True)
    return curvature_from(cv, use_full)


def exterior_derivative_values(dval: np.ndarray) -> np.ndarray:
    """``d omega`` from the partials of a k-form (derivative axis last)."""
    D = np.moveaxis(dval, -1, 0)
    k1 = D.ndim
    out = np.zeros_like(D)
    for r in range(k1):
        out += (-1) ** r * np.moveaxis(D, 0, r)
    return out


def exterior_derivative(spec: MetricSpec, omega, point) -> np.ndarray:
    """Exterior derivative of a k-form given as a full antisymmetric Expr array."""
    omega = np.asarray(omega, dtype=object)
    if omega.ndim >= spec.dim:
        raise PreconditionError("form degree must be below the dimension")
    _, dval, _ = ex.jets_of(omega, np.asarray(point, float), spec.params, order=1)
    return exterior_derivative_values(dval)


def fd_nabla_curvature(
    spec: MetricSpec, point, step: float = 1e-4, use_full: bool = True
) -> np.ndarray:
    """``(nabla_m R)_{ijkl}`` of the lowered curvature, by central differences.

    The partial derivatives of the curvature components are taken by central
    differences; the connection correction terms are exact.
    """
    point = np.asarray(point, dtype=float)
    if not spec.in_domain(point, margin=step):
        raise PreconditionError("point closer than one step to the domain boundary")
    d = spec.dim
    cv = connection_at(spec, point, use_full, derivs=False)
    R0 = curvature_at(spec, point, use_full).R_low
    dR = np.zeros(R0.shape + (d,))
    for m in range(d):
        h = np.zeros(d)
        h[m] = step
        Rp = curvature_at(spec, point + h, use_full).R_low
        Rm = curvature_at(spec, point - h, use_full).R_low
        dR[..., m] = (Rp - Rm) / (2 * step)
    return nabla_covariant(R0, dR, cv.full if use_full else cv.gamma)
