"""Named residual checks that catalog manifests and the CLI refer to.

Each check maps ``(spec, points)`` to one float.  Upper checks pass when the
value is at most the tolerance; lower checks (``*_nonzero``) pass when the
value exceeds it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import connection as cn
from . import expr as ex
from .errors import PreconditionError
from .geometry import MetricSpec, signature_at, three_form_exprs, witt_frame
from .torsion import (
    bianchi_residual,
    decompose_torsion,
    identity_suite,
    lemma1_check,
    sigma_tau,
    torsion_norm,
)


# ---------------------------------------------------------------------------
# helpers shared with the catalog preconditions


def _vector_exprs(spec: MetricSpec, field) -> np.ndarray:
    out = np.full(spec.dim, None, dtype=object)
    for i, e in enumerate(field):
        if isinstance(e, str):
            e = spec.parse(e)
        if e is not None and not e.is_zero_literal():
            out[i] = e
    return out


def _form_exprs(spec: MetricSpec, form) -> np.ndarray:
    if isinstance(form, np.ndarray):
        return form
    return three_form_exprs({k: spec.parse(v) if isinstance(v, str) else v for k, v in form.items()}, spec.dim)


def lc_parallel_vector(spec: MetricSpec, field, points) -> float:
    """``max |nabla^g X|`` over the points."""
    exprs = _vector_exprs(spec, field)
    worst = 0.0
    for pt in points:
        r = cn.covariant_derivative_vector(spec, exprs, pt, use_full=False)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def lc_parallel_form(spec: MetricSpec, form, points) -> float:
    exprs = _form_exprs(spec, form)
    worst = 0.0
    for pt in points:
        r = cn.covariant_derivative(spec, exprs, pt, use_full=False)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def flat_is_exact(spec: MetricSpec, field, phi, points) -> float:
    """``max |X^flat - d(e^phi)|``."""
    exprs = _vector_exprs(spec, field)
    if isinstance(phi, str):
        phi = spec.parse(phi)
    worst = 0.0
    for pt in points:
        g, _, _ = ex.jets_of(spec.metric_exprs(), pt, spec.params, order=0)
        X, _, _ = ex.jets_of(exprs, pt, spec.params, order=0)
        j = ex.eval_jet2(phi, pt, spec.params)
        d_exp = np.exp(j.value) * j.gradient
        worst = max(worst, float(np.max(np.abs(g @ X - d_exp))))
    return worst


def _field(spec: MetricSpec, name: str):
    try:
        return spec.fields[name]
    except KeyError:
        raise PreconditionError(f"check needs the field {name!r}, which the spec does not carry") from None


# ---------------------------------------------------------------------------
# check implementations


def _signature(spec, points):
    want = spec.meta.get("signature", "lorentzian")
    n_neg = {"lorentzian": 1, "riemannian": 0}.get(want)
    if n_neg is None:
        return 0.0
    bad = 0
    for pt in points:
        s = signature_at(spec, pt)
        if s != (n_neg, 0, spec.dim - n_neg):
            bad += 1
    return float(bad)


def _per_point(fn):
    def run(spec, points):
        worst = 0.0
        for pt in points:
            worst = max(worst, float(fn(spec, pt)))
        return worst

    return run


def _full(spec, pt, derivs=False):
    return cn.full_connection_at(spec, pt, derivs=derivs)


def _metric_compat(spec, pt):
    return np.max(np.abs(cn.nabla_metric(_full(spec, pt))))


def _torsion_closed(spec, pt):
    cv = _full(spec, pt)
    T = cn.torsion_lowered(cv)
    return np.max(np.abs(T - cn.torsion_closed_form(cv.metric.g, cv.xi, cv.S)))


def _nabla_xi(spec, pt):
    return np.max(np.abs(cn.nabla_xi(_full(spec, pt))))


def _nabla_S(spec, pt):
    return np.max(np.abs(cn.nabla_S(_full(spec, pt))))


def _nabla_T(spec, pt):
    return np.max(np.abs(cn.nabla_torsion(_full(spec, pt, derivs=True))))


def _bianchi_components(spec, points):
    return bianchi_residual(spec, points).residual


def _bianchi_general(spec, points):
    return bianchi_residual(spec, points).general_residual


def _bianchi_skew(spec, points):
    return bianchi_residual(spec.with_(xi=None), points).residual


def _twistor_free(spec, pt):
    cv = _full(spec, pt)
    dec = decompose_torsion(cn.torsion_lowered(cv), cv.metric.g)
    return np.max(np.abs(dec.twist))


def _p_data(spec, pt):
    """``p``, ``nabla^g p`` (axes m, k), metric and S at a point."""
    p_exprs = _vector_exprs(spec, _field(spec, "p"))
    cv = cn.christoffels_at(spec, pt)
    p, dp, _ = ex.jets_of(p_exprs, pt, spec.params, order=1)
    Dp = cn.nabla_vector(p, dp, cv.gamma)
    S, _, _ = ex.jets_of(spec.S_exprs(), pt, spec.params, order=0)
    return p, Dp, cv.metric, S


def _kundt_condition(spec, pt):
    """``nabla^g_X p + g(X, p) p + S(X, p)/2`` with ``S(X, p)`` raised."""
    p, Dp, mv, S = _p_data(spec, pt)
    gp = mv.g @ p
    Sxp = np.einsum("mjl,j,lk->mk", S, p, mv.g_inv)
    return np.max(np.abs(Dp + np.outer(gp, p) + 0.5 * Sxp))


def _screen(spec, pt):
    p, Dp, mv, _ = _p_data(spec, pt)
    fr = witt_frame(mv.g, p)
    E = fr.e  # rows
    # B(X, Y) = g(nabla_X p, Y)
    B = Dp @ mv.g
    return p, B, E


def _kundt_geodesic(spec, pt):
    p, B, E = _screen(spec, pt)
    return np.max(np.abs(E @ (p @ B))) if len(E) else 0.0


def _screen_matrix(spec, pt):
    _, B, E = _screen(spec, pt)
    return E @ B @ E.T


def _kundt_expansion(spec, pt):
    M = _screen_matrix(spec, pt)
    return abs(np.trace(M)) if M.size else 0.0


def _kundt_shear(spec, pt):
    M = _screen_matrix(spec, pt)
    if not M.size:
        return 0.0
    sym = 0.5 * (M + M.T)
    return np.max(np.abs(sym - np.trace(M) / M.shape[0] * np.eye(M.shape[0])))


def _kundt_twist(spec, pt):
    M = _screen_matrix(spec, pt)
    return np.max(np.abs(0.5 * (M - M.T))) if M.size else 0.0


def _lc_parallel_p0(spec, points):
    return lc_parallel_vector(spec, _field(spec, "p0"), points)


def _p0_flat_exact(spec, points):
    return flat_is_exact(spec, _field(spec, "p0"), _field(spec, "phi"), points)


def _lc_parallel_tau0(spec, points):
    return lc_parallel_form(spec, three_form_exprs(_field(spec, "tau0"), spec.dim), points)


def _S_norm(spec, pt):
    g, _, _ = ex.jets_of(spec.metric_exprs(), pt, spec.params, order=0)
    S, _, _ = ex.jets_of(spec.S_exprs(), pt, spec.params, order=0)
    return torsion_norm(S, g)


def _S_norm_zero(spec, points):
    return max((abs(_S_norm(spec, pt)) for pt in points), default=0.0)


def _S_norm_nonzero(spec, points):
    return min((abs(_S_norm(spec, pt)) for pt in points), default=0.0)


def _nabla_R(spec, points):
    return max(
        (float(np.max(np.abs(cn.fd_nabla_curvature(spec, pt)))) for pt in points), default=0.0
    )


def _identity(attr):
    def run(spec, points):
        return getattr(identity_suite(spec, points), attr)

    return run


def _sigma_zero(spec, pt):
    g, _, _ = ex.jets_of(spec.metric_exprs(), pt, spec.params, order=0)
    S, _, _ = ex.jets_of(spec.S_exprs(), pt, spec.params, order=0)
    return np.max(np.abs(sigma_tau(S, g)))


def _lemma1_uniform(spec, points):
    return 0.0 if lemma1_check(spec, points).uniform else 1.0


def _lemma1_parallel(spec, points):
    r = lemma1_check(spec, points)
    return max(r.nabla_tau, r.d_tau, r.sigma, r.nabla_g_tau)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class CheckDef:
    check_id: str
    description: str
    anchor: str
    tolerance: float
    func: Callable[[MetricSpec, np.ndarray], float]
    lower: bool = False
    margin: float = 0.0

    def passes(self, value: float, tol: float | None = None) -> bool:
        tol = self.tolerance if tol is None else tol
        if not np.isfinite(value):
            return False
        return value > tol if self.lower else value <= tol


_DEFS = [
    CheckDef("signature", "number of sampled points where g is not of the declared signature",
             "exactly one negative eigenvalue", 0.0, _signature),
    CheckDef("metric_compatibility", "max |nabla g| for the full connection",
             "X ∧ ξ + ½ S(X)", 1e-10, _per_point(_metric_compat)),
    CheckDef("torsion_closed_form", "coefficient torsion minus (X^Y)xi + S(X,Y)",
             "T(X,Y) = (X ∧ Y)ξ + S(X,Y)", 1e-12, _per_point(_torsion_closed)),
    CheckDef("nabla_xi", "max |nabla xi|", "∇ξ=0", 1e-9, _per_point(_nabla_xi)),
    CheckDef("nabla_S", "max |nabla S|", "∇S=0", 1e-9, _per_point(_nabla_S)),
    CheckDef("nabla_T", "max |nabla T|", "∇T=0", 1e-9, _per_point(_nabla_T)),
    CheckDef("bianchi_components", "first Bianchi residual, component right-hand side",
             "S(S(X,Y),Z)", 1e-7, _bianchi_components),
    CheckDef("bianchi_general", "first Bianchi residual including the nabla T term",
             "cyclic sum with respect to", 1e-7, _bianchi_general),
    CheckDef("bianchi_skew", "first Bianchi residual for nabla^g + S/2 against sigma",
             "𝔖R(X,Y)Z=σ_τ(X,Y,Z)", 1e-7, _bianchi_skew),
    CheckDef("twistor_free", "max |twistorial part| of the realized torsion",
             "vectorial, twistorial, and skew-symmetric", 1e-10, _per_point(_twistor_free)),
    CheckDef("kundt_condition", "nabla^g_X p + g(X,p) p + S(X,p)/2",
             "∇^g_Xp=-g(X,p)p-½S(X,p)", 1e-9, _per_point(_kundt_condition)),
    CheckDef("kundt_geodesic", "screen part of nabla^g_p p",
             "geodesic, expansion-free, shear-free and twist-free", 1e-9, _per_point(_kundt_geodesic)),
    CheckDef("kundt_expansion", "trace of the screen matrix g(nabla^g_{e_i} p, e_j)",
             "geodesic, expansion-free, shear-free and twist-free", 1e-9, _per_point(_kundt_expansion)),
    CheckDef("kundt_shear", "trace-free symmetric part of the screen matrix",
             "geodesic, expansion-free, shear-free and twist-free", 1e-9, _per_point(_kundt_shear)),
    CheckDef("kundt_twist", "antisymmetric part of the screen matrix",
             "geodesic, expansion-free, shear-free and twist-free", 1e-9, _per_point(_kundt_twist)),
    CheckDef("lc_parallel_p0", "max |nabla^g p0|", "∇^{g₀}p₀ = 0", 1e-9, _lc_parallel_p0),
    CheckDef("p0_flat_exact", "max |p0^flat - d(e^phi)|", "p₀♭ = d(e^φ)", 1e-9, _p0_flat_exact),
    CheckDef("lc_parallel_tau0", "max |nabla^g tau0|", "∇^{g₀}τ₀ = 0", 1e-9, _lc_parallel_tau0),
    CheckDef("S_norm_zero", "max |‖S‖²|", "degenerate if ||S||_g=0", 1e-10, _S_norm_zero),
    CheckDef("S_norm_nonzero", "min |‖S‖²| (must exceed the tolerance)",
             "degenerate if ||S||_g=0", 1e-6, _S_norm_nonzero, lower=True),
    CheckDef("nabla_R_small", "finite-difference max |nabla R| for the full connection",
             "if and only if ∇R=0", 1e-5, _nabla_R, margin=1e-3),
    CheckDef("nabla_R_nonzero", "finite-difference max |nabla R| (must exceed the tolerance)",
             "if and only if ∇R=0", 1e-2, _nabla_R, lower=True, margin=1e-3),
    CheckDef("identity_dT1", "dtau identity residual for nabla^g + tau/2",
             "2σ_τ(X,Y,Z,V)", 1e-7, _identity("dT1")),
    CheckDef("identity_dT2", "nabla tau = nabla^g tau - sigma/2 residual",
             "∇τ=∇^g τ−½σ_τ", 1e-7, _identity("dT2")),
    CheckDef("identity_action", "(tau(X).tau) + sigma residual",
             "(τ(X)·τ)(Y,Z,V)=−σ_τ(X,Y,Z,V)", 1e-10, _identity("action")),
    CheckDef("sigma_zero", "max |sigma_S|", "τ(τ(X,Y),Z)", 1e-10, _per_point(_sigma_zero)),
    CheckDef("lemma1_uniform", "1 if the three parallelism conditions disagree, else 0",
             "the following conditions are equivalent", 0.0, _lemma1_uniform),
    CheckDef("lemma1_parallel", "max of |nabla tau|, |d tau|, |sigma|, |nabla^g tau|",
             "the following conditions are equivalent", 1e-8, _lemma1_parallel),
]

REGISTRY = {d.check_id: d for d in _DEFS}


def get_check(check_id: str) -> CheckDef:
    try:
        return REGISTRY[check_id]
    except KeyError:
        raise PreconditionError(f"unknown check {check_id!r}") from None


def default_suite(spec: MetricSpec) -> tuple:
    """Checks run for a spec without a manifest; all hold unconditionally."""
    ids = ["signature", "metric_compatibility", "torsion_closed_form", "bianchi_general"]
    if not spec.has_torsion:
        ids.append("bianchi_components")
    if spec.S:
        ids += ["identity_dT1", "identity_dT2", "identity_action"]
    return tuple(ids)


def manifest_of(spec: MetricSpec) -> tuple:
    return tuple(spec.manifest) if spec.manifest else default_suite(spec)
