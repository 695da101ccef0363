"""Constructors for the explicit metrics and connections, with check manifests.

Every constructor returns a :class:`~geoverify.geometry.MetricSpec` whose
``manifest`` lists the residual checks (see :mod:`geoverify.checks`) that
must pass for the construction, and whose ``fields`` carry the auxiliary
vector fields, functions and forms those checks need.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.linalg

from . import connection as cn
from . import expr as ex
from .errors import PreconditionError, SpecError
from .geometry import MetricSpec, perm_sign, signature_at
from .torsion import sigma_tau

PRECONDITION_TOL = 1e-8
_N_PRECHECK = 12

BASE_MANIFEST = ("signature", "metric_compatibility", "torsion_closed_form")
TORSION_MANIFEST = BASE_MANIFEST + (
    "nabla_xi", "nabla_S", "nabla_T", "bianchi_components", "bianchi_general", "twistor_free",
)


def _num(x: float) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        s = str(int(x))
    else:
        s = repr(x)
    return f"({s})" if x < 0 else s


def _p(e) -> str:
    return e.to_string() if isinstance(e, ex.Expr) else str(e)


def _times(factor: str, e) -> str:
    return f"{factor}*({_p(e)})"


def build_spec(
    name, coords, params, metric, xi=None, S=None, domain=None,
    manifest=None, fields=None, meta=None,
) -> MetricSpec:
    """Assemble a spec from expression strings (or Exprs, which are re-parsed)."""
    coords = tuple(coords)
    params = dict(params or {})
    P = lambda s: ex.parse(_p(s), coords, list(params))  # noqa: E731
    m = {}
    for (i, j), s in metric.items():
        i, j = min(i, j), max(i, j)
        e = P(s)
        if not e.is_zero_literal():
            m[(i, j)] = e
    xi_e = None if xi is None else tuple(P(s) for s in xi)
    S_e = None
    if S:
        S_e = {}
        for key, s in S.items():
            key, sign = _sort3(key)
            e = P(s if sign > 0 else f"-({_p(s)})")
            if not e.is_zero_literal():
                S_e[key] = e
        S_e = S_e or None
    f = {}
    for k, v in (fields or {}).items():
        if isinstance(v, dict):
            f[k] = {_sort3(key)[0]: P(s if _sort3(key)[1] > 0 else f"-({_p(s)})") for key, s in v.items()}
        elif isinstance(v, (list, tuple)):
            f[k] = tuple(P(s) for s in v)
        else:
            f[k] = P(v)
    return MetricSpec(
        name=name, coords=coords, params=params, metric=m, xi=xi_e, S=S_e,
        domain=tuple(tuple(map(float, d)) for d in domain),
        manifest=None if manifest is None else tuple(manifest),
        fields=f, meta=dict(meta or {}),
    )


def _sort3(key):
    key = tuple(int(k) for k in key)
    if len(set(key)) != 3:
        raise SpecError(f"3-form entry {key} has repeated indices")
    order = sorted(range(3), key=lambda r: key[r])
    from .geometry import perm_sign

    return tuple(key[r] for r in order), perm_sign(order)


def _sample(spec: MetricSpec, n: int = _N_PRECHECK, seed: int = 0):
    return spec.sample_points(n, np.random.default_rng(seed))


def _expect_signature(spec: MetricSpec, n_neg: int, what: str):
    for pt in _sample(spec):
        s = signature_at(spec, pt)
        if s[0] != n_neg or s[1] != 0:
            raise PreconditionError(f"{what} has signature {s}, expected {n_neg} negative direction(s)")


def three_form_entries(spec: MetricSpec, form) -> np.ndarray:
    from .geometry import three_form_exprs

    return three_form_exprs({k: spec.parse(_p(v)) if not isinstance(v, ex.Expr) else v
                             for k, v in form.items()}, spec.dim)


def check_parallel_sigma_free(spec: MetricSpec, form, what: str):
    """Require a LC-parallel 3-form with vanishing sigma on ``spec``'s chart."""
    exprs = three_form_entries(spec, form)
    for pt in _sample(spec):
        cv = cn.christoffels_at(spec, pt)
        tau, dtau, _ = ex.jets_of(exprs, pt, spec.params, order=1)
        if np.max(np.abs(cn.nabla_covariant(tau, dtau, cv.gamma))) > PRECONDITION_TOL:
            raise PreconditionError(f"{what} is not parallel for the Levi-Civita connection")
        if np.max(np.abs(sigma_tau(tau, cv.metric.g))) > PRECONDITION_TOL:
            raise PreconditionError(f"{what} has non-vanishing sigma")


# ---------------------------------------------------------------------------
# basic charts


def _default_names(k: int, avoid=()):
    base = ["x", "y", "z", "w"]
    names = base[:k] if k <= 4 else [f"x{i + 1}" for i in range(k)]
    if set(names) & set(avoid):
        names = [f"y{i + 1}" for i in range(k)]
    return names


def flat(n: int, n_neg: int = 0, coords=None, box: float = 1.0, name=None) -> MetricSpec:
    """Flat metric ``diag(-1 x n_neg, +1 ...)`` on a box."""
    coords = list(coords or _default_names(n))
    metric = {(i, i): ("-1" if i < n_neg else "1") for i in range(n)}
    return build_spec(
        name or (f"minkowski{n}" if n_neg == 1 else f"euclidean{n}"),
        coords, {}, metric, domain=[(-box, box)] * n,
        manifest=BASE_MANIFEST,
        meta={"signature": "lorentzian" if n_neg == 1 else ("riemannian" if n_neg == 0 else "other"),
              "construction": "flat chart"},
    )


def minkowski(n: int = 4) -> MetricSpec:
    return flat(n, 1, coords=["t"] + _default_names(n - 1, avoid=["t"]), name=f"minkowski{n}")


def volume_form(spec: MetricSpec, c: float = 1.0) -> dict:
    """``c sqrt|det g| dx^0^..^dx^{d-1}`` for a 3-dimensional chart (flat entries only)."""
    if spec.dim != 3:
        raise PreconditionError("volume 3-form requires a 3-dimensional chart")
    return {(0, 1, 2): _num(c)}


# ---------------------------------------------------------------------------
# non-isotropic vectorial torsion: warped products


def warped_product(eps: int, base: MetricSpec, tau_N: Mapping | None = None,
                   t_range=(-0.5, 0.5), t_name: str = "t", name: str | None = None) -> MetricSpec:
    """``eps dt^2 + e^{2 eps t} g_N`` with ``xi = d_t`` and ``S = e^{3 eps t} tau_N``."""
    if eps not in (1, -1):
        raise PreconditionError("eps must be +1 or -1")
    if t_name in base.coords:
        raise PreconditionError(f"base chart already uses the name {t_name!r}")
    _expect_signature(base, 0 if eps == -1 else 1, "base metric")
    tau_N = dict(tau_N or {})
    if tau_N:
        check_parallel_sigma_free(base, tau_N, "tau_N")
    d = base.dim + 1
    coords = (t_name,) + base.coords
    metric = {(0, 0): str(eps)}
    warp = f"exp({2 * eps}*{t_name})"
    for (i, j), e in base.metric.items():
        metric[(i + 1, j + 1)] = _times(warp, e)
    xi = ["1"] + ["0"] * base.dim
    S = {}
    for key, e in tau_N.items():
        key = tuple(k + 1 for k in key)
        S[key] = _times(f"exp({3 * eps}*{t_name})", e)
    manifest = TORSION_MANIFEST + (("S_norm_nonzero",) if tau_N else ())
    return build_spec(
        name or ("warped_riemannian" if eps == -1 else "warped_lorentzian"),
        coords, base.params, metric, xi, S or None,
        domain=[t_range] + list(base.domain),
        manifest=manifest,
        fields={"s": f"{eps}*{t_name}"},
        meta={"signature": "lorentzian", "eps": eps, "dim": d,
              "construction": "warped product eps dt^2 + e^{2 eps t} g_N, xi = d_t, S = e^{3 eps t} tau_N"},
    )


def de_sitter(n: int = 2, box: float = 1.0) -> MetricSpec:
    """Flat slicing ``-dt^2 + e^{-2t} sum (dy^i)^2`` of de Sitter space, ``xi = d_t``."""
    base = flat(n + 1, 0, coords=[f"y{i + 1}" for i in range(n + 1)], box=box)
    return warped_product(-1, base, None, name="de_sitter")


# ---------------------------------------------------------------------------
# isotropic vectorial torsion


def kundt3(a: float = 1.0, C: str = "0", box: float = 1.0) -> MetricSpec:
    """3-dimensional Kundt metric with ``p = e^{-ax} d_v`` and ``S = a Vol``.

    In the coordinate orientation ``(v, x, u)`` (where ``sqrt|det g| = 1``)
    the parallel-torsion conditions hold for ``S_vxu = -a``; the spec meta
    records ``vol_sign = -1``.
    """
    a = float(a)
    if a == 0.0:
        raise PreconditionError("kundt3 requires a != 0")
    coords = ("v", "x", "u")
    Ce = ex.parse(_p(C), coords, ["a"])
    if 0 in Ce.coord_indices():
        raise PreconditionError("C must be a function of (x, u) only")
    metric = {
        (0, 2): "1",
        (1, 1): "1",
        (1, 2): "a*v",
        (2, 2): f"-2*v*exp(-a*x) + ({Ce.to_string()})",
    }
    p = ["exp(-a*x)", "0", "0"]
    return build_spec(
        "kundt3", coords, {"a": a}, metric, p, {(0, 1, 2): "-a"},
        domain=[(-box, box)] * 3,
        manifest=TORSION_MANIFEST + (
            "kundt_condition", "kundt_geodesic", "kundt_expansion", "kundt_shear", "kundt_twist",
            "S_norm_nonzero",
        ),
        fields={"p": p},
        meta={"signature": "lorentzian", "vol_sign": -1, "C": Ce.to_string(),
              "construction": "Kundt metric 2dvdu + 2av dxdu + dx^2 + (-2v e^{-ax} + C) du^2"},
    )


def _expm_strings(F: np.ndarray, var: str) -> list:
    """Entries of ``exp(-var F)`` for antisymmetric ``F`` as expression strings."""
    n = F.shape[0]
    T, Z = scipy.linalg.schur(F, output="real")
    const = np.zeros((n, n))
    terms = [[[] for _ in range(n)] for _ in range(n)]
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    r = 0
    while r < n:
        if r + 1 < n and abs(T[r + 1, r]) > 1e-12:
            b = T[r, r + 1]
            Zk = Z[:, r:r + 2]
            C = Zk @ Zk.T
            D = -Zk @ J @ Zk.T
            for i in range(n):
                for j in range(n):
                    if abs(C[i, j]) > 1e-14:
                        terms[i][j].append(f"{_num(C[i, j])}*cos({_num(b)}*{var})")
                    if abs(D[i, j]) > 1e-14:
                        terms[i][j].append(f"{_num(D[i, j])}*sin({_num(b)}*{var})")
            r += 2
        else:
            z = Z[:, r]
            const += np.outer(z, z)
            r += 1
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            parts = list(terms[i][j])
            if abs(const[i, j]) > 1e-14:
                parts.insert(0, _num(const[i, j]))
            row.append(" + ".join(parts) if parts else "0")
        out.append(row)
    return out


def homogeneous_wave_profile(F, A, xs, var: str = "u") -> str:
    """``A(e^{-uF} x, e^{-uF} x)`` as an expression string."""
    F = np.asarray(F, float)
    A = np.asarray(A, float)
    M = _expm_strings(F, var)
    n = F.shape[0]
    ys = []
    for c in range(n):
        parts = [f"({M[c][a]})*{xs[a]}" for a in range(n) if M[c][a] != "0"]
        ys.append(" + ".join(parts) if parts else "0")
    terms = []
    for c in range(n):
        for d in range(n):
            if A[c, d] != 0.0:
                terms.append(f"{_num(A[c, d])}*({ys[c]})*({ys[d]})")
    return " + ".join(terms) if terms else "0"


def _default_F(n: int, f: float) -> np.ndarray:
    F = np.zeros((n, n))
    for k in range(0, n - 1, 2):
        F[k, k + 1] = f
        F[k + 1, k] = -f
    return F


def plane_wave(n: int = 2, F=None, mode: str = "homogeneous", A=None, H: str | None = None,
               f: float = 1.0, box: float = 1.0, name: str | None = None) -> MetricSpec:
    """``2dvdu + sum (dx^i)^2 + (H + 2v) du^2`` with ``xi = -d_v``, ``S = du ^ F``.

    ``mode="homogeneous"`` uses ``H = A(R x, R x)`` with ``R = e^{-uF/2}``, the
    screen holonomy of ``nabla = nabla^g + X ^ xi + S(X)/2``; with the full
    ``e^{-uF}`` the curvature is not parallel for this normalization of S.
    ``mode="generic"`` takes ``H`` as an expression in ``x1..xn, u``.
    """
    n = int(n)
    if n < 2 or n % 2:
        raise PreconditionError("n must be a positive even integer")
    F = _default_F(n, f) if F is None else np.asarray(F, float)
    if F.shape != (n, n) or np.max(np.abs(F + F.T)) > 1e-14:
        raise PreconditionError("F must be an antisymmetric n x n matrix")
    xs = [f"x{i + 1}" for i in range(n)]
    coords = ["v"] + xs + ["u"]
    iu = n + 1
    if mode == "homogeneous":
        A = np.diag(np.arange(1.0, n + 1)) if A is None else np.asarray(A, float)
        if A.shape != (n, n) or np.max(np.abs(A - A.T)) > 1e-14:
            raise PreconditionError("A must be a symmetric n x n matrix")
        # the screen part of the connection rotates by S(d_u)/2 = F/2, so the
        # u-dependence of a homogeneous profile follows e^{-uF/2}
        Hs = homogeneous_wave_profile(0.5 * F, A, xs)
    elif mode == "generic":
        Hs = _p(H if H is not None else "x1^4")
    else:
        raise PreconditionError("mode must be 'homogeneous' or 'generic'")
    He = ex.parse(Hs, coords, [])
    if 0 in He.coord_indices():
        raise PreconditionError("H must not depend on v")
    metric = {(0, iu): "1", (iu, iu): f"({He.to_string()}) + 2*v"}
    for i in range(n):
        metric[(i + 1, i + 1)] = "1"
    S = {}
    tau0 = {}
    for i in range(n):
        for j in range(i + 1, n):
            if F[i, j] != 0.0:
                S[(i + 1, j + 1, iu)] = _num(F[i, j])
                tau0[(i + 1, j + 1, iu)] = f"{_num(F[i, j])}*exp(-u)"
    xi = ["-1"] + ["0"] * (n + 1)
    p0 = ["-exp(-u)"] + ["0"] * (n + 1)
    manifest = TORSION_MANIFEST + ("lc_parallel_p0", "p0_flat_exact", "S_norm_zero")
    if tau0:
        manifest += ("lc_parallel_tau0",)
    manifest += ("nabla_R_small",) if mode == "homogeneous" else ("nabla_R_nonzero",)
    return build_spec(
        name or ("plane_wave" if mode == "homogeneous" else "plane_wave_generic"),
        coords, {}, metric, xi, S or None,
        domain=[(-box, box)] * (n + 2),
        manifest=manifest,
        fields={"p0": p0, "phi": "-u", "tau0": tau0, "p": xi} if tau0 else {"p0": p0, "phi": "-u", "p": xi},
        meta={"signature": "lorentzian", "mode": mode, "F": F.tolist(),
              "A": None if mode != "homogeneous" else np.asarray(A).tolist(),
              "construction": "plane wave 2dvdu + sum dx^2 + (H + 2v) du^2, xi = -d_v, S = du ^ F"},
    )


def walker(base: MetricSpec | None = None, H: str = "0", u_range=(0.5, 2.0),
           v_range=(-1.0, 1.0), name: str = "walker") -> MetricSpec:
    """Walker metric ``2dvdu + b + H du^2`` with ``p0 = d_v`` and ``phi = ln u``."""
    if base is None:
        base = flat(2, 0, coords=["x", "y"])
    lo, hi = map(float, u_range)
    if lo <= 0.0:
        raise PreconditionError("the u-interval must lie in (0, inf)")
    if "v" in base.coords or "u" in base.coords:
        raise PreconditionError("base chart must not use the names 'v' or 'u'")
    _expect_signature(base, 0, "base metric")
    k = base.dim
    coords = ("v",) + base.coords + ("u",)
    iu = k + 1
    metric = {(0, iu): "1"}
    for (i, j), e in base.metric.items():
        metric[(i + 1, j + 1)] = _p(e)
    He = ex.parse(_p(H), coords, list(base.params))
    if 0 in He.coord_indices():
        raise PreconditionError("H must not depend on v")
    if not He.is_zero_literal():
        metric[(iu, iu)] = He.to_string()
    p0 = ["1"] + ["0"] * (k + 1)
    return build_spec(
        name, coords, base.params, metric, None, None,
        domain=[v_range] + list(base.domain) + [(lo, hi)],
        manifest=BASE_MANIFEST + ("lc_parallel_p0", "p0_flat_exact"),
        fields={"p0": p0, "phi": "log(u)"},
        meta={"signature": "lorentzian", "construction": "Walker metric 2dvdu + b + H du^2, p0 = d_v, phi = ln u"},
    )


def _flat_of(spec: MetricSpec, p0_exprs) -> list:
    """Lowered ``p0`` as expression strings."""
    gm = spec.metric_exprs()
    out = []
    for i in range(spec.dim):
        parts = []
        for j in range(spec.dim):
            if gm[i, j] is not None and p0_exprs[j] is not None and not p0_exprs[j].is_zero_literal():
                parts.append(f"({gm[i, j].to_string()})*({p0_exprs[j].to_string()})")
        out.append(" + ".join(parts) if parts else None)
    return out


def wedge_one_two(one: list, two: Mapping, dim: int) -> dict:
    """``alpha ^ omega`` for a 1-form (strings / None) and a 2-form ``{(i<j): str}``."""
    def w(i, j):
        if i == j:
            return None
        if (i, j) in two:
            return _p(two[(i, j)])
        if (j, i) in two:
            return f"-({_p(two[(j, i)])})"
        return None

    out = {}
    for a, b, c in itertools.combinations(range(dim), 3):
        parts = []
        for (x, y, z, sgn) in ((a, b, c, "+"), (b, a, c, "-"), (c, a, b, "+")):
            if one[x] is not None and w(y, z) is not None:
                parts.append(f"{sgn}({one[x]})*({w(y, z)})")
        if parts:
            s = " ".join(parts)
            out[(a, b, c)] = s[1:] if s.startswith("+") else s
    return out


def _isotropic_data(m0: MetricSpec, omega: Mapping | None):
    if "p0" not in m0.fields or "phi" not in m0.fields:
        raise PreconditionError("m0 must carry fields 'p0' and 'phi'")
    p0 = tuple(m0.fields["p0"])
    phi = m0.fields["phi"]
    tau0 = wedge_one_two(_flat_of(m0, p0), dict(omega or {}), m0.dim)
    return p0, phi, tau0


def _check_isotropic_preconditions(m0: MetricSpec, p0, phi, tau0):
    from . import checks

    pts = _sample(m0)
    r = checks.lc_parallel_vector(m0, p0, pts)
    if r > PRECONDITION_TOL:
        raise PreconditionError(f"p0 is not Levi-Civita parallel (residual {r:.2e})")
    r = checks.flat_is_exact(m0, p0, phi, pts)
    if r > PRECONDITION_TOL:
        raise PreconditionError(f"p0^flat != d(e^phi) (residual {r:.2e})")
    if tau0:
        exprs = three_form_entries(m0, tau0)
        r = checks.lc_parallel_form(m0, exprs, pts)
        if r > PRECONDITION_TOL:
            raise PreconditionError(f"tau0 is not Levi-Civita parallel (residual {r:.2e})")


def deg_isotropic(m0: MetricSpec, omega: Mapping | None = None, name: str = "deg_isotropic") -> MetricSpec:
    """``xi = e^{-phi} p0`` and ``S = e^{-phi} p0^flat ^ omega`` on ``m0``."""
    p0, phi, tau0 = _isotropic_data(m0, omega)
    _check_isotropic_preconditions(m0, p0, phi, tau0)
    f = f"exp(-({phi.to_string()}))"
    xi = [_times(f, e) if not e.is_zero_literal() else "0" for e in p0]
    S = {k: _times(f, s) for k, s in tau0.items()}
    metric = {k: e.to_string() for k, e in m0.metric.items()}
    manifest = TORSION_MANIFEST + ("lc_parallel_p0", "p0_flat_exact", "S_norm_zero")
    fields = {"p0": [e.to_string() for e in p0], "phi": phi.to_string(), "p": xi}
    if tau0:
        manifest += ("lc_parallel_tau0",)
        fields["tau0"] = tau0
    return build_spec(
        name, m0.coords, m0.params, metric, xi, S or None,
        domain=list(m0.domain), manifest=manifest, fields=fields,
        meta={"signature": "lorentzian", "base": m0.name,
              "construction": "xi = e^{-phi} p0, S = e^{-phi} tau0 with tau0 = p0^flat ^ omega"},
    )


def nondeg_isotropic_product(m0: MetricSpec, n_riem: MetricSpec, tau_N: Mapping,
                             omega: Mapping | None = None, name: str = "nondeg_isotropic") -> MetricSpec:
    """``g0 + e^{2 phi} g_N`` with ``xi = e^{-phi} p0``, ``S = e^{-phi} tau0 + e^{3 phi} tau_N``."""
    tau_N = {k: v for k, v in dict(tau_N or {}).items()}
    if not tau_N or all(ex.parse(_p(v), n_riem.coords, list(n_riem.params)).is_zero_literal()
                        for v in tau_N.values()):
        raise PreconditionError("tau_N must be non-zero (use deg_isotropic otherwise)")
    if set(m0.coords) & set(n_riem.coords):
        raise PreconditionError("m0 and N charts must use distinct coordinate names")
    _expect_signature(n_riem, 0, "N metric")
    check_parallel_sigma_free(n_riem, tau_N, "tau_N")
    p0, phi, tau0 = _isotropic_data(m0, omega)
    _check_isotropic_preconditions(m0, p0, phi, tau0)
    k = m0.dim
    coords = m0.coords + n_riem.coords
    phs = phi.to_string()
    metric = {key: e.to_string() for key, e in m0.metric.items()}
    for (i, j), e in n_riem.metric.items():
        metric[(i + k, j + k)] = _times(f"exp(2*({phs}))", e)
    f = f"exp(-({phs}))"
    xi = [_times(f, e) if not e.is_zero_literal() else "0" for e in p0] + ["0"] * n_riem.dim
    S = {key: _times(f, s) for key, s in tau0.items()}
    for key, s in tau_N.items():
        (a, b, c), sign = _sort3(key)
        s = _p(s) if sign > 0 else f"-({_p(s)})"
        S[(a + k, b + k, c + k)] = _times(f"exp(3*({phs}))", s)
    params = dict(m0.params)
    params.update(n_riem.params)
    fields = {"p0": [e.to_string() for e in p0] + ["0"] * n_riem.dim, "phi": phs, "p": xi}
    return build_spec(
        name, coords, params, metric, xi, S,
        domain=list(m0.domain) + list(n_riem.domain),
        manifest=TORSION_MANIFEST + ("lc_parallel_p0", "p0_flat_exact", "S_norm_nonzero"),
        fields=fields,
        meta={"signature": "lorentzian", "base": m0.name,
              "construction": "g0 + e^{2 phi} g_N, xi = e^{-phi} p0, S = e^{-phi} tau0 + e^{3 phi} tau_N"},
    )


def witt_chart(u_range=(0.5, 2.0), v_range=(-1.0, 1.0)) -> MetricSpec:
    """Minimal 2-dimensional chart ``2 dv du`` with ``p0 = d_v``, ``phi = ln u``."""
    lo, _ = u_range
    if lo <= 0:
        raise PreconditionError("the u-interval must lie in (0, inf)")
    return build_spec(
        "witt2", ("v", "u"), {}, {(0, 1): "1"}, domain=[v_range, u_range],
        manifest=BASE_MANIFEST + ("lc_parallel_p0", "p0_flat_exact"),
        fields={"p0": ["1", "0"], "phi": "log(u)"},
        meta={"signature": "lorentzian", "construction": "2 dv du"},
    )


# ---------------------------------------------------------------------------
# skew torsion (closed parallel 3-forms with vanishing sigma)


SKEW_MANIFEST = BASE_MANIFEST + (
    "nabla_S", "sigma_zero", "lemma1_parallel", "lemma1_uniform",
    "identity_dT1", "identity_dT2", "identity_action", "bianchi_skew",
)


def skew_pp_wave(H: str = "x^2*sin(u) + x*y", box: float = 1.0) -> MetricSpec:
    """pp-wave ``2dvdu + dx^2 + dy^2 + H du^2`` with ``tau = du ^ dx ^ dy``."""
    coords = ("v", "x", "y", "u")
    metric = {(0, 3): "1", (1, 1): "1", (2, 2): "1", (3, 3): _p(H)}
    return build_spec(
        "skew_pp_wave", coords, {}, metric, None, {(1, 2, 3): "1"},
        domain=[(-box, box)] * 4, manifest=SKEW_MANIFEST,
        fields={"p0": ["1", "0", "0", "0"]},
        meta={"signature": "lorentzian",
              "construction": "tau = p0^flat ^ omega with omega = dx ^ dy on the screen"},
    )


def skew_lorentz3(c: float = 1.0, box: float = 0.5) -> MetricSpec:
    """``-dt^2 + e^{2t}(dx^2 + dy^2)`` with ``tau = c Vol``."""
    coords = ("t", "x", "y")
    metric = {(0, 0): "-1", (1, 1): "exp(2*t)", (2, 2): "exp(2*t)"}
    return build_spec(
        "skew_lorentz3", coords, {"c": float(c)}, metric, None, {(0, 1, 2): "c*exp(2*t)"},
        domain=[(-box, box)] * 3, manifest=SKEW_MANIFEST,
        meta={"signature": "lorentzian", "construction": "tau = c Vol in dimension 3"},
    )


# ---------------------------------------------------------------------------
# Lie algebra point data


def lie_point_data(name: str):
    """``(structure constants, inner product, canonical 3-form)`` at a point.

    ``structure[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``;
    the 3-form is ``tau(X, Y, Z) = <[X, Y], Z>``.
    """
    if name == "su2":
        C = np.zeros((3, 3, 3))
        for (i, j, k) in itertools.permutations(range(3)):
            C[i, j, k] = perm_sign((i, j, k))
        B = np.eye(3)
    elif name in ("su2xsu2", "su2×su2", "su2+su2"):
        C1, B1, _ = lie_point_data("su2")
        C = np.zeros((6, 6, 6))
        C[:3, :3, :3] = C1
        C[3:, 3:, 3:] = C1
        B = np.eye(6)
    elif name.startswith("abelian"):
        try:
            n = int(name[len("abelian"):].strip("()"))
        except ValueError:
            raise PreconditionError(f"bad abelian algebra name {name!r}") from None
        C = np.zeros((n, n, n))
        B = np.eye(n)
    else:
        raise PreconditionError(f"unknown Lie algebra {name!r}")
    tau = np.einsum("ijm,mk->ijk", C, B)
    return C, B, tau


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    result: str
    description: str
    params: Mapping[str, tuple]  # name -> (type, default)
    factory: Callable[..., MetricSpec]

    def build(self, **overrides) -> MetricSpec:
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise PreconditionError(f"unknown parameter(s) for {self.name}: {sorted(unknown)}")
        kw = {k: d for k, (_, d) in self.params.items()}
        for k, v in overrides.items():
            typ = self.params[k][0]
            try:
                kw[k] = typ(v)
            except (TypeError, ValueError):
                raise PreconditionError(f"parameter {k!r} expects {typ.__name__}, got {v!r}") from None
        return self.factory(**kw)


def _walker_deg(omega12: float = 1.0, H: str = "0"):
    m0 = walker(H=H)
    return deg_isotropic(m0, {(1, 2): _num(omega12)}, name="deg_isotropic_walker")


def _pw_deg(n: int = 2, f: float = 1.0):
    pw = plane_wave(n=n, f=f)
    m0 = pw.with_(xi=None, S=None, manifest=None, name="plane_wave_metric")
    F = _default_F(n, f)
    omega = {(i + 1, j + 1): _num(-F[i, j]) for i in range(n) for j in range(i + 1, n) if F[i, j]}
    return deg_isotropic(m0, omega, name="deg_isotropic_plane_wave")


def _nondeg_walker(c: float = 1.0):
    m0 = walker(base=flat(1, 0, coords=["x"]), H="0")
    N = flat(3, 0, coords=["y1", "y2", "y3"])
    return nondeg_isotropic_product(m0, N, {(0, 1, 2): _num(c)}, name="nondeg_isotropic_walker")


def _nondeg_witt(c: float = 1.0):
    N = flat(3, 0, coords=["y1", "y2", "y3"])
    return nondeg_isotropic_product(witt_chart(), N, {(0, 1, 2): _num(c)}, name="nondeg_isotropic_witt")


def _warped(eps: int = -1, c: float = 1.0):
    if eps == -1:
        base = flat(3, 0, coords=["x", "y", "z"])
    else:
        base = flat(3, 1, coords=["s", "x", "y"])
    tau = {(0, 1, 2): _num(c)} if c else None
    return warped_product(eps, base, tau, name="warped_riemannian" if eps == -1 else "warped_lorentzian")


ENTRIES = {
    e.name: e
    for e in [
        CatalogEntry("minkowski", "flat baseline", "flat Minkowski space (no torsion)",
                     {"n": (int, 4)}, lambda n: minkowski(n)),
        CatalogEntry("de_sitter", "non-isotropic vectorial: de Sitter flat slicing",
                     "flat slicing -dt^2 + e^{-2t} sum dy^2 with vectorial torsion xi = d_t",
                     {"n": (int, 2)}, lambda n: de_sitter(n)),
        CatalogEntry("warped_riemannian", "non-isotropic vectorial: warped product, eps = -1",
                     "-dt^2 + e^{-2t} g_R3 with S = e^{-3t} c dx^dy^dz",
                     {"c": (float, 1.0)}, lambda c: _warped(-1, c)),
        CatalogEntry("warped_lorentzian", "non-isotropic vectorial: warped product, eps = +1",
                     "dt^2 + e^{2t} g_Minkowski3 with S = e^{3t} c Vol",
                     {"c": (float, 1.0)}, lambda c: _warped(1, c)),
        CatalogEntry("kundt3", "isotropic non-degenerate, dim 3: Kundt metric",
                     "3-dimensional Kundt metric with isotropic xi = p and S = a Vol",
                     {"a": (float, 1.0), "C": (str, "sin(x)*u")}, lambda a, C: kundt3(a, C)),
        CatalogEntry("plane_wave", "isotropic degenerate: singular homogeneous plane wave",
                     "singular homogeneous plane wave, H = A(e^{-uF/2}x, e^{-uF/2}x), A = diag(1..n)",
                     {"n": (int, 2), "f": (float, 1.0)}, lambda n, f: plane_wave(n=n, f=f)),
        CatalogEntry("plane_wave_generic", "isotropic degenerate: plane wave, generic profile",
                     "plane wave with a generic profile H (default x1^4)",
                     {"n": (int, 2), "f": (float, 1.0), "H": (str, "x1^4")},
                     lambda n, f, H: plane_wave(n=n, f=f, mode="generic", H=H)),
        CatalogEntry("walker", "isotropic degenerate: Walker chart with parallel p0",
                     "Walker metric 2dvdu + dx^2 + dy^2 + H du^2, u > 0",
                     {"H": (str, "x^2*u")}, lambda H: walker(H=H)),
        CatalogEntry("deg_isotropic_walker", "isotropic degenerate: xi = e^{-phi} p0, S = e^{-phi} tau0",
                     "degenerate isotropic construction on a Walker chart (phi = ln u)",
                     {"omega12": (float, 1.0), "H": (str, "0")}, _walker_deg),
        CatalogEntry("deg_isotropic_plane_wave", "isotropic degenerate: xi = e^{-phi} p0, S = e^{-phi} tau0",
                     "degenerate isotropic construction on the plane wave (phi = -u)",
                     {"n": (int, 2), "f": (float, 1.0)}, _pw_deg),
        CatalogEntry("nondeg_isotropic_walker", "isotropic non-degenerate: g0 + e^{2 phi} g_N",
                     "g0 + u^2 g_R3 over the Walker chart with base R^1",
                     {"c": (float, 1.0)}, _nondeg_walker),
        CatalogEntry("nondeg_isotropic_witt", "isotropic non-degenerate: g0 + e^{2 phi} g_N",
                     "g0 + u^2 g_R3 over the minimal chart 2dvdu",
                     {"c": (float, 1.0)}, _nondeg_witt),
        CatalogEntry("skew_pp_wave", "closed parallel skew torsion: p0 ^ omega",
                     "pp-wave with closed parallel skew torsion du^dx^dy",
                     {"H": (str, "x^2*sin(u) + x*y")}, lambda H: skew_pp_wave(H)),
        CatalogEntry("skew_lorentz3", "closed parallel skew torsion: dimension 3",
                     "3-dimensional Lorentzian metric with tau = c Vol",
                     {"c": (float, 1.0)}, lambda c: skew_lorentz3(c)),
    ]
}


def get_entry(name: str) -> CatalogEntry:
    try:
        return ENTRIES[name]
    except KeyError:
        raise PreconditionError(f"unknown catalog entry {name!r}") from None


def build(name: str, **params) -> MetricSpec:
    return get_entry(name).build(**params)
