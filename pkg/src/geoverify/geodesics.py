"""Levi-Civita geodesics, tracked scalars along them, and blow-up law fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import connection as cn
from . import expr as ex
from .errors import DegenerateMetricError, DomainError, ModelMismatchError, PreconditionError
from .geometry import MetricSpec

BLOWUP_SPEED = 1e8
MODELS = ("reciprocal", "exp_linear", "arctan", "log_ratio")


@dataclass
class GeodesicTrace:
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    status: str  # "completed", "left_domain" or "blow_up"
    t_last: float
    alpha: np.ndarray | None = None
    notes: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def halted(self) -> bool:
        return self.status != "completed"

    def rows(self):
        """JSON rows ``{t, x, v, alpha}``."""
        out = []
        for k, t in enumerate(self.times):
            row = {"t": float(t), "x": self.points[k].tolist(), "v": self.velocities[k].tolist()}
            if self.alpha is not None:
                row["alpha"] = float(self.alpha[k])
            out.append(row)
        return out


def acceleration(spec: MetricSpec, x, v) -> np.ndarray:
    """``-Gamma^k_ij v^i v^j`` (exact Christoffels)."""
    gamma = cn.christoffels_at(spec, x).gamma
    return -np.einsum("kij,i,j->k", gamma, v, v)


def integrate(spec: MetricSpec, x0, v0, t_max: float, step: float = 1e-3,
              halt_on_exit: bool = True) -> GeodesicTrace:
    """Fixed-step RK4 for the geodesic equation.

    A negative ``t_max`` integrates backwards.  The run stops when the
    point leaves the domain box, when the speed exceeds ``1e8`` or when the
    metric stops being evaluable (both flagged as blow-up).
    """
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    if x.shape != (spec.dim,) or v.shape != (spec.dim,):
        raise PreconditionError(f"initial point and velocity need {spec.dim} components")
    if not step > 0:
        raise PreconditionError("step must be positive")
    if not spec.in_domain(x):
        raise PreconditionError("initial point is outside the domain box")
    n_steps = int(round(abs(t_max) / step))
    h = math.copysign(step, t_max) if t_max else step
    acceleration(spec, x, v)  # a degenerate metric at x0 is an input error, raised here

    times = [0.0]
    xs = [x.copy()]
    vs = [v.copy()]
    status = "completed"

    def f(xx, vv):
        return vv, acceleration(spec, xx, vv)

    t = 0.0
    for k in range(n_steps):
        try:
            with np.errstate(over="raise", invalid="raise"):
                k1x, k1v = f(x, v)
                k2x, k2v = f(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
                k3x, k3v = f(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
                k4x, k4v = f(x + h * k3x, v + h * k3v)
                xn = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
                vn = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        except (DomainError, DegenerateMetricError, FloatingPointError):
            status = "blow_up"
            break
        if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(vn))) or np.max(np.abs(vn)) > BLOWUP_SPEED:
            status = "blow_up"
            break
        if halt_on_exit and not spec.in_domain(xn):
            status = "left_domain"
            break
        x, v = xn, vn
        t = (k + 1) * h
        times.append(t)
        xs.append(x.copy())
        vs.append(v.copy())
    return GeodesicTrace(np.array(times), np.array(xs), np.array(vs), status, t)


def _field_exprs(spec: MetricSpec, w) -> np.ndarray:
    if isinstance(w, str):
        w = spec.fields[w]
    out = np.full(spec.dim, None, dtype=object)
    for i, e in enumerate(w):
        if isinstance(e, (int, float)):
            e = ex.Num(float(e))
        elif isinstance(e, str):
            e = spec.parse(e)
        if e is not None and not e.is_zero_literal():
            out[i] = e
    return out


def track_alpha(trace: GeodesicTrace, w_field, spec: MetricSpec) -> np.ndarray:
    """``alpha(t_i) = g(gamma'(t_i), w(gamma(t_i)))``; stored on the trace too."""
    if len(trace) == 0:
        raise PreconditionError("empty trace")
    w_exprs = _field_exprs(spec, w_field)
    g_exprs = spec.metric_exprs()
    out = np.empty(len(trace))
    for k, (x, v) in enumerate(zip(trace.points, trace.velocities)):
        g, _, _ = ex.jets_of(g_exprs, x, spec.params, order=0)
        w, _, _ = ex.jets_of(w_exprs, x, spec.params, order=0)
        out[k] = v @ g @ w
    trace.alpha = out
    return out


def track_scalar(trace: GeodesicTrace, phi, spec: MetricSpec) -> np.ndarray:
    """``phi(gamma(t_i))`` for a scalar expression (or field name)."""
    if isinstance(phi, str):
        phi = spec.fields[phi] if phi in spec.fields else spec.parse(phi)
    out = np.array([ex.evaluate(phi, x, spec.params) for x in trace.points])
    trace.alpha = out
    return out


def speed_squared(trace: GeodesicTrace, spec: MetricSpec) -> np.ndarray:
    g_exprs = spec.metric_exprs()
    out = np.empty(len(trace))
    for k, (x, v) in enumerate(zip(trace.points, trace.velocities)):
        g, _, _ = ex.jets_of(g_exprs, x, spec.params, order=0)
        out[k] = v @ g @ v
    return out


def derivative_series(times, values) -> np.ndarray:
    """4th-order central differences inside, 2nd-order one-sided at the ends."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(y)
    if n < 5:
        raise PreconditionError("need at least 5 samples")
    h = t[1] - t[0]
    if h == 0 or np.max(np.abs(np.diff(t) - h)) > 1e-9 * abs(h) * n:
        raise PreconditionError("samples must be equally spaced")
    d = np.empty(n)
    d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
    d[1] = (y[2] - y[0]) / (2 * h)
    d[-2] = (y[-1] - y[-3]) / (2 * h)
    d[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h)
    d[-1] = (3 * y[-1] - 4 * y[-2] + y[-3]) / (2 * h)
    return d


def ode_residual(times, alpha, rhs: float = 0.0) -> float:
    """``max |alpha' + alpha^2 - rhs|`` for the Riccati model."""
    a = np.asarray(alpha, dtype=float)
    return float(np.max(np.abs(derivative_series(times, a) + a * a - rhs)))


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict
    residual: float  # deviation of the transformed series from the fitted line
    value_residual: float  # max |alpha - law(t)|
    t_singular: float


def _strictly_monotone(y) -> bool:
    dy = np.diff(y)
    return bool(np.all(dy > 0) or np.all(dy < 0))


def _direction(t) -> float:
    return 1.0 if t[-1] >= t[0] else -1.0


def fit_blowup(times, alpha, model: str, a: float | None = None) -> FitResult:
    """Fit one of the closed-form blow-up laws to a sampled series.

    * ``reciprocal``: ``alpha = 1/(t + c)``, singular at ``t = -c``;
    * ``exp_linear``: ``e^alpha = a t + c``, singular at ``t = -c/a``;
    * ``arctan``: ``arctan alpha = m t + c``, singular where the right side
      reaches ``+-pi/2`` (the root met first in the direction of the samples);
    * ``log_ratio``: ``ln|(alpha + a)/(alpha - a)| = 2a(t - c)``, singular at ``c``.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(alpha, dtype=float)
    if len(t) != len(y) or len(t) < 3:
        raise PreconditionError("need at least 3 matching samples")
    if not np.all(np.isfinite(y)):
        raise ModelMismatchError("series contains non-finite values")
    if model == "reciprocal":
        if not (np.all(y > 0) or np.all(y < 0)):
            raise ModelMismatchError("reciprocal law needs a series of one sign")
        if not np.all(np.diff(y) < 0):
            raise ModelMismatchError("reciprocal law needs a strictly decreasing series")
        z = 1.0 / y
        c = float(np.mean(z - t))
        res = float(np.max(np.abs(z - (t + c))))
        vres = float(np.max(np.abs(y - 1.0 / (t + c))))
        return FitResult(model, {"c": c}, res, vres, -c)
    if model == "exp_linear":
        if not _strictly_monotone(y):
            raise ModelMismatchError("exp-linear law needs a strictly monotone series")
        z = np.exp(y)
        slope, c = np.polyfit(t, z, 1)
        slope, c = float(slope), float(c)
        res = float(np.max(np.abs(z - (slope * t + c))))
        with np.errstate(invalid="ignore", divide="ignore"):
            vres = float(np.max(np.abs(y - np.log(slope * t + c))))
        return FitResult(model, {"a": slope, "c": c}, res, vres, -c / slope)
    if model == "arctan":
        if not _strictly_monotone(y):
            raise ModelMismatchError("arctan law needs a strictly monotone series")
        z = np.arctan(y)
        m, c = np.polyfit(t, z, 1)
        m, c = float(m), float(c)
        res = float(np.max(np.abs(z - (m * t + c))))
        vres = float(np.max(np.abs(y - np.tan(m * t + c))))
        d = _direction(t)
        roots = [(s * math.pi / 2 - c) / m for s in (1.0, -1.0)]
        ahead = [r for r in roots if (r - t[0]) * d > 0]
        t_sing = min(ahead, key=lambda r: abs(r - t[0])) if ahead else math.nan
        return FitResult(model, {"m": m, "c": c}, res, vres, t_sing)
    if model == "log_ratio":
        if a is None or not a > 0:
            raise PreconditionError("log_ratio needs a parameter a > 0")
        if not np.all(y > a):
            raise ModelMismatchError("log-ratio law is checked only where alpha > a")
        z = np.log(np.abs((y + a) / (y - a)))
        c = float(np.mean(t - z / (2 * a)))
        res = float(np.max(np.abs(z - 2 * a * (t - c))))
        e = np.exp(2 * a * (t - c))
        vres = float(np.max(np.abs(y - a * (e + 1) / (e - 1))))
        return FitResult(model, {"a": float(a), "c": c}, res, vres, c)
    raise PreconditionError(f"unknown model {model!r}; expected one of {MODELS}")


@dataclass(frozen=True)
class WitnessResult:
    witnessed: bool
    t_singular: float
    t_halt: float
    status: str


def incompleteness_witness(spec: MetricSpec, x0, v0, t_singular: float, step: float = 1e-3,
                           slack: float = 0.05) -> WitnessResult:
    """Integrate towards ``t_singular`` and require a halt before ``t_singular + slack``.

    The slack is taken in the direction of integration, so a singularity in
    the past is approached backwards.
    """
    if not math.isfinite(t_singular) or t_singular == 0:
        raise PreconditionError("t_singular must be finite and non-zero")
    d = math.copysign(1.0, t_singular)
    tr = integrate(spec, x0, v0, t_singular + d * slack, step)
    return WitnessResult(tr.halted, t_singular, tr.t_last, tr.status)


# ---------------------------------------------------------------------------
# warped products eps dt^2 + e^{2 eps t} g_N with s = eps t


def warped_residuals(trace: GeodesicTrace, spec: MetricSpec, eps: int) -> tuple:
    """Max residuals of ``s'' = eps e^{2s} g_N(g1', g1')`` and ``s'' + s'^2 = eps g(g', g')``.

    ``s''`` comes from the geodesic equation at each sample; the base term
    is the spatial block of the metric (which already carries ``e^{2s}``).
    """
    r1 = r2 = 0.0
    g_exprs = spec.metric_exprs()
    for x, v in zip(trace.points, trace.velocities):
        g, _, _ = ex.jets_of(g_exprs, x, spec.params, order=0)
        acc = acceleration(spec, x, v)
        sdd = eps * acc[0]
        sd = eps * v[0]
        base = v[1:] @ g[1:, 1:] @ v[1:]
        r1 = max(r1, abs(sdd - eps * base))
        r2 = max(r2, abs(sdd + sd * sd - eps * (v @ g @ v)))
    return float(r1), float(r2)
