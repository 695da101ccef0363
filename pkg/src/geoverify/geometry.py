"""Coordinate charts, metric jets, signatures, musical isomorphisms, Witt frames.

Sign convention: a metric is Lorentzian when it has exactly one negative
eigenvalue.  Volume forms use the coordinate orientation,
``Vol_g = sqrt|det g| dx^0 ^ ... ^ dx^{d-1}``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .errors import DegenerateMetricError, PreconditionError, SpecError

INVERSION_RTOL = 1e-12
SIGN_RTOL = 1e-10
ISOTROPY_TOL = 1e-10


@dataclass(frozen=True)
class MetricSpec:
    """A chart with symbolic metric components and optional torsion data.

    ``metric`` maps ``(i, j)`` with ``i <= j`` to an expression; missing
    entries are zero.  ``S`` maps strictly increasing ``(i, j, k)`` to the
    component of a 3-form.  ``fields`` carries auxiliary named objects used
    by manifest checks: vector fields (tuples of expressions), scalar
    functions (a single expression) and 3-forms (dicts like ``S``).
    """

    name: str
    coords: tuple
    params: Mapping[str, float]
    metric: Mapping[tuple, ex.Expr]
    xi: tuple | None = None
    S: Mapping[tuple, ex.Expr] | None = None
    domain: tuple = ()
    manifest: tuple | None = None
    fields: Mapping[str, object] = field(default_factory=dict)
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        d = len(self.coords)
        if d == 0:
            raise SpecError("chart must have at least one coordinate")
        if len(set(self.coords)) != d:
            raise SpecError("coordinate names must be distinct")
        for (i, j) in self.metric:
            if not (0 <= i <= j < d):
                raise SpecError(f"metric entry ({i},{j}) must satisfy 0 <= i <= j < dim")
        if self.xi is not None and len(self.xi) != d:
            raise SpecError("xi must have one component per coordinate")
        if self.S is not None:
            for key in self.S:
                if len(key) != 3 or not (0 <= key[0] < key[1] < key[2] < d):
                    raise SpecError(f"S entry {key} needs strictly increasing indices < dim")
        if len(self.domain) != d:
            raise SpecError("domain box needs one interval per coordinate")
        for lo, hi in self.domain:
            if not lo < hi:
                raise SpecError("domain intervals must be nonempty")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def parse(self, text: str) -> ex.Expr:
        return ex.parse(text, self.coords, list(self.params))

    def metric_exprs(self) -> np.ndarray:
        d = self.dim
        out = np.full((d, d), None, dtype=object)
        for (i, j), e in self.metric.items():
            out[i, j] = e
            out[j, i] = e
        return out

    def xi_exprs(self) -> np.ndarray:
        out = np.full(self.dim, None, dtype=object)
        if self.xi is not None:
            for i, e in enumerate(self.xi):
                if e is not None and not e.is_zero_literal():
                    out[i] = e
        return out

    def S_exprs(self) -> np.ndarray:
        return three_form_exprs(self.S or {}, self.dim)

    @property
    def has_torsion(self) -> bool:
        return any(e is not None for e in self.xi_exprs()) or bool(self.S)

    def with_(self, **changes) -> "MetricSpec":
        from dataclasses import replace

        return replace(self, **changes)

    def sample_points(self, n: int, rng: np.random.Generator, margin: float = 0.0):
        lo = np.array([a for a, _ in self.domain], dtype=float) + margin
        hi = np.array([b for _, b in self.domain], dtype=float) - margin
        if np.any(lo >= hi):
            raise PreconditionError("domain box too small for the requested margin")
        return lo + (hi - lo) * rng.random((n, self.dim))

    def in_domain(self, point, margin: float = 0.0) -> bool:
        return all(
            lo + margin <= x <= hi - margin for x, (lo, hi) in zip(point, self.domain)
        )


def perm_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def three_form_exprs(entries: Mapping[tuple, ex.Expr], dim: int) -> np.ndarray:
    """Expand increasing-index entries to a full antisymmetric object array."""
    out = np.full((dim, dim, dim), None, dtype=object)
    negs = {}
    for key, e in entries.items():
        if len(set(key)) != 3:
            raise SpecError(f"3-form entry {key} has repeated indices")
        if e is None or e.is_zero_literal():
            continue
        for perm in itertools.permutations(range(3)):
            idx = tuple(key[p] for p in perm)
            if perm_sign(perm) > 0:
                out[idx] = e
            else:
                if id(e) not in negs:
                    negs[id(e)] = ex.Neg(e)
                out[idx] = negs[id(e)]
    return out


@dataclass(frozen=True)
class MetricValue:
    """Metric and its jets at a point.

    ``dg[i, j, k] = d_k g_ij`` and ``d2g[i, j, k, l] = d_l d_k g_ij``.
    """

    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray | None


def invert_metric(g: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(g))) if g.size else 0.0
    if scale == 0.0:
        raise DegenerateMetricError("metric matrix vanishes")
    det = np.linalg.det(g / scale)
    if abs(det) < INVERSION_RTOL:
        raise DegenerateMetricError(f"metric is degenerate (scaled det {det:.3e})")
    # LU with partial pivoting
    g_inv = np.linalg.solve(g, np.eye(g.shape[0]))
    return 0.5 * (g_inv + g_inv.T)


def metric_at(spec: MetricSpec, point, order: int = 2) -> MetricValue:
    """Metric, inverse and derivative jets (exact, from the expression AD)."""
    point = np.asarray(point, dtype=float)
    if point.shape != (spec.dim,):
        raise PreconditionError(f"point must have {spec.dim} coordinates")
    g, dg, d2g = ex.jets_of(spec.metric_exprs(), point, spec.params, order=order)
    return MetricValue(g, invert_metric(g), dg, d2g)


def signature_of(g: np.ndarray) -> tuple:
    w = np.linalg.eigvalsh(0.5 * (g + g.T))
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    thr = SIGN_RTOL * scale if scale > 0 else 0.0
    n_neg = int(np.sum(w < -thr))
    n_pos = int(np.sum(w > thr))
    return n_neg, len(w) - n_neg - n_pos, n_pos


def signature_at(spec: MetricSpec, point) -> tuple:
    """``(n_neg, n_zero, n_pos)`` eigenvalue sign counts of g at ``point``."""
    g, _, _ = ex.jets_of(spec.metric_exprs(), np.asarray(point, float), spec.params, order=0)
    return signature_of(g)


def is_lorentzian(g: np.ndarray) -> bool:
    n_neg, n_zero, _ = signature_of(g)
    return n_neg == 1 and n_zero == 0


def lower(v, g):
    return np.asarray(g) @ np.asarray(v, dtype=float)


def raise_index(omega, g_inv):
    return np.asarray(g_inv) @ np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class WittFrame:
    p: np.ndarray
    e: np.ndarray  # shape (n, dim); rows are e_1..e_n
    q: np.ndarray

    def matrix(self) -> np.ndarray:
        """Columns p, e_1..e_n, q."""
        cols = [self.p] + list(self.e) + [self.q]
        return np.column_stack(cols)


def witt_gram(n: int) -> np.ndarray:
    G = np.zeros((n + 2, n + 2))
    G[0, -1] = G[-1, 0] = 1.0
    G[1:-1, 1:-1] = np.eye(n)
    return G


def witt_frame(g: np.ndarray, p) -> WittFrame:
    """Witt frame ``(p, e_1..e_n, q)`` for a Lorentzian matrix ``g``."""
    g = np.asarray(g, dtype=float)
    p = np.asarray(p, dtype=float)
    d = g.shape[0]
    if not np.any(p):
        raise PreconditionError("p must be non-zero")
    if not is_lorentzian(g):
        raise PreconditionError("metric is not Lorentzian at this point")
    scale = max(1.0, float(np.max(np.abs(g))) * float(np.dot(p, p)))
    if abs(p @ g @ p) > ISOTROPY_TOL * scale:
        raise PreconditionError("p is not isotropic")
    gp = g @ p
    k = int(np.argmax(np.abs(gp)))
    w = np.zeros(d)
    w[k] = 1.0
    q0 = w / gp[k]
    q = q0 - 0.5 * (q0 @ g @ q0) * p
    es = []
    for c in range(d):
        v = np.zeros(d)
        v[c] = 1.0
        v = v - (v @ g @ q) * p - (v @ g @ p) * q
        for e in es:
            v = v - (v @ g @ e) * e
        nrm2 = v @ g @ v
        if nrm2 > 1e-8:
            v = v / np.sqrt(nrm2)
            # one more pass for numerical orthogonality
            v = v - (v @ g @ q) * p - (v @ g @ p) * q
            for e in es:
                v = v - (v @ g @ e) * e
            es.append(v / np.sqrt(v @ g @ v))
        if len(es) == d - 2:
            break
    return WittFrame(p, np.array(es).reshape(len(es), d), q)


def witt_frame_at(spec: MetricSpec, point, p) -> WittFrame:
    g, _, _ = ex.jets_of(spec.metric_exprs(), np.asarray(point, float), spec.params, order=0)
    return witt_frame(g, p)


def volume_factor(g: np.ndarray) -> float:
    return float(np.sqrt(abs(np.linalg.det(g))))
