"""Check runner and deterministic JSON reports."""
from __future__ import annotations

import json
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .checks import get_check, manifest_of
from .errors import DegenerateMetricError, DomainError
from .geometry import MetricSpec


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    description: str
    paper_anchor: str
    n_points: int
    max_residual: float
    tolerance: float
    comparison: str
    passed: bool
    error: str | None = None

    def to_dict(self) -> dict:
        d = {
            "check_id": self.check_id,
            "description": self.description,
            "paper_anchor": self.paper_anchor,
            "n_points": self.n_points,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "pass": self.passed,
        }
        if self.error:
            d["error"] = self.error
        return d


@dataclass(frozen=True)
class CheckReport:
    tool_version: str
    spec_name: str
    seed: int
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        d = {
            "tool_version": self.tool_version,
            "spec_name": self.spec_name,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
            "overall_pass": self.overall_pass,
        }
        if self.meta:
            d["meta"] = self.meta
        return d

    def to_json(self) -> str:
        return dumps(self.to_dict())


def check_rng(seed: int, check_id: str) -> np.random.Generator:
    """Independent stream per check, so adding a check never shifts the others."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(check_id.encode())]))


def thread_count() -> int:
    raw = os.environ.get("GEOVERIFY_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def run_check(spec: MetricSpec, check_id: str, n_points: int, seed: int, tol=None) -> CheckResult:
    cdef = get_check(check_id)
    tol = cdef.tolerance if tol is None else float(tol)
    margin = cdef.margin
    pts = spec.sample_points(n_points, check_rng(seed, check_id), margin=margin)
    err = None
    try:
        value = float(cdef.func(spec, pts))
    except (DomainError, DegenerateMetricError, ArithmeticError) as exc:
        # a numerical breakdown at a sample point fails the check, it is not an input error
        value, err = math.nan, f"{type(exc).__name__}: {exc}"
    passed = cdef.passes(value, tol)
    return CheckResult(
        check_id, cdef.description, cdef.anchor, n_points, value, tol,
        ">" if cdef.lower else "<=", passed, err,
    )


def run_checks(spec: MetricSpec, n_points: int = 20, seed: int = 0, tol_overrides=None,
               check_ids=None) -> CheckReport:
    ids = sorted(set(check_ids if check_ids is not None else manifest_of(spec)))
    for cid in ids:
        get_check(cid)
    tol_overrides = dict(tol_overrides or {})
    jobs = [(cid, tol_overrides.get(cid)) for cid in ids]
    workers = min(thread_count(), max(1, len(jobs)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda j: run_check(spec, j[0], n_points, seed, j[1]), jobs))
    else:
        results = [run_check(spec, cid, n_points, seed, t) for cid, t in jobs]
    meta = {}
    if "vol_sign" in spec.meta:
        meta["vol_orientation"] = "coordinate order"
        meta["vol_sign"] = spec.meta["vol_sign"]
    return CheckReport(__version__, spec.name, int(seed), results, meta)


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def _num(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = format(x, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def _enc(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_enc(str(k), indent, level + 1)}: {_enc(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_enc(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _enc(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys, floats with 17 significant digits."""
    return _enc(obj, indent, 0) + "\n"
