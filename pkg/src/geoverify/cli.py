"""Command line: ``geoverify check | catalog list | catalog emit | geodesic``.

Exit codes: 0 pass, 1 check or fit failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, catalog, geodesics, specio
from .errors import GeoVerifyError, ModelMismatchError
from .expr import Expr
from .report import dumps, run_checks

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _InputError(Exception):
    pass


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _key_values(items, what: str) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise _InputError(f"{what} must look like key=value, got {item!r}")
        out[key] = value
    return out


def _floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(s) for s in text.split(",")], dtype=float)
    except ValueError:
        raise _InputError(f"{what} must be a comma-separated list of numbers") from None


def _catalog_value(raw: str):
    try:
        return float(raw) if "." in raw or "e" in raw.lower() else int(raw)
    except ValueError:
        return raw


# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    spec = specio.load_spec(args.spec)
    tols = {}
    for k, v in _key_values(args.tol, "--tol").items():
        try:
            tols[k] = float(v)
        except ValueError:
            raise _InputError(f"tolerance for {k} is not a number") from None
    if args.points < 1:
        raise _InputError("--points must be positive")
    report = run_checks(spec, n_points=args.points, seed=args.seed, tol_overrides=tols)
    _write(report.to_json(), args.out)
    for c in report.checks:
        if not c.passed:
            print(f"FAIL {c.check_id}: {c.max_residual:.3e} (needs {c.comparison} {c.tolerance:.1e})",
                  file=sys.stderr)
    return EXIT_OK if report.overall_pass else EXIT_FAIL


def cmd_catalog_list(args) -> int:
    lines = []
    for name, entry in catalog.ENTRIES.items():
        params = ", ".join(f"{k}={d!r}" for k, (_, d) in entry.params.items()) or "-"
        lines.append(f"{name}\t[{entry.result}]\tparams: {params}\t{entry.description}")
    _write("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_catalog_emit(args) -> int:
    params = {k: _catalog_value(v) for k, v in _key_values(args.param, "--param").items()}
    spec = catalog.build(args.name, **params)
    _write(specio.dump_spec(spec), args.out)
    return EXIT_OK


def _tracked(trace, spec, name: str):
    if name == "xi":
        if spec.xi is None:
            raise _InputError("spec has no xi to track")
        return "vector", geodesics.track_alpha(trace, spec.xi, spec)
    if "," in name:
        parts = [t.strip() for t in name.split(",")]
        if len(parts) != spec.dim:
            raise _InputError(f"--track vector needs {spec.dim} components")
        return "vector", geodesics.track_alpha(trace, [spec.parse(t) for t in parts], spec)
    if name not in spec.fields:
        raise _InputError(f"spec has no field {name!r} (available: {sorted(spec.fields)})")
    value = spec.fields[name]
    if isinstance(value, Expr):
        return "scalar", geodesics.track_scalar(trace, value, spec)
    if isinstance(value, tuple):
        return "vector", geodesics.track_alpha(trace, value, spec)
    raise _InputError(f"field {name!r} is neither a vector nor a scalar")


def cmd_geodesic(args) -> int:
    spec = specio.load_spec(args.spec)
    x0 = _floats(args.x0, "--x0")
    v0 = _floats(args.v0, "--v0")
    if args.step <= 0:
        raise _InputError("--step must be positive")
    trace = geodesics.integrate(spec, x0, v0, args.tmax, args.step)
    doc = {
        "tool_version": __version__,
        "spec_name": spec.name,
        "x0": x0.tolist(),
        "v0": v0.tolist(),
        "step": args.step,
        "t_max": args.tmax,
        "status": trace.status,
        "t_last": trace.t_last,
    }
    e = geodesics.speed_squared(trace, spec)
    doc["speed_squared_drift"] = float(np.max(np.abs(e - e[0])))
    if args.track:
        kind, _ = _tracked(trace, spec, args.track)
        doc["tracked"] = {"field": args.track, "kind": kind}
    code = EXIT_OK
    if args.fit:
        if trace.alpha is None:
            raise _InputError("--fit needs --track")
        try:
            fit = geodesics.fit_blowup(trace.times, trace.alpha, args.fit, a=args.a)
        except ModelMismatchError as exc:
            doc["fit"] = {"model": args.fit, "error": str(exc), "pass": False}
            code = EXIT_FAIL
        else:
            ok = fit.residual <= args.fit_tol
            doc["fit"] = {
                "model": fit.model, "params": fit.params, "residual": fit.residual,
                "value_residual": fit.value_residual, "tolerance": args.fit_tol,
                "t_singular": fit.t_singular, "pass": ok,
            }
            code = EXIT_OK if ok else EXIT_FAIL
            if args.witness and np.isfinite(fit.t_singular) and fit.t_singular != 0:
                w = geodesics.incompleteness_witness(spec, x0, v0, fit.t_singular, args.step)
                doc["witness"] = {"halted": w.witnessed, "t_halt": w.t_halt, "status": w.status,
                                  "slack": 0.05}
    if not args.no_trace:
        doc["trace"] = trace.rows()
    _write(dumps(doc), args.out)
    if code != EXIT_OK:
        print(f"fit failed: {doc['fit']}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geoverify", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"geoverify {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run a spec's manifest (or the default suite) and write a report")
    c.add_argument("spec")
    c.add_argument("--points", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", action="append", metavar="CHECK=VALUE", help="tolerance override")
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    cat = sub.add_parser("catalog", help="list or emit catalog entries")
    csub = cat.add_subparsers(dest="catalog_command", required=True)
    cl = csub.add_parser("list")
    cl.set_defaults(func=cmd_catalog_list)
    ce = csub.add_parser("emit")
    ce.add_argument("name")
    ce.add_argument("--param", action="append", metavar="KEY=VALUE")
    ce.add_argument("--out")
    ce.set_defaults(func=cmd_catalog_emit)

    g = sub.add_parser("geodesic", help="integrate a geodesic, track a field and fit a blow-up law")
    g.add_argument("spec")
    g.add_argument("--x0", required=True)
    g.add_argument("--v0", required=True)
    g.add_argument("--tmax", type=float, required=True, help="negative integrates backwards")
    g.add_argument("--step", type=float, default=1e-3)
    g.add_argument("--track", help="field name (vector: g(gamma', w); scalar: its value), 'xi', "
                   "or comma-separated vector components")
    g.add_argument("--fit", choices=geodesics.MODELS)
    g.add_argument("--a", type=float, help="parameter of the log_ratio model")
    g.add_argument("--fit-tol", type=float, default=1e-5)
    g.add_argument("--witness", action="store_true", help="integrate towards the fitted singularity")
    g.add_argument("--no-trace", action="store_true", help="omit the per-step rows")
    g.add_argument("--out")
    g.set_defaults(func=cmd_geodesic)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (_InputError, GeoVerifyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
