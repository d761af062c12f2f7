"""Command line front end: classify, ac-measure, adjoint, verify, transfer-check.

Exit status is 0 on success, 1 when a verification fails and 2 on usage
errors (bad arguments, malformed JSON, a symbol the command cannot take).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .ac_measures import build_measure, sweep, sweep_csv_rows
from .adjoint import BACKENDS, adjoint, duality_gap, isometry_defect
from .boundedness import classify_qlp, classify_rational
from .errors import HardyError, NotApplicableError
from .hardy import BoundaryFunction, combine, f_p, g_p, kernel_K, kernel_k, poisson
from .kernels import BACKEND
from .poly_rational import RationalMap
from .quadrature import QuadratureConfig
from .transfer import transfer_check

log = logging.getLogger("hardy_adjoint")

DUALITY_TOL = 1e-6
ISOMETRY_TOL = 1e-6


class UsageError(Exception):
    """Bad input; reported with exit status 2."""


# -- input parsing -----------------------------------------------------------


def _load_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{source}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None


def _read_json_file(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return _load_json(text, path)


def load_symbol(path: str) -> RationalMap:
    try:
        return RationalMap.from_json(_read_json_file(path))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: invalid symbol: {exc}") from None


def parse_complex(text: str) -> complex:
    """'2i', '1+i', '-0.5-2i' or '1,2' (re,im)."""
    text = text.strip().replace(" ", "")
    if "," in text:
        re_, im = text.split(",", 1)
        try:
            return complex(float(re_), float(im))
        except ValueError:
            raise UsageError(f"bad complex number {text!r}") from None
    t = re.sub(r"(?<![\d.])[ij]", "1j", text).replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"bad complex number {text!r}") from None


LIBRARY_HELP = "g_<p>, f_<p>, K_<w>, k_<w>, P_<x>,<y> (w like 2i or 1+i), or JSON"


def _function_from_obj(obj) -> BoundaryFunction:
    if isinstance(obj, str):
        return parse_function(obj)
    if isinstance(obj, list):
        return combine([(1.0, _function_from_obj(o)) for o in obj])
    if not isinstance(obj, dict):
        raise UsageError(f"cannot read a test function from {obj!r}")
    if "sum" in obj:
        terms = []
        for term in obj["sum"]:
            c = term.get("coef", 1.0)
            c = complex(*c) if isinstance(c, list) else complex(c)
            terms.append((c, _function_from_obj(term["f"])))
        return combine(terms)
    kind = obj.get("kind")
    try:
        if kind == "g":
            return g_p(float(obj.get("p", 2)))
        if kind == "f":
            return f_p(float(obj.get("p", 2)))
        if kind in ("K", "k"):
            w = obj["w"]
            w = complex(*w) if isinstance(w, list) else parse_complex(str(w))
            return kernel_K(w) if kind == "K" else kernel_k(w)
        if kind == "poisson":
            return poisson(float(obj["x"]), float(obj["y"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad test function {obj!r}: {exc}") from None
    raise UsageError(f"unknown test function kind {kind!r}")


def parse_function(text: str) -> BoundaryFunction:
    """A library name or a JSON description (inline or a file path)."""
    text = text.strip()
    if text.startswith(("{", "[")):
        return _function_from_obj(_load_json(text, "--f"))
    if text.endswith(".json"):
        return _function_from_obj(_read_json_file(text))
    m = re.fullmatch(r"([gfKkP])_(.+)", text)
    if not m:
        raise UsageError(f"unknown test function {text!r}; expected {LIBRARY_HELP}")
    kind, arg = m.groups()
    try:
        if kind == "g":
            return g_p(float(arg))
        if kind == "f":
            return f_p(float(arg))
        if kind == "P":
            x, y = arg.split(",")
            return poisson(float(x), float(y))
        w = parse_complex(arg)
        return kernel_K(w) if kind == "K" else kernel_k(w)
    except ValueError as exc:
        raise UsageError(f"bad test function {text!r}: {exc}") from None


def parse_grid(text: str) -> np.ndarray:
    """'x0:x1:nx,y0:y1:ny' -> points x + i y on the product grid."""
    try:
        xs, ys = text.split(",")
        x0, x1, nx = xs.split(":")
        y0, y1, ny = ys.split(":")
        gx = np.linspace(float(x0), float(x1), int(nx))
        gy = np.linspace(float(y0), float(y1), int(ny))
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected x0:x1:nx,y0:y1:ny") from None
    return (gx[None, :] + 1j * gy[:, None]).ravel()


def parse_sweep(text: str) -> np.ndarray:
    try:
        a0, a1, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return np.linspace(float(a0), float(a1), n)
    except ValueError:
        raise UsageError(f"bad sweep {text!r}; expected a0:a1:n with n >= 1") from None


def _nodes(text: str) -> int:
    n = int(text)
    if n < 32:
        raise argparse.ArgumentTypeError("--nodes must be >= 32")
    return n


def _tol(text: str) -> float:
    t = float(text)
    if not 0 < t <= 1e-2:
        raise argparse.ArgumentTypeError("--tol must lie in (0, 1e-2]")
    return t


# -- output ------------------------------------------------------------------


def emit_json(obj, out) -> None:
    out.write(json.dumps(obj, sort_keys=True, indent=2))
    out.write("\n")


# -- commands ----------------------------------------------------------------


def cmd_classify(args, cfg, out) -> int:
    if args.qlp:
        data = _read_json_file(args.qlp)
        try:
            terms = {k: [(complex(*c) if isinstance(c, list) else complex(c), float(e)) for c, e in data[k]] for k in ("num", "den")}
        except (KeyError, TypeError, ValueError):
            raise UsageError(f'{args.qlp}: QLP symbol needs "num" and "den" lists of [coefficient, exponent]') from None
        try:
            verdict = classify_qlp(terms["num"], terms["den"])
        except ValueError as exc:
            raise UsageError(f"{args.qlp}: {exc}") from None
        emit_json({"kind": "qlp", **verdict.to_json()}, out)
        return 0
    phi = load_symbol(args.symbol)
    emit_json({"kind": "rational", "symbol": str(phi), **classify_rational(phi).to_json()}, out)
    return 0


def cmd_ac_measure(args, cfg, out) -> int:
    phi = load_symbol(args.symbol)
    if args.sweep:
        measures = sweep(phi, parse_sweep(args.sweep), cfg=cfg)
        if args.format == "json":
            emit_json({"symbol": str(phi), "measures": [m.to_json(cfg=cfg) for m in measures]}, out)
        else:
            csv.writer(out, lineterminator="\n").writerows(sweep_csv_rows(measures, cfg))
        return 0
    if args.alpha is None:
        raise UsageError("ac-measure needs --alpha or --sweep")
    mu = build_measure(phi, args.alpha, cfg=cfg)
    if args.format == "csv":
        csv.writer(out, lineterminator="\n").writerows(sweep_csv_rows([mu], cfg))
    else:
        emit_json({"symbol": str(phi), **mu.to_json(cfg=cfg)}, out)
    return 0


def cmd_adjoint(args, cfg, out) -> int:
    phi = load_symbol(args.symbol)
    f = parse_function(args.f)
    if args.grid:
        points = parse_grid(args.grid)
    elif args.z:
        points = [parse_complex(z) for z in args.z]
    else:
        raise UsageError("adjoint needs --z or --grid")
    results = [adjoint(phi, f, z, args.backend, cfg).to_json() for z in points]
    emit_json({"symbol": str(phi), "f": f.name, "results": results}, out)
    return 0


def _expected_isometry(phi: RationalMap) -> bool:
    """C_phi is an isometry for real symbols whose AC measures have unit mass."""
    if not phi.is_real() or phi.n != phi.m + 1:
        return False
    return abs(phi.den.leading / phi.num.leading - 1) <= 1e-12


def cmd_verify(args, cfg, out) -> int:
    phi = load_symbol(args.symbol)
    verdict = classify_rational(phi)
    report: dict = {"symbol": str(phi), "verdict": verdict.verdict}
    if not verdict.bounded:
        report["pass"] = False
        report["reason"] = "duality and isometry checks need a bounded symbol"
        emit_json(report, out)
        return 1
    fs = [kernel_K(1j), g_p(2)]
    gs = [g_p(2), kernel_K(2j)]
    duality = []
    for f in fs:
        for g in gs:
            for backend in BACKENDS:
                gap = duality_gap(phi, f, g, cfg, backend)
                duality.append({"f": f.name, "g": g.name, "backend": backend, "gap": gap, "pass": gap <= DUALITY_TOL})
    expect = _expected_isometry(phi)
    isometry = []
    for f in (g_p(2), kernel_K(1j), kernel_K(1 + 1j)):
        d = isometry_defect(phi, f, cfg)
        ok = d <= ISOMETRY_TOL if expect else d > ISOMETRY_TOL
        isometry.append({"f": f.name, "defect": d, "expected_isometry": expect, "pass": ok})
    report["duality"] = duality
    report["isometry"] = isometry
    report["pass"] = all(r["pass"] for r in duality + isometry)
    emit_json(report, out)
    return 0 if report["pass"] else 1


def cmd_transfer_check(args, cfg, out) -> int:
    phi = load_symbol(args.symbol)
    rep = transfer_check(phi, cfg, seed=args.seed)
    rep["pass"] = rep["unitarity"]["pass"] and rep["two_path"]["pass"] and rep["weight_near_minus_one"]["consistent"]
    emit_json(rep, out)
    return 0 if rep["pass"] else 1


COMMANDS = {
    "classify": cmd_classify,
    "ac-measure": cmd_ac_measure,
    "adjoint": cmd_adjoint,
    "verify": cmd_verify,
    "transfer-check": cmd_transfer_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nodes", type=_nodes, default=256, help="base quadrature nodes (>= 32)")
    common.add_argument("--tol", type=_tol, default=1e-10, help="quadrature tolerance in (0, 1e-2]")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--seed", type=int, default=0, help="seed for sampled check points")

    p = argparse.ArgumentParser(prog="hardy-adjoint", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="boundedness verdict for a symbol")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--symbol", help="rational symbol JSON file")
    src.add_argument("--qlp", help='QLP JSON file {"num": [[c, e], ...], "den": [...]}')

    a = sub.add_parser("ac-measure", parents=[common], help="Aleksandrov-Clark measure data")
    a.add_argument("--symbol", required=True)
    a.add_argument("--alpha", type=float)
    a.add_argument("--sweep", help="a0:a1:n, emits CSV rows by default")

    d = sub.add_parser("adjoint", parents=[common], help="evaluate the adjoint of C_phi")
    d.add_argument("--symbol", required=True)
    d.add_argument("--f", required=True, help=LIBRARY_HELP)
    d.add_argument("--z", action="append", help="evaluation point re,im (repeatable); real for --backend ac")
    d.add_argument("--backend", choices=BACKENDS, default="residue")
    d.add_argument("--grid", help="x0:x1:nx,y0:y1:ny")

    v = sub.add_parser("verify", parents=[common], help="duality and isometry checks")
    v.add_argument("--symbol", required=True)

    t = sub.add_parser("transfer-check", parents=[common], help="disc transfer invariants")
    t.add_argument("--symbol", required=True)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        args.format = "csv" if getattr(args, "sweep", None) else "json"
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=err, format="%(levelname)s %(message)s")
    cfg = QuadratureConfig(base_nodes=args.nodes, tol=args.tol)
    log.debug("kernel backend: %s", BACKEND)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            code = COMMANDS[args.command](args, cfg, out)
        except UsageError as exc:
            err.write(f"error: {exc}\n")
            return 2
        except (NotApplicableError, ValueError) as exc:
            err.write(f"error: {exc}\n")
            return 2
        except HardyError as exc:
            err.write(f"failure: {exc}\n")
            return 1
    seen = set()
    for w in caught:
        msg = f"{w.category.__name__}: {w.message}"
        if msg not in seen:
            seen.add(msg)
            log.info(msg)
    if caught and not args.verbose:
        err.write(f"{len(seen)} distinct numerical warning(s); rerun with -v to list them\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
