"""Compare the compiled and pure-numpy kernel backends.

Micro timings call each kernel directly on both implementations. The
end-to-end timing runs one workload in two fresh interpreters, one with
HARDY_ADJOINT_PURE=1, so the import-time selection is exercised as in use.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from hardy_adjoint import _kernels_py

try:
    from hardy_adjoint import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def micro_cases(rng: np.random.Generator):
    coeffs = rng.normal(size=9) + 1j * rng.normal(size=9)
    z = rng.normal(size=200_000) + 1j * rng.uniform(0.1, 2, size=200_000)
    den = rng.normal(size=6) + 0j
    x = rng.normal(size=100_000)
    y = rng.uniform(0.1, 2, size=100_000)
    locs, masses = rng.normal(size=4), rng.uniform(size=4)
    breaks = np.sort(rng.normal(scale=5, size=(400, 40)), axis=1)
    gx, gw = np.polynomial.legendre.leggauss(16)
    vals = rng.normal(size=(400, 4000)) + 1j * rng.normal(size=(400, 4000))
    wts = rng.uniform(size=(400, 4000))
    return {
        "horner (deg 8, 2e5 pts)": ("horner", (coeffs, z)),
        "rational (8/5, 2e5 pts)": ("rational", (coeffs, den, z)),
        "poisson_atoms (4 atoms, 1e5 pts)": ("poisson_atoms", (x, y, locs, masses)),
        "panel_nodes (400 x 40 breaks)": ("panel_nodes", (breaks, gx, gw)),
        "row_dot (400 x 4000)": ("row_dot", (vals, wts)),
    }


def time_call(fn, args, repeat: int) -> float:
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


WORKLOAD = """
import time
from hardy_adjoint.adjoint import duality_gap
from hardy_adjoint.hardy import g_p, kernel_K
from hardy_adjoint.kernels import BACKEND
from hardy_adjoint.poly_rational import RationalMap
phi = RationalMap.from_coeffs((-1, 2j, 2), (1j, 1))
t = time.perf_counter()
for backend in ("integral", "ac"):
    duality_gap(phi, g_p(2), kernel_K(2j), backend=backend)
print(BACKEND, time.perf_counter() - t)
"""


def end_to_end(pure: bool) -> tuple[str, float]:
    env = dict(os.environ)
    env.pop("HARDY_ADJOINT_PURE", None)
    if pure:
        env["HARDY_ADJOINT_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True, check=True)
    name, secs = out.stdout.split()
    return name, float(secs)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)
    if _kernels_cy is None:
        print("compiled kernels are not built; only the numpy backend can be timed")
    rows = []
    for label, (name, call_args) in micro_cases(np.random.default_rng(args.seed)).items():
        py = time_call(getattr(_kernels_py, name), call_args, args.repeat)
        cy = time_call(getattr(_kernels_cy, name), call_args, args.repeat) if _kernels_cy else float("nan")
        rows.append({"case": label, "python_s": py, "cython_s": cy, "speedup": py / cy})
    e2e = {}
    for pure in (True, False):
        name, secs = end_to_end(pure)
        e2e[name] = secs
    width = max(len(r["case"]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy s':>10}  {'cython s':>10}  {'speedup':>8}")
    for r in rows:
        print(f"{r['case']:<{width}}  {r['python_s']:10.4f}  {r['cython_s']:10.4f}  {r['speedup']:8.2f}")
    print("\nend to end (duality gap, mixed symbol, integral + ac backends):")
    for name, secs in e2e.items():
        print(f"  {name:<8} {secs:.3f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"micro": rows, "end_to_end": e2e}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
