"""Adaptive Gauss-Legendre quadrature over the whole real line.

The line is cut at user supplied break points. Bounded panels are
integrated in the original variable; the two unbounded end panels use the
substitution t = b +- L tan(theta), theta in [0, pi/2). Near-singular
features (a pole at c + i w just off the axis) are resolved by a mesh graded
geometrically toward c on the scale w.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels


@dataclass(frozen=True)
class QuadratureConfig:
    base_nodes: int = 256
    tol: float = 1e-10
    max_doublings: int = 6
    order: int = 16

    def __post_init__(self):
        if self.base_nodes < 32:
            raise ValueError("base_nodes must be >= 32")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be >= 0")


DEFAULT = QuadratureConfig()


class QuadResult(NamedTuple):
    value: complex
    error: float
    converged: bool
    evaluations: int


@functools.lru_cache(maxsize=16)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def graded_points(centre: float, width: float, reach: float | None = None) -> list[float]:
    """Break points c, c +- w 4^k reaching out to about max(1, |c|)."""
    width = abs(width)
    if not width > 0 or not math.isfinite(width):
        return [centre]
    reach = max(1.0, abs(centre)) if reach is None else reach
    pts = [centre]
    step = width
    while True:
        pts.extend((centre - step, centre + step))
        if step >= reach:
            break
        step *= 4.0
    return pts


def break_points(points: Iterable[float] = (), features: Iterable[complex] = (), grade: bool = True) -> np.ndarray:
    """Sorted unique break points from real points and complex features.

    A feature z contributes a graded cluster around Re z on the scale |Im z|.
    With ``grade`` set, gaps much wider than their neighbours are filled
    geometrically so slowly varying stretches between features stay resolved.
    """
    pts: list[float] = [float(p) for p in points if math.isfinite(p)]
    for z in features:
        z = complex(z)
        if math.isfinite(z.real) and math.isfinite(z.imag):
            pts.extend(graded_points(z.real, z.imag))
    if not pts:
        pts = [-1.0, 1.0]
    arr = np.unique(np.array(pts, dtype=float))
    if arr.size > 1:
        keep = np.concatenate([[True], np.diff(arr) > 1e-14 * (1 + np.abs(arr[1:]))])
        arr = arr[keep]
    if grade and arr.size > 2:
        arr = _grade_gaps(arr)
    return arr


def _grade_gaps(arr: np.ndarray) -> np.ndarray:
    """Fill gaps much wider than their neighbours with points graded by 4x from each end."""
    gaps = np.diff(arr)
    extra: list[float] = []
    for k, (a, b, L) in enumerate(zip(arr[:-1], arr[1:], gaps)):
        mid = 0.5 * (a + b)
        if k > 0 and L > 8 * gaps[k - 1]:
            step = gaps[k - 1]
            while a + step < mid:
                extra.append(a + step)
                step *= 4.0
        if k + 1 < gaps.size and L > 8 * gaps[k + 1]:
            step = gaps[k + 1]
            while b - step > mid:
                extra.append(b - step)
                step *= 4.0
    if not extra:
        return arr
    return np.unique(np.concatenate([arr, extra]))


class _Panels:
    """Struct-of-arrays panel list: kind 0 is t-space, kind 1 a tan-mapped tail."""

    def __init__(self, lo, hi, kind, base, scale, sign):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.kind = np.asarray(kind, dtype=int)
        self.base = np.asarray(base, dtype=float)
        self.scale = np.asarray(scale, dtype=float)
        self.sign = np.asarray(sign, dtype=float)

    def __len__(self):
        return self.lo.size

    def take(self, idx):
        return _Panels(
            self.lo[idx], self.hi[idx], self.kind[idx], self.base[idx], self.scale[idx], self.sign[idx]
        )

    def halves(self):
        mid = 0.5 * (self.lo + self.hi)
        cat = np.concatenate
        return _Panels(
            cat([self.lo, mid]),
            cat([mid, self.hi]),
            cat([self.kind, self.kind]),
            cat([self.base, self.base]),
            cat([self.scale, self.scale]),
            cat([self.sign, self.sign]),
        )

    def subdivide(self, k: int):
        if k <= 1:
            return self
        frac = np.arange(k + 1) / k
        lo = self.lo[:, None] + (self.hi - self.lo)[:, None] * frac[None, :-1]
        hi = self.lo[:, None] + (self.hi - self.lo)[:, None] * frac[None, 1:]
        rep = lambda a: np.repeat(a, k)
        return _Panels(lo.ravel(), hi.ravel(), rep(self.kind), rep(self.base), rep(self.scale), rep(self.sign))

    def nodes(self, order: int):
        x, w = gauss_legendre(order)
        half = 0.5 * (self.hi - self.lo)
        mid = 0.5 * (self.hi + self.lo)
        u = mid[:, None] + half[:, None] * x[None, :]
        wt = half[:, None] * w[None, :]
        tail = self.kind[:, None] == 1
        tanu = np.tan(np.where(tail, u, 0.0))
        t = np.where(tail, self.base[:, None] + self.sign[:, None] * self.scale[:, None] * tanu, u)
        jac = np.where(tail, self.scale[:, None] * (1.0 + tanu * tanu), 1.0)
        return t, wt * jac


def _initial_panels(breaks: np.ndarray, cfg: QuadratureConfig) -> _Panels:
    b = np.asarray(breaks, dtype=float)
    n_fin = b.size - 1
    lo = list(b[:-1])
    hi = list(b[1:])
    kind = [0] * n_fin
    base = [0.0] * n_fin
    scale = [1.0] * n_fin
    sign = [1.0] * n_fin
    for end, sgn in ((b[0], -1.0), (b[-1], 1.0)):
        lo.append(0.0)
        hi.append(0.5 * np.pi)
        kind.append(1)
        base.append(end)
        scale.append(max(1.0, abs(end)))
        sign.append(sgn)
    panels = _Panels(lo, hi, kind, base, scale, sign)
    k = max(1, math.ceil(cfg.base_nodes / (cfg.order * len(panels))))
    return panels.subdivide(k)


def _estimate(func, panels: _Panels, order: int):
    t, w = panels.nodes(order)
    vals = np.asarray(func(t.ravel()), dtype=complex).reshape(t.shape)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return (vals * w).sum(axis=1), (np.abs(vals) * w).sum(axis=1)


def integrate_line(
    func: Callable[[np.ndarray], np.ndarray],
    cfg: QuadratureConfig | None = None,
    points: Sequence[float] = (),
    features: Sequence[complex] = (),
) -> QuadResult:
    """Integrate a vectorised function over the real line.

    ``func`` maps a 1-d float array to complex values. ``points`` are real
    break points (poles, kinks); ``features`` are complex singularities off
    the axis whose distance to it sets the local mesh scale. Non-finite
    integrand values (at exact poles of a decaying composite) count as zero.
    """
    cfg = cfg or DEFAULT
    panels = _initial_panels(break_points(points, features), cfg)
    values, absvals = _estimate(func, panels, cfg.order)
    evals = len(panels) * cfg.order
    done, done_abs, done_err = 0j, 0.0, 0.0
    converged = False
    err = np.zeros(0)
    for _ in range(cfg.max_doublings + 1):
        kids = panels.halves()
        kv, ka = _estimate(func, kids, cfg.order)
        evals += len(kids) * cfg.order
        n = len(panels)
        fine = kv[:n] + kv[n:]
        fine_abs = ka[:n] + ka[n:]
        err = np.abs(fine - values)
        total = done + fine.sum()
        scale = max(abs(total), 1e-3 * (done_abs + fine_abs.sum()), 1e-300)
        budget = cfg.tol * scale
        if done_err + err.sum() <= budget:
            done += fine.sum()
            done_abs += fine_abs.sum()
            done_err += err.sum()
            converged = True
            err = np.zeros(0)
            break
        ok = err <= budget / max(n, 1)
        done += fine[ok].sum()
        done_abs += fine_abs[ok].sum()
        done_err += err[ok].sum()
        bad = np.flatnonzero(~ok)
        panels = kids.take(np.concatenate([bad, bad + n]))
        values = np.concatenate([kv[bad], kv[bad + n]])
        err = err[bad]
    else:
        done += values.sum()
    return QuadResult(complex(done), float(done_err + err.sum()), converged, evals)


def integrate_rows(
    func: Callable[[np.ndarray], np.ndarray],
    breaks: np.ndarray,
    order: int = 16,
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-mesh integrals for a batch of integrands sharing one callable.

    Row i of ``breaks`` (sorted) is the break point list of integrand i and
    ``func`` receives a 2-d array of nodes whose row i belongs to integrand
    i. Returns the bisected-mesh values and |bisected - coarse| per row.
    """
    breaks = np.asarray(breaks, dtype=float)
    mids = 0.5 * (breaks[:, :-1] + breaks[:, 1:])
    fine_breaks = np.empty((breaks.shape[0], 2 * breaks.shape[1] - 1))
    fine_breaks[:, 0::2] = breaks
    fine_breaks[:, 1::2] = mids
    x, w = gauss_legendre(order)
    out = []
    for br, nseg in ((breaks, 2), (fine_breaks, 4)):
        t, wt = kernels.panel_nodes(br, x, w)
        # tails: t = b +- L tan(theta), theta in (0, pi/2)
        th_breaks = np.linspace(0.0, 0.5 * np.pi, nseg + 1)[None, :]
        th, tw = kernels.panel_nodes(th_breaks, x, w)
        parts_t = [t]
        parts_w = [wt]
        for end, sgn in ((br[:, :1], -1.0), (br[:, -1:], 1.0)):
            L = np.maximum(1.0, np.abs(end))
            tt = np.tan(th)
            parts_t.append(end + sgn * L * tt)
            parts_w.append(L * (1.0 + tt * tt) * tw)
        tt_all = np.concatenate(parts_t, axis=1)
        ww_all = np.concatenate(parts_w, axis=1)
        vals = np.asarray(func(tt_all), dtype=complex)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        out.append(kernels.row_dot(vals, ww_all))
    return out[1], np.abs(out[1] - out[0])
