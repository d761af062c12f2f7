"""Boundary functions on the real line, H^2 inner products and kernels."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NotApplicableError
from .poly_rational import RationalMap, preimages_upper
from .quadrature import DEFAULT, QuadratureConfig, QuadResult, integrate_line


class NonConvergenceWarning(RuntimeWarning):
    """Adaptive quadrature stopped before meeting its tolerance."""


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """A function on the real line with the metadata quadrature needs.

    ``evaluator`` is vectorised over numpy arrays and, when ``analytic`` is
    set, valid at complex points of the closed upper half-plane (and on the
    strip -strip < Im z <= 0 below it). ``poles`` are real break points
    (singularities or kinks); ``singularities`` are off-axis singular points
    that set the local quadrature scale.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    decay: float
    poles: tuple[float, ...] = ()
    singularities: tuple[complex, ...] = ()
    analytic: bool = False
    strip: float = 0.0
    name: str = "f"

    def __call__(self, z):
        if np.ndim(z) == 0:
            return complex(self.evaluator(np.asarray([z], dtype=complex))[0])
        return np.asarray(self.evaluator(np.asarray(z, dtype=complex)), dtype=complex)

    def __add__(self, other: "BoundaryFunction") -> "BoundaryFunction":
        return combine([(1.0, self), (1.0, other)])

    def __mul__(self, c: complex) -> "BoundaryFunction":
        return combine([(c, self)])

    __rmul__ = __mul__

    def renamed(self, name: str) -> "BoundaryFunction":
        return replace(self, name=name)


def combine(terms: Sequence[tuple[complex, BoundaryFunction]]) -> BoundaryFunction:
    """Linear combination sum c_k f_k with merged metadata."""
    terms = [(complex(c), f) for c, f in terms]

    def ev(z):
        out = np.zeros(np.shape(z), dtype=complex)
        for c, f in terms:
            out += c * f.evaluator(z)
        return out

    return BoundaryFunction(
        ev,
        decay=min(f.decay for _, f in terms),
        poles=tuple(sorted({p for _, f in terms for p in f.poles})),
        singularities=tuple(s for _, f in terms for s in f.singularities),
        analytic=all(f.analytic for _, f in terms),
        strip=min(f.strip for _, f in terms),
        name=" + ".join(f"{c:g}*{f.name}" for c, f in terms),
    )


# -- test function library ---------------------------------------------------


def poisson(x: float, y: float) -> BoundaryFunction:
    """t -> P_y(x - t) = y / (pi ((x - t)^2 + y^2))."""
    if not y > 0:
        raise ValueError("Poisson kernel needs y > 0")

    def ev(t):
        return (y / np.pi) / ((x - t) ** 2 + y * y)

    return BoundaryFunction(
        ev, decay=2.0, singularities=(complex(x, y), complex(x, -y)), name=f"P[{x:g},{y:g}]"
    )


def kernel_k(w: complex) -> BoundaryFunction:
    """Unnormalised kernel t -> 1 / (conj(w) - t)."""
    w = complex(w)
    if not w.imag > 0:
        raise ValueError("kernel point must lie in the upper half-plane")
    wc = w.conjugate()
    return BoundaryFunction(
        lambda t: 1.0 / (wc - t),
        decay=1.0,
        singularities=(wc,),
        analytic=True,
        strip=w.imag,
        name=f"k[{w:g}]",
    )


def kernel_K(w: complex) -> BoundaryFunction:
    """Reproducing kernel of H^2: <f, K_w> = f(w). K_w(t) = 1/(2 pi i (conj(w) - t))."""
    w = complex(w)
    if not w.imag > 0:
        raise ValueError("kernel point must lie in the upper half-plane")
    wc = w.conjugate()
    c = 1.0 / (2j * np.pi)
    return BoundaryFunction(
        lambda t: c / (wc - t),
        decay=1.0,
        singularities=(wc,),
        analytic=True,
        strip=w.imag,
        name=f"K[{w:g}]",
    )


def f_p(p: float = 2.0) -> BoundaryFunction:
    """t -> 1 / (1 + |t|^(2/p)), in L^p but not analytic."""
    e = 2.0 / p
    return BoundaryFunction(
        lambda t: 1.0 / (1.0 + np.abs(t) ** e), decay=e, poles=(0.0,), name=f"f_{p:g}"
    )


def g_p(p: float = 2.0) -> BoundaryFunction:
    """t -> (i + t)^(-2/p), principal branch; in H^p."""
    e = 2.0 / p
    if p == 2.0:
        ev = lambda t: 1.0 / (1j + t)
    else:
        ev = lambda t: (1j + t) ** (-e)
    return BoundaryFunction(
        ev, decay=e, singularities=(-1j,), analytic=True, strip=1.0, name=f"g_{p:g}"
    )


# -- quadrature entry points -------------------------------------------------


def _hints(*fns: BoundaryFunction) -> tuple[list[float], list[complex]]:
    pts: list[float] = []
    feats: list[complex] = []
    for f in fns:
        pts.extend(f.poles)
        feats.extend(f.singularities)
    return pts, feats


def _checked(res: QuadResult, what: str) -> complex:
    if not res.converged:
        warnings.warn(
            f"{what}: quadrature stopped at error {res.error:.3g}", NonConvergenceWarning, stacklevel=3
        )
    return res.value


def integrate(f: BoundaryFunction, cfg: QuadratureConfig | None = None) -> complex:
    """Integral of f over the real line."""
    if f.decay <= 1:
        raise ValueError(f"{f.name}: decay {f.decay} is too slow for absolute convergence")
    pts, feats = _hints(f)
    return _checked(integrate_line(f.evaluator, cfg, pts, feats), f"integral of {f.name}")


def integrate_result(f: BoundaryFunction, cfg: QuadratureConfig | None = None) -> QuadResult:
    pts, feats = _hints(f)
    return integrate_line(f.evaluator, cfg, pts, feats)


def inner_product(f: BoundaryFunction, g: BoundaryFunction, cfg: QuadratureConfig | None = None) -> complex:
    """<f, g> = int f conj(g) dt."""
    if f.decay + g.decay <= 1:
        raise ValueError(f"<{f.name}, {g.name}>: combined decay {f.decay + g.decay} <= 1")
    pts, feats = _hints(f, g)
    fe, ge = f.evaluator, g.evaluator

    def integrand(t):
        return fe(t) * np.conj(ge(t))

    return _checked(integrate_line(integrand, cfg, pts, feats), f"<{f.name}, {g.name}>")


def h2_norm(f: BoundaryFunction, cfg: QuadratureConfig | None = None) -> float:
    if f.decay <= 0.5:
        raise ValueError(f"{f.name} is not square integrable (decay {f.decay})")
    ip = inner_product(f, f, cfg)
    if abs(ip.imag) > 1e-10 * (1 + abs(ip.real)):
        warnings.warn(f"|{f.name}|^2 has imaginary part {ip.imag:.3g}", NonConvergenceWarning, stacklevel=2)
    return math.sqrt(max(ip.real, 0.0))


def reproduce(
    f: BoundaryFunction, z: complex, mode: str = "cauchy", cfg: QuadratureConfig | None = None
) -> complex:
    """Recover f(z) from boundary values: Poisson or Cauchy (<f, K_z>) integral."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("z must lie in the upper half-plane")
    if mode == "poisson":
        P = poisson(z.real, z.imag)
        pts, feats = _hints(f, P)
        fe, pe = f.evaluator, P.evaluator
        res = integrate_line(lambda t: pe(t) * fe(t), cfg, pts, feats)
        return _checked(res, f"Poisson extension of {f.name}")
    if mode == "cauchy":
        return inner_product(f, kernel_K(z), cfg)
    raise ValueError(f"unknown mode {mode!r}")


def poisson_extend(f: BoundaryFunction, y: float, cfg: QuadratureConfig | None = None) -> BoundaryFunction:
    """Boundary function x -> (P_y * f)(x), evaluated by quadrature per point."""

    def ev(x):
        x = np.asarray(x)
        out = np.empty(x.shape, dtype=complex)
        for idx, xv in np.ndenumerate(x):
            out[idx] = reproduce(f, complex(float(np.real(xv)), y), "poisson", cfg)
        return out

    return BoundaryFunction(
        ev,
        decay=min(f.decay, 2.0),
        poles=(),
        singularities=tuple(complex(s.real, math.copysign(abs(s.imag) + y, s.imag or 1.0)) for s in f.singularities)
        + tuple(complex(p, y) for p in f.poles),
        name=f"P{y:g}*{f.name}",
    )


def compose(phi: RationalMap, f: BoundaryFunction) -> BoundaryFunction:
    """C_phi f = f o phi as a boundary function."""
    real_poles = phi.real_poles()
    poles = set(real_poles)
    feats: list[complex] = []
    for p in f.poles:
        try:
            for r in preimages_upper(phi, p, "all"):
                t = r.location
                if abs(t.imag) <= 1e-9 * (1 + abs(t)):
                    poles.add(t.real)
                else:
                    feats.append(t)
        except NotApplicableError:
            pass
    for s in f.singularities:
        try:
            feats.extend(r.location for r in preimages_upper(phi, s, "all"))
        except NotApplicableError:
            pass
    feats.extend(
        r.location for r in phi.poles() if abs(r.location.imag) > 1e-9 * (1 + abs(r.location))
    )
    fe = f.evaluator
    decays_with = f.decay > 0

    def ev(t):
        w = phi(np.asarray(t, dtype=complex))
        bad = ~np.isfinite(w)
        if bad.any():
            w = np.where(bad, 0.0, w)
            out = np.asarray(fe(w), dtype=complex)
            return np.where(bad, 0.0 if decays_with else np.nan, out)
        return fe(w)

    grows = phi.n == phi.m + 1
    return BoundaryFunction(
        ev,
        decay=f.decay if grows else 0.0,
        poles=tuple(sorted(poles)),
        singularities=tuple(feats),
        analytic=f.analytic,
        strip=0.0,
        name=f"{f.name}o phi",
    )
