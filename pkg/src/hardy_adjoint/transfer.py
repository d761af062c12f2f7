"""Disc and half-plane: Mobius maps, the unitary V and the disc operator L_Phi (p = 2)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .boundedness import classify_rational
from .errors import PoleError
from .hardy import BoundaryFunction, compose, h2_norm
from .poly_rational import RationalMap
from .quadrature import QuadratureConfig

DISC_NODES = 512
_SQRT_PI = math.sqrt(math.pi)


def J(w):
    """Disc to upper half-plane, w -> i (1 - w) / (1 + w)."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == -1):
        raise PoleError("J is undefined at w = -1", distance=0.0)
    out = 1j * (1 - w) / (1 + w)
    return complex(out) if out.ndim == 0 else out


def J_inv(s):
    """Upper half-plane to disc, s -> (i - s) / (i + s)."""
    s = np.asarray(s, dtype=complex)
    if np.any(s == -1j):
        raise PoleError("J_inv is undefined at s = -i", distance=0.0)
    out = (1j - s) / (1j + s)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class DiscBoundaryFunction:
    """A function on the closed disc, sampled on the circle by angle.

    ``evaluator`` takes complex points; ``analytic`` says it may be used
    inside the disc. ``flagged`` lists angles where it may be infinite.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    analytic: bool = True
    flagged: tuple[float, ...] = ()
    name: str = "g"

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.asarray(self.evaluator(w), dtype=complex)
        return complex(out) if out.ndim == 0 else out

    def on_circle(self, theta):
        return self(np.exp(1j * np.asarray(theta, dtype=float)))


def monomial(n: int) -> DiscBoundaryFunction:
    return DiscBoundaryFunction(lambda w: w**n + 0j, name=f"z^{n}")


def disc_norm(g: DiscBoundaryFunction, nodes: int = DISC_NODES) -> float:
    """H^2 norm on the circle, (1/2 pi) int |g|^2 d theta, trapezoidal rule."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = g.on_circle(theta)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return math.sqrt(float(np.mean(np.abs(vals) ** 2)))


def V(g: DiscBoundaryFunction, p: float = 2) -> BoundaryFunction:
    """(V g)(s) = g(J^-1(s)) / (sqrt(pi) (i + s))."""
    if p != 2:
        raise NotImplementedError("only p = 2 is implemented")
    ge = g.evaluator

    def ev(s):
        return ge((1j - s) / (1j + s)) / (_SQRT_PI * (1j + s))

    return BoundaryFunction(ev, decay=1.0, singularities=(-1j,), analytic=g.analytic, strip=1.0, name=f"V[{g.name}]")


def V_inv(G: BoundaryFunction, p: float = 2) -> DiscBoundaryFunction:
    """(V^-1 G)(w) = sqrt(pi) (2i / (1 + w)) G(J(w)), using i + J(w) = 2i / (1 + w)."""
    if p != 2:
        raise NotImplementedError("only p = 2 is implemented")
    Ge = G.evaluator

    def ev(w):
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _SQRT_PI * (2j / (1 + w)) * Ge(1j * (1 - w) / (1 + w))

    return DiscBoundaryFunction(ev, analytic=G.analytic, flagged=(math.pi,), name=f"V^-1[{G.name}]")


def disc_symbol(phi: RationalMap):
    """Phi = J^-1 o phi o J as a vectorised function on the disc."""
    return lambda w: J_inv(phi(J(w)))


def weighted_comp_disc(phi: RationalMap, f_disc: DiscBoundaryFunction, z, p: float = 2):
    """L_Phi f(z) = ((1 + Phi(z)) / (1 + z)) f(Phi(z))."""
    if p != 2:
        raise NotImplementedError("only p = 2 is implemented")
    z = np.asarray(z, dtype=complex)
    Phi = disc_symbol(phi)(z)
    out = (1 + Phi) / (1 + z) * f_disc(Phi)
    return complex(out) if np.ndim(out) == 0 else out


def disc_weight(phi: RationalMap, z):
    z = np.asarray(z, dtype=complex)
    out = (1 + disc_symbol(phi)(z)) / (1 + z)
    return complex(out) if out.ndim == 0 else out


def random_disc_points(n: int, seed: int = 0, radius: float = 0.95) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def transfer_check(
    phi: RationalMap,
    cfg: QuadratureConfig | None = None,
    seed: int = 0,
    samples: int = 20,
    nodes: int = DISC_NODES,
    tol: float = 1e-7,
) -> dict:
    """Unitarity of V, the two-path identity V^-1 C_phi V = L_Phi, and the weight growth near -1."""
    basis = [monomial(n) for n in range(4)]
    unitarity = {}
    for g in basis:
        unitarity[g.name] = abs(h2_norm(V(g), cfg) - disc_norm(g, nodes))
    pts = random_disc_points(samples, seed)
    two_path = 0.0
    for g in basis:
        lhs = V_inv(compose(phi, V(g)))(pts)
        rhs = weighted_comp_disc(phi, g, pts)
        two_path = max(two_path, float(np.max(np.abs(lhs - rhs))))
    deltas = 10.0 ** -np.arange(1, 7)
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.abs(disc_weight(phi, -1 + deltas))
    grows = bool(np.all(np.diff(weights) > 0) and weights[-1] >= 1e3 * weights[0])
    bounded = classify_rational(phi).bounded
    return {
        "symbol": str(phi),
        "unitarity": {"defects": unitarity, "max": max(unitarity.values()), "pass": max(unitarity.values()) <= tol},
        "two_path": {"max_error": two_path, "samples": samples, "seed": seed, "pass": two_path <= tol},
        "weight_near_minus_one": {
            "delta": deltas.tolist(),
            "abs_weight": weights.tolist(),
            "blows_up": grows,
            "classifier_bounded": bounded,
            "consistent": bounded is None or grows != bounded,
        },
    }
