"""The adjoint of C_phi on H^2 of the upper half-plane, three ways.

residue  : sum over t in C+ with psi(t) = z of Res f(s) / (psi(s) - z),
           psi(s) = conj(phi(conj s)); simple preimages carry weight 1/psi'(t)
integral : (1 / 2 pi i) int f(t) / (conj(phi(t)) - z) dt
ac       : boundary values int f d mu_alpha via the Aleksandrov-Clark measures
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ac_measures import aleksandrov_apply, aleksandrov_apply_many, build_measure
from .boundedness import classify_rational
from .errors import NotApplicableError
from .hardy import BoundaryFunction, NonConvergenceWarning, compose, h2_norm, inner_product
from .poly_rational import (
    IM_THRESHOLD,
    RationalMap,
    Root,
    RootSet,
    conj_reflect,
    poly_roots,
    preimages_many,
)
from .quadrature import DEFAULT, QuadratureConfig, break_points, integrate_line, integrate_rows

BACKENDS = ("residue", "integral", "ac")
CLUSTER_TOL = 1e-3
CONTOUR_POINTS = 64
CONTOUR_AGREE = 1e-11
FALLBACK_EPS = 1e-4
_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class AdjointResult:
    value: complex
    backend: str
    z: complex
    preimages_used: RootSet = field(default_factory=lambda: RootSet(()))
    weights: tuple[complex, ...] = ()
    warnings: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "z": [self.z.real, self.z.imag],
            "value": [self.value.real, self.value.imag],
            "preimages": self.preimages_used.to_json(),
            "weights": [[w.real, w.imag] for w in self.weights],
            "warnings": list(self.warnings),
        }


def _require_bounded(phi: RationalMap) -> None:
    verdict = classify_rational(phi)
    if not verdict.bounded:
        raise NotApplicableError(f"C_phi is not bounded for phi = {phi} ({verdict.verdict})")


def _check_z(z) -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"z = {z} must lie in the upper half-plane")
    return z


# -- residue backend ---------------------------------------------------------


def _clusters(roots: Sequence[Root]) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, r in enumerate(roots):
        for g in groups:
            if any(abs(r.location - roots[j].location) < CLUSTER_TOL * (1 + abs(r.location)) for j in g):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _contour(psi: RationalMap, fe, z: complex, centre: complex, radius: float, npts: int):
    """(1/2 pi i) on |s - c| = r of f(s) / (psi(s) - z), and the same with f = 1."""
    s = centre + radius * np.exp(2j * np.pi * np.arange(npts) / npts)
    kern = (s - centre) * psi.den(s) / (psi.num(s) - z * psi.den(s))
    return complex(np.mean(fe(s) * kern)), complex(np.mean(kern))


def adjoint_residue(phi: RationalMap, f: BoundaryFunction, z: complex, cfg: QuadratureConfig | None = None) -> AdjointResult:
    """C_phi^* f(z) from the preimages of z under psi = conj_reflect(phi).

    Preimages closer than CLUSTER_TOL (or reported with multiplicity > 1)
    are treated together by a Cauchy integral on a circle enclosing the
    cluster; when no safe circle exists the integral backend takes over.
    """
    _require_bounded(phi)
    z = _check_z(z)
    if not f.analytic:
        raise NotApplicableError("residue backend needs interior values")
    psi = conj_reflect(phi)
    every = poly_roots(psi.num - psi.den * z)
    notes = list(every.warnings)
    upper = [r for r in every if r.location.imag > IM_THRESHOLD * (1 + abs(r.location))]
    if not upper:
        notes.append(f"no preimages of {z} in the upper half-plane; the sum is empty")
        return AdjointResult(0j, "residue", z, RootSet(()), (), tuple(notes))
    used: list[Root] = []
    weights: list[complex] = []
    value = 0j
    for group in _clusters(upper):
        members = [upper[j] for j in group]
        if len(members) == 1 and members[0].multiplicity == 1:
            t = members[0].location
            w = 1.0 / complex(psi.deriv_eval(t))
            used.append(members[0])
            weights.append(w)
            value += w * f(t)
            continue
        k = sum(r.multiplicity for r in members)
        centre = sum(r.location * r.multiplicity for r in members) / k
        spread = max(abs(r.location - centre) for r in members)
        others = [abs(r.location - centre) for r in every if r not in members]
        radius = min([0.5 * centre.imag] + [0.5 * d for d in others])
        notes.append(f"preimage of multiplicity {k} near {centre:.6g}: residue by contour integral")
        ok = radius > 2 * spread
        if ok:
            v1, w1 = _contour(psi, f.evaluator, z, centre, radius, CONTOUR_POINTS)
            v2, w2 = _contour(psi, f.evaluator, z, centre, radius, 2 * CONTOUR_POINTS)
            ok = abs(v1 - v2) <= CONTOUR_AGREE * (1 + abs(v2)) and abs(w1 - w2) <= CONTOUR_AGREE * (1 + abs(w2))
        if not ok:
            msg = f"no safe contour around the cluster at {centre:.6g}; fell back to the integral backend"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            res = adjoint_integral(phi, f, z, cfg)
            return AdjointResult(res.value, "integral", z, every, (), tuple(notes + [msg] + list(res.warnings)))
        used.append(Root(centre, k))
        weights.append(w2)
        value += v2
    return AdjointResult(complex(value), "residue", z, RootSet(tuple(used), every.residual), tuple(weights), tuple(notes))


def adjoint_residue_many(phi: RationalMap, f: BoundaryFunction, zs, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """adjoint_residue values over an array of z, batched over simple preimages."""
    _require_bounded(phi)
    if not f.analytic:
        raise NotApplicableError("residue backend needs interior values")
    zs = np.asarray(zs, dtype=complex).ravel()
    if np.any(zs.imag <= 0):
        raise ValueError("all z must lie in the upper half-plane")
    psi = conj_reflect(phi)
    r = preimages_many(psi, zs)
    upper = r.imag > IM_THRESHOLD * (1 + np.abs(r))
    dn, dd = psi.num.deriv(), psi.den.deriv()
    den = psi.den(r)
    dpsi = (dn(r) * den - psi.num(r) * dd(r)) / (den * den)
    w = np.where(upper, 1.0 / np.where(upper, dpsi, 1.0), 0.0)
    fv = np.zeros_like(r)
    fv[upper] = f.evaluator(r[upper])
    out = (w * fv).sum(axis=1)
    d = r.shape[1]
    crowded = np.zeros(zs.size, dtype=bool)
    for a in range(d):
        for b in range(a + 1, d):
            near = np.abs(r[:, a] - r[:, b]) < CLUSTER_TOL * (1 + np.abs(r[:, a]))
            crowded |= near & (upper[:, a] | upper[:, b])
    for i in np.flatnonzero(crowded):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out[i] = adjoint_residue(phi, f, zs[i], cfg).value
    return out


# -- integral backend --------------------------------------------------------


def _integral_hints(phi: RationalMap, f: BoundaryFunction, roots) -> tuple[list[float], list[complex]]:
    pts = list(f.poles) + list(phi.real_poles())
    feats = list(f.singularities)
    feats.extend(r.location for r in phi.poles() if abs(r.location.imag) > 1e-9 * (1 + abs(r.location)))
    roots = [complex(t) for t in roots if np.isfinite(t)]
    feats.extend(roots)
    # near a real pole p the integrand varies on the scale |p - root| for the
    # root that escapes toward p as |z| grows
    for p in phi.real_poles():
        d = min((abs(t - p) for t in roots), default=0.0)
        if 0 < d < 1:
            feats.append(complex(p, d))
    return pts, feats


def _check_decay(f: BoundaryFunction) -> None:
    if f.decay <= 0.5:
        raise ValueError(f"{f.name} decays too slowly (exponent {f.decay}) for the adjoint integral")


def adjoint_integral(phi: RationalMap, f: BoundaryFunction, z: complex, cfg: QuadratureConfig | None = None) -> AdjointResult:
    """C_phi^* f(z) by quadrature of (1 / 2 pi i) int f(t) / (conj(phi(t)) - z) dt."""
    _require_bounded(phi)
    _check_decay(f)
    z = _check_z(z)
    psi = conj_reflect(phi)
    pts, feats = _integral_hints(phi, f, poly_roots(psi.num - psi.den * z).locations)
    fe = f.evaluator

    def integrand(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return fe(t) / (np.conj(phi(t)) - z) / _TWO_PI_I

    res = integrate_line(integrand, cfg, pts, feats)
    notes: tuple[str, ...] = ()
    if not res.converged:
        msg = f"adjoint integral at z = {z}: quadrature stopped at error {res.error:.3g}"
        warnings.warn(msg, NonConvergenceWarning, stacklevel=2)
        notes = (msg,)
    return AdjointResult(res.value, "integral", z, RootSet(()), (), notes)


def _pad_rows(rows: list[np.ndarray]) -> np.ndarray:
    width = max(r.size for r in rows)
    out = np.empty((len(rows), width))
    for i, r in enumerate(rows):
        out[i, : r.size] = r
        out[i, r.size :] = r[-1]
    return out


def adjoint_integral_many(phi: RationalMap, f: BoundaryFunction, zs, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """adjoint_integral over an array of z on fixed graded meshes, with adaptive fallback."""
    cfg = cfg or DEFAULT
    _require_bounded(phi)
    _check_decay(f)
    zs = np.asarray(zs, dtype=complex).ravel()
    if np.any(zs.imag <= 0):
        raise ValueError("all z must lie in the upper half-plane")
    psi = conj_reflect(phi)
    roots = preimages_many(psi, zs)
    rows = []
    for i in range(zs.size):
        pts, feats = _integral_hints(phi, f, roots[i])
        rows.append(break_points(pts, feats, grade=False))
    breaks = _pad_rows(rows)
    zc = zs[:, None]
    fe = f.evaluator

    def integrand(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return fe(t) / (np.conj(phi(t)) - zc) / _TWO_PI_I

    vals, errs = integrate_rows(integrand, breaks, order=cfg.order)
    loose = ~(errs <= 10 * cfg.tol * np.maximum(np.abs(vals), 1e-6))
    with warnings.catch_warnings():
        # the caller integrates these values again and checks its own error
        warnings.simplefilter("ignore", NonConvergenceWarning)
        for k in np.flatnonzero(loose):
            vals[k] = adjoint_integral(phi, f, zs[k], cfg).value
    return vals


# -- boundary (Aleksandrov-Clark) backend -------------------------------------


def adjoint_boundary_ac(
    phi: RationalMap,
    f: BoundaryFunction,
    alpha: float,
    probes: Sequence[complex] | None = None,
    cfg: QuadratureConfig | None = None,
) -> AdjointResult:
    """Boundary value of C_phi^* f at real alpha, as int f d mu_alpha."""
    _require_bounded(phi)
    mu = build_measure(phi, alpha, probes, cfg)
    value = aleksandrov_apply(phi, f, alpha, cfg, measure=mu)
    atoms = RootSet(tuple(Root(complex(x), 1) for x in mu.locations), mu.fit_residual)
    return AdjointResult(value, "ac", complex(alpha), atoms, tuple(complex(w) for w in mu.masses), mu.warnings)


def adjoint(
    phi: RationalMap,
    f: BoundaryFunction,
    z: complex,
    backend: str = "residue",
    cfg: QuadratureConfig | None = None,
) -> AdjointResult:
    """Dispatch to one backend; the ac backend takes a real point."""
    if backend == "residue":
        return adjoint_residue(phi, f, z, cfg)
    if backend == "integral":
        return adjoint_integral(phi, f, z, cfg)
    if backend == "ac":
        z = complex(z)
        if z.imag != 0:
            raise ValueError("the ac backend evaluates boundary values; give a real point")
        return adjoint_boundary_ac(phi, f, z.real, cfg=cfg)
    raise ValueError(f"unknown backend {backend!r}; choose from {', '.join(BACKENDS)}")


# -- verification ------------------------------------------------------------


def adjoint_on_line(phi, g, backend, cfg=None, eps: float = 0.0):
    """Vectorised t -> C_phi^* g(t + i eps); eps = 0 only for the ac backend."""
    if backend == "ac":
        return lambda t: aleksandrov_apply_many(phi, g, np.real(t), cfg)
    many = {"residue": adjoint_residue_many, "integral": adjoint_integral_many}[backend]
    return lambda t: many(phi, g, np.asarray(t, dtype=float) + 1j * eps, cfg).reshape(np.shape(t))


def duality_gap(
    phi: RationalMap,
    f: BoundaryFunction,
    g: BoundaryFunction,
    cfg: QuadratureConfig | None = None,
    backend: str = "residue",
) -> float:
    """|<C_phi f, g> - <f, C_phi^* g>| with the adjoint from the chosen backend.

    For the interior backends the right side is integrated along a shifted
    line: int f(t - i e) conj(h(t + i e)) dt equals <f, h> exactly when f is
    analytic on the strip of width e below the axis, with e half of f's strip.
    Without such a strip a small vertical lift is used instead.
    """
    _require_bounded(phi)
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    lhs = inner_product(compose(phi, f), g, cfg)
    fe = f.evaluator
    if backend == "ac":
        h = adjoint_on_line(phi, g, "ac", cfg)
        res = integrate_line(lambda t: fe(t) * np.conj(h(t)), cfg, f.poles, f.singularities)
    else:
        if f.analytic and f.strip > 0:
            eps, shift = 0.5 * f.strip, 0.5 * f.strip
        else:
            eps, shift = FALLBACK_EPS, 0.0
            warnings.warn(
                f"{f.name} has no analytic strip; duality evaluated with a lift of {eps:g}",
                RuntimeWarning,
                stacklevel=2,
            )
        h = adjoint_on_line(phi, g, backend, cfg, eps)
        feats = [complex(s.real, s.imag + shift) for s in f.singularities]
        res = integrate_line(lambda t: fe(t - 1j * shift) * np.conj(h(t)), cfg, f.poles, feats)
    if not res.converged:
        warnings.warn(f"duality integral stopped at error {res.error:.3g}", NonConvergenceWarning, stacklevel=2)
    return float(abs(lhs - res.value))


def isometry_defect(phi: RationalMap, f: BoundaryFunction, cfg: QuadratureConfig | None = None) -> float:
    """| ||C_phi f|| / ||f|| - 1 |."""
    _require_bounded(phi)
    return abs(h2_norm(compose(phi, f), cfg) / h2_norm(f, cfg) - 1.0)
