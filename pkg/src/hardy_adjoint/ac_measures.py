"""Aleksandrov-Clark measures of bounded rational symbols.

For a self-map phi of the upper half-plane and real alpha, the positive
harmonic function

    v_alpha(z) = Re(i (1 + alpha phi(z)) / (phi(z) - alpha)) / (pi (1 + alpha^2))

is the Poisson integral of a measure mu_alpha plus c_alpha Im z. Here
mu_alpha splits into a density, nonzero where phi is not real on the line,
and atoms at the real solutions of phi(x) = alpha.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .boundedness import classify_rational
from .errors import ConditioningError, ConsistencyError, NotApplicableError
from . import kernels
from .hardy import BoundaryFunction, NonConvergenceWarning, poisson
from .poly_rational import AMBIGUOUS_THRESHOLD, IM_THRESHOLD, Poly, RationalMap, preimages_many, preimages_upper
from .quadrature import DEFAULT, QuadratureConfig, break_points, integrate_line, integrate_rows

REAL_VALUE_TOL = 1e-10
COND_LIMIT = 1e10
C_FIT_LIMIT = 1e-6


def _require_bounded(phi: RationalMap) -> None:
    verdict = classify_rational(phi)
    if not verdict.bounded:
        raise NotApplicableError(f"symbol {phi} is {verdict.verdict}; AC data needs a bounded symbol")


def v_alpha(phi: RationalMap, alpha: float, z):
    """The harmonic function whose Herglotz data is (mu_alpha, c_alpha)."""
    w = phi(z)
    val = (1j * (1 + alpha * w) / (w - alpha)).real
    return val / (math.pi * (1 + alpha * alpha))


def _boundary_imag(phi: RationalMap) -> Poly:
    """Real polynomial Q with Im phi(x) = Q(x) / |den(x)|^2 on the line."""
    prod = phi.num * phi.den.conj()
    return Poly(tuple(c.imag for c in prod.coeffs))


def _real_value_band(phi: RationalMap, x) -> np.ndarray:
    """True where phi(x) counts as real: |Im phi| <= REAL_VALUE_TOL (1 + |phi|)."""
    x = np.asarray(x, dtype=float)
    num, den = np.abs(phi.num(x + 0j)), np.abs(phi.den(x + 0j))
    q = np.abs(_boundary_imag(phi)(x + 0j).real)
    with np.errstate(divide="ignore", invalid="ignore"):
        return q <= REAL_VALUE_TOL * (den * den + num * den)


def _density_values(phi: RationalMap, alpha, t, roots=None):
    """Q(t) / (pi |num(t) - alpha den(t)|^2), the second factor from its roots.

    Both factors avoid forming phi(t) - alpha, which cancels badly near a
    sharp peak. ``alpha`` is a scalar with any shape of ``t``, or a column
    (M, 1) with ``t`` of shape (M, N).
    """
    t = np.real(np.asarray(t))
    a = np.asarray(alpha, dtype=float)
    if roots is None:
        roots = preimages_many(phi, a.ravel())
    diff = t[..., None] - (roots[0] if a.ndim == 0 else roots[:, None, :])
    lead = abs(phi.num.leading) if phi.n > phi.m else abs(phi.num.leading - a * phi.den.leading)
    n2 = lead**2 * np.prod(np.abs(diff) ** 2, axis=-1)
    q = _boundary_imag(phi)(t + 0j).real
    with np.errstate(divide="ignore", invalid="ignore"):
        val = q / (np.pi * n2)
    return np.where(_real_value_band(phi, t) | ~np.isfinite(val), 0.0, val)


def _density_features(phi: RationalMap, alpha: float) -> list[complex]:
    feats = [r.location for r in preimages_upper(phi, alpha, "all")]
    feats.extend(r.location for r in phi.poles() if r.location.imag != 0)
    return [f for f in feats if f.imag != 0]


def ac_density(phi: RationalMap, alpha: float) -> BoundaryFunction:
    """Absolutely continuous part of mu_alpha.

    Im phi / (pi |phi - alpha|^2) where phi is not real, else 0. This equals
    v_alpha evaluated on the boundary.
    """
    _require_bounded(phi)
    alpha = float(alpha)
    roots = preimages_many(phi, [alpha])
    return BoundaryFunction(
        lambda t: _density_values(phi, alpha, t, roots).astype(complex),
        decay=2.0,
        poles=tuple(phi.real_poles()),
        singularities=tuple(_density_features(phi, alpha)),
        name=f"density[alpha={alpha:g}]",
    )


def singular_support(phi: RationalMap, alpha: float) -> list[float]:
    """Real solutions of phi(x) = alpha, where the atoms of mu_alpha sit."""
    _require_bounded(phi)
    xs = [r.location.real for r in preimages_upper(phi, float(alpha), "real")]
    # a candidate counts only if phi really is real there
    return sorted(x for x in xs if _real_value_band(phi, x))


class AtomFit(NamedTuple):
    locations: tuple[float, ...]
    masses: tuple[float, ...]
    c: float
    fit_residual: float
    method: str


def default_probes(locations: Sequence[float]) -> list[complex]:
    """x_bar + i 2^k for k = 0..#atoms+2.

    With two or more atoms, probes on one vertical line can see mirror-image
    atoms identically, so the last #atoms probes sit above each atom instead.
    """
    locs = sorted(float(x) for x in locations)
    centre = float(np.mean(locs)) if locs else 0.0
    probes = [complex(centre, 2.0**k) for k in range(len(locs) + 3)]
    if len(locs) >= 2:
        gap = float(np.min(np.diff(locs)))
        h = min(1.0, max(0.5 * gap, 1e-3))
        probes[3:] = [complex(x, h) for x in locs]
    return probes


def _density_poisson_integrals(phi, alpha, probes, cfg) -> np.ndarray:
    if phi.is_real():
        return np.zeros(len(probes))
    feats = _density_features(phi, alpha)
    pts = phi.real_poles()
    roots = preimages_many(phi, [alpha])
    out = []
    for z in probes:
        P = poisson(z.real, z.imag).evaluator
        res = integrate_line(
            lambda t: P(t) * _density_values(phi, alpha, t, roots), cfg, pts, feats + [complex(z)]
        )
        if not res.converged:
            warnings.warn(f"density integral at probe {z} did not converge", NonConvergenceWarning)
        out.append(res.value.real)
    return np.array(out)


def atom_masses_linear_system(
    phi: RationalMap,
    alpha: float,
    probes: Sequence[complex] | None = None,
    cfg: QuadratureConfig | None = None,
) -> AtomFit:
    """Atom masses and c_alpha by collocating the Herglotz representation.

    At each probe z_k = x_k + i y_k,
    v_alpha(z_k) - (P * density)(z_k) = c y_k + sum_j P_{y_k}(x_k - x_j) w_j,
    solved for (w, c) in least squares.
    """
    alpha = float(alpha)
    locs = singular_support(phi, alpha)
    probes = [complex(z) for z in (probes if probes is not None else default_probes(locs))]
    if len(probes) < len(locs) + 1:
        raise ValueError(f"need at least {len(locs) + 1} probes for {len(locs)} atoms")
    if any(not z.imag > 0 for z in probes):
        raise ValueError("probes must lie in the upper half-plane")
    x = np.array([z.real for z in probes])
    y = np.array([z.imag for z in probes])
    rhs = v_alpha(phi, alpha, np.array(probes)) - _density_poisson_integrals(phi, alpha, probes, cfg)
    A = np.empty((len(probes), len(locs) + 1))
    for j, xj in enumerate(locs):
        A[:, j] = y / (np.pi * ((x - xj) ** 2 + y**2))
    A[:, -1] = y
    cond = np.linalg.cond(A)
    if not cond <= COND_LIMIT:
        raise ConditioningError(f"probe matrix condition number {cond:.3g}; choose other probes")
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    resid = float(np.max(np.abs(A @ sol - rhs)))
    return AtomFit(tuple(locs), tuple(float(w) for w in sol[:-1]), float(sol[-1]), resid, "linear-system")


def atom_masses_derivative(phi: RationalMap, alpha: float) -> AtomFit:
    """Heuristic cross-check: mass 1/phi'(x) at each real preimage x.

    Only used to validate the linear-system masses.
    """
    locs = singular_support(phi, alpha)
    masses = []
    for x in locs:
        d = complex(phi.deriv_eval(complex(x)))
        if abs(d) < 1e-12:
            raise ConditioningError(f"critical boundary point at x = {x}")
        masses.append(1.0 / d.real)
    return AtomFit(tuple(locs), tuple(masses), 0.0, 0.0, "derivative (heuristic)")


class CCoefficient(NamedTuple):
    value: float
    fitted: float


def c_coefficient(
    phi: RationalMap, alpha: float, probes: Sequence[complex] | None = None, cfg: QuadratureConfig | None = None
) -> CCoefficient:
    """c_alpha, which vanishes for bounded rational symbols since phi(oo) = oo.

    The collocation fit is returned alongside as a diagnostic.
    """
    fit = atom_masses_linear_system(phi, alpha, probes, cfg)
    if abs(fit.c) > C_FIT_LIMIT:
        raise ConsistencyError(f"fitted c_alpha = {fit.c:.3g} at alpha = {alpha}, expected 0")
    return CCoefficient(0.0, fit.c)


@dataclass(frozen=True, eq=False)
class ACMeasure:
    alpha: float
    atoms: tuple[tuple[float, float], ...]
    density: BoundaryFunction
    c: float
    fit_residual: float
    fitted_c: float
    has_density: bool
    warnings: tuple[str, ...] = field(default=())

    @property
    def locations(self) -> list[float]:
        return [a[0] for a in self.atoms]

    @property
    def masses(self) -> list[float]:
        return [a[1] for a in self.atoms]

    def density_mass(self, cfg: QuadratureConfig | None = None) -> float:
        if not self.has_density:
            return 0.0
        d = self.density
        res = integrate_line(d.evaluator, cfg, d.poles, d.singularities)
        return res.value.real

    def poisson_integral(self, z, cfg: QuadratureConfig | None = None):
        """int P_y(x - t) d mu_alpha(t) at z = x + i y; v_alpha(z) - c y when the fit is right."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        locs = np.array(self.locations, dtype=float)
        masses = np.array(self.masses, dtype=float)
        out = kernels.poisson_atoms(flat.real.copy(), flat.imag.copy(), locs, masses)
        if self.has_density:
            d = self.density
            for k, zk in enumerate(flat):
                P = poisson(zk.real, zk.imag).evaluator
                res = integrate_line(lambda t: P(t) * d.evaluator(t), cfg, d.poles, list(d.singularities) + [complex(zk)])
                out[k] += res.value.real
        out = out.reshape(z.shape)
        return float(out) if out.ndim == 0 else out

    def total_mass(self, cfg: QuadratureConfig | None = None) -> float:
        return float(sum(self.masses)) + self.density_mass(cfg)

    def to_json(self, grid: Sequence[float] | None = None, cfg: QuadratureConfig | None = None) -> dict:
        grid = np.linspace(-10.0, 10.0, 41) if grid is None else np.asarray(grid, dtype=float)
        dens = self.density(grid).real if self.has_density else np.zeros(grid.size)
        return {
            "alpha": self.alpha,
            "atoms": [{"location": x, "mass": w} for x, w in self.atoms],
            "c": self.c,
            "fitted_c": self.fitted_c,
            "fit_residual": self.fit_residual,
            "total_mass": self.total_mass(cfg),
            "density": {"grid": grid.tolist(), "values": dens.tolist()},
            "warnings": list(self.warnings),
        }


def build_measure(
    phi: RationalMap,
    alpha: float,
    probes: Sequence[complex] | None = None,
    cfg: QuadratureConfig | None = None,
) -> ACMeasure:
    alpha = float(alpha)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        density = ac_density(phi, alpha)
        fit = atom_masses_linear_system(phi, alpha, probes, cfg)
    if abs(fit.c) > C_FIT_LIMIT:
        raise ConsistencyError(f"fitted c_alpha = {fit.c:.3g} at alpha = {alpha}, expected 0")
    return ACMeasure(
        alpha=alpha,
        atoms=tuple(zip(fit.locations, fit.masses)),
        density=density,
        c=0.0,
        fit_residual=fit.fit_residual,
        fitted_c=fit.c,
        has_density=not phi.is_real(),
        warnings=tuple(str(w.message) for w in caught),
    )


def aleksandrov_apply(
    phi: RationalMap,
    f: BoundaryFunction,
    alpha: float,
    cfg: QuadratureConfig | None = None,
    measure: ACMeasure | None = None,
) -> complex:
    """A_phi f(alpha) = int f d mu_alpha."""
    mu = measure if measure is not None else build_measure(phi, alpha, cfg=cfg)
    if f.decay + 2.0 <= 1.0:
        raise ValueError(f"{f.name} is not integrable against mu_alpha")
    value = sum(w * f(complex(x)) for x, w in mu.atoms) if mu.atoms else 0j
    if mu.has_density:
        d = mu.density
        fe, de = f.evaluator, d.evaluator
        res = integrate_line(
            lambda t: fe(t) * de(t), cfg, list(d.poles) + list(f.poles), list(d.singularities) + list(f.singularities)
        )
        if not res.converged:
            warnings.warn(f"A_phi {f.name} at alpha = {alpha}: quadrature did not converge", NonConvergenceWarning)
        value += res.value
    return complex(value)


def _pad_rows(rows: list[np.ndarray]) -> np.ndarray:
    width = max(r.size for r in rows)
    out = np.empty((len(rows), width))
    for i, r in enumerate(rows):
        out[i, : r.size] = r
        out[i, r.size :] = r[-1]
    return out


def _atomic_many(phi: RationalMap, f: BoundaryFunction, alphas: np.ndarray) -> np.ndarray:
    """Batched linear-system masses for a real-coefficient symbol.

    Rows whose real preimage count differs from the typical one, or whose
    probe matrix is ill conditioned, go through the scalar path.
    """
    out = np.empty(alphas.size, dtype=complex)
    roots = preimages_many(phi, alphas)
    is_real = np.abs(roots.imag) <= IM_THRESHOLD * (1 + np.abs(roots))
    count = is_real.sum(axis=1)
    n = int(np.bincount(count).argmax())
    rows = np.flatnonzero(count == n)
    slow = list(np.flatnonzero(count != n))
    if n == 0:
        out[rows] = 0.0
    elif rows.size:
        x = np.sort(np.where(is_real[rows], roots[rows].real, np.inf), axis=1)[:, :n]
        centre = x.mean(axis=1)
        K = n + 3
        pz = np.empty((rows.size, K), dtype=complex)
        pz[:, :] = centre[:, None] + 1j * 2.0 ** np.arange(K)
        if n >= 2:
            gap = np.diff(x, axis=1).min(axis=1)
            h = np.clip(0.5 * gap, 1e-3, 1.0)
            pz[:, 3:] = x + 1j * h[:, None]
        px, py = pz.real[:, :, None], pz.imag[:, :, None]
        A = np.empty((rows.size, K, n + 1))
        A[:, :, :n] = py / (np.pi * ((px - x[:, None, :]) ** 2 + py**2))
        A[:, :, n] = pz.imag
        rhs = v_alpha(phi, alphas[rows][:, None], pz)
        cond = np.linalg.cond(A)
        sol = np.einsum("mij,mj->mi", np.linalg.pinv(A), rhs)
        vals = (sol[:, :n] * f.evaluator(x)).sum(axis=1)
        good = cond <= COND_LIMIT
        out[rows[good]] = vals[good]
        slow.extend(rows[~good])
    for i in slow:
        fit = atom_masses_linear_system(phi, alphas[i])
        out[i] = sum(w * f(complex(x)) for x, w in zip(fit.locations, fit.masses))
    return out


def aleksandrov_apply_many(
    phi: RationalMap,
    f: BoundaryFunction,
    alphas,
    cfg: QuadratureConfig | None = None,
) -> np.ndarray:
    """aleksandrov_apply over an array of alpha values, batched."""
    cfg = cfg or DEFAULT
    _require_bounded(phi)
    alphas = np.asarray(alphas, dtype=float).ravel()
    if phi.is_real():
        return _atomic_many(phi, f, alphas)
    out = np.zeros(alphas.size, dtype=complex)
    roots = preimages_many(phi, alphas)
    hits = (np.abs(roots.imag) <= AMBIGUOUS_THRESHOLD * (1 + np.abs(roots))) & _real_value_band(phi, roots.real)
    mixed = np.flatnonzero(hits.any(axis=1))
    for i in mixed:
        out[i] = aleksandrov_apply(phi, f, alphas[i], cfg)
    todo = np.flatnonzero(~hits.any(axis=1))
    if todo.size == 0:
        return out
    complex_poles = [r.location for r in phi.poles() if abs(r.location.imag) > 1e-9 * (1 + abs(r.location))]
    real_pts = list(phi.real_poles()) + list(f.poles)
    feats = complex_poles + list(f.singularities)
    rows = [break_points(real_pts, list(roots[i]) + feats, grade=False) for i in todo]
    breaks = _pad_rows(rows)
    a_col = alphas[todo][:, None]
    fe = f.evaluator

    r_todo = roots[todo]

    def integrand(t):
        return fe(t) * _density_values(phi, a_col, t, r_todo)

    vals, errs = integrate_rows(integrand, breaks, order=cfg.order)
    loose = ~(errs <= 10 * cfg.tol * np.maximum(np.abs(vals), 1e-6))
    with warnings.catch_warnings():
        # the caller integrates these values again and checks its own error
        warnings.simplefilter("ignore", NonConvergenceWarning)
        for k in np.flatnonzero(loose):
            vals[k] = aleksandrov_apply(phi, f, alphas[todo[k]], cfg)
    out[todo] = vals
    return out


def sweep(
    phi: RationalMap,
    alphas: Sequence[float],
    probes: Sequence[complex] | None = None,
    cfg: QuadratureConfig | None = None,
    threads: int | None = None,
) -> list[ACMeasure]:
    """Measures for many alpha values, built in parallel, returned in order."""
    if threads is None:
        threads = int(os.environ.get("HARDY_ADJOINT_THREADS", "0") or 0) or (os.cpu_count() or 1)
    if threads <= 1:
        return [build_measure(phi, a, probes, cfg) for a in alphas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda a: build_measure(phi, a, probes, cfg), alphas))


def sweep_csv_rows(measures: Sequence[ACMeasure], cfg: QuadratureConfig | None = None) -> list[list]:
    """Rows (alpha, atom_count, locations..., masses..., total_mass, c, fit_residual)."""
    k = max((len(m.atoms) for m in measures), default=0)
    header = (
        ["alpha", "atom_count"]
        + [f"location_{j + 1}" for j in range(k)]
        + [f"mass_{j + 1}" for j in range(k)]
        + ["total_mass", "c", "fit_residual"]
    )
    rows: list[list] = [header]
    for m in measures:
        pad = [""] * (k - len(m.atoms))
        rows.append(
            [m.alpha, len(m.atoms)]
            + m.locations
            + pad
            + m.masses
            + pad
            + [m.total_mass(cfg), m.c, m.fit_residual]
        )
    return rows
