"""Boundedness decisions for composition operators with rational symbols.

A rational self-map r = a/b of the upper half-plane induces a bounded
composition operator on H^p and L^p (any 1 <= p < oo) exactly when
deg a = deg b + 1, i.e. when r fixes the point at infinity.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotApplicableError
from .poly_rational import IM_THRESHOLD, Poly, RationalMap, poly_roots

SELFMAP_TOL = 1e-9
RATIO_TOL = 1e-10
REAL_COEFF_TOL = 1e-14


@dataclass(frozen=True)
class Condition:
    name: str
    status: str  # "pass", "fail" or "not applicable"
    detail: str

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass(frozen=True)
class SelfMapVerdict:
    value: bool
    method: str
    reasons: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.value

    def to_json(self) -> dict:
        return {"is_selfmap": self.value, "method": self.method, "reasons": list(self.reasons)}


@dataclass(frozen=True)
class ObstructionWitness:
    """Evidence that C_r cannot be bounded: |r(x)| < K on |x| > N."""

    kind: str
    K: float
    N: float
    test_function: str = "f_2"

    def tail_lower_bound(self, R: float) -> float:
        """Lower bound for int_{N<|x|<R} |f_2(r(x))|^2 dx, unbounded in R."""
        if R <= self.N:
            return 0.0
        return 2.0 * (R - self.N) / (1.0 + self.K) ** 2

    def to_json(self) -> dict:
        return {"kind": self.kind, "K": self.K, "N": self.N, "test_function": self.test_function}


@dataclass(frozen=True)
class SymbolClassification:
    """Boundedness verdict with the data it was read from.

    ``bounded`` is None when the symbol is not a self-map of the upper
    half-plane, in which case the question does not apply.
    """

    bounded: bool | None
    is_selfmap: bool
    selfmap_method: str
    n: int
    m: int
    leading_ratio: complex
    constant_ratio: complex | str
    at_infinity: complex
    reasons: tuple[str, ...] = ()
    conditions: tuple[Condition, ...] = ()
    obstruction: ObstructionWitness | None = None

    @property
    def verdict(self) -> str:
        if self.bounded is None:
            return "not applicable"
        return "bounded" if self.bounded else "unbounded"

    def to_json(self) -> dict:
        cr = self.constant_ratio
        return {
            "bounded": self.bounded,
            "verdict": self.verdict,
            "is_selfmap": self.is_selfmap,
            "selfmap_method": self.selfmap_method,
            "n": self.n,
            "m": self.m,
            "leading_ratio": [self.leading_ratio.real, self.leading_ratio.imag],
            "constant_ratio": cr if isinstance(cr, str) else [cr.real, cr.imag],
            "at_infinity": "infinity"
            if math.isinf(self.at_infinity.real)
            else [self.at_infinity.real, self.at_infinity.imag],
            "reasons": list(self.reasons),
            "conditions": [c.to_json() for c in self.conditions],
            "obstruction": self.obstruction.to_json() if self.obstruction else None,
        }


def _boundary_imag_poly(r: RationalMap) -> Poly:
    """Polynomial B with Im r(x) = B(x) / |den(x)|^2 for real x."""
    prod = r.num * r.den.conj()
    return Poly(tuple(complex(c.imag, 0.0) for c in prod.coeffs))


def _real_roots(p: Poly) -> list[float]:
    if p.degree() < 1:
        return []
    out = []
    for root in poly_roots(p):
        t = root.location
        if abs(t.imag) <= 1e-7 * (1 + abs(t)):
            out.append(t.real)
    return sorted(out)


def _imag_ok(r: RationalMap, x: np.ndarray) -> np.ndarray:
    w = r(x.astype(complex))
    finite = np.isfinite(w)
    ok = np.ones(x.shape, dtype=bool)
    ok[finite] = w[finite].imag >= -SELFMAP_TOL * (1 + np.abs(w[finite]))
    return ok


def _interior_grid() -> np.ndarray:
    re = np.linspace(-10.0, 10.0, 20)
    im = np.geomspace(1e-3, 10.0, 20)
    return (re[:, None] + 1j * im[None, :]).ravel()


@functools.lru_cache(maxsize=256)
def is_selfmap(r: RationalMap) -> SelfMapVerdict:
    """Decide whether r maps the upper half-plane into its closure.

    Checks, in order: no poles in the open upper half-plane; Im r >= 0 on the
    real line (skipped for real coefficients, where it vanishes identically);
    Im r >= 0 on a 20x20 interior grid, which catches maps such as z**2
    whose boundary imaginary part is identically zero.
    """
    if r.is_constant():
        raise NotApplicableError("constant map")
    reasons = []
    for pole in r.poles():
        t = pole.location
        if t.imag > IM_THRESHOLD * (1 + abs(t)):
            return SelfMapVerdict(False, "pole check", (f"pole at {t} in the upper half-plane",))
    reasons.append("no poles in the open upper half-plane")

    if r.is_real():
        method = "real-coefficient fast path + interior grid"
        reasons.append("real coefficients: Im r vanishes on the real line")
    else:
        method = "boundary sign analysis + interior grid"
        B = _boundary_imag_poly(r)
        roots = _real_roots(B)
        probes = []
        if roots:
            probes.extend(0.5 * (a + b) for a, b in zip(roots[:-1], roots[1:]))
            probes.extend([roots[0] - 1.0, roots[-1] + 1.0])
        t = np.tan(np.linspace(-np.pi / 2, np.pi / 2, 2003)[1:-1])
        x = np.concatenate([np.array(probes, dtype=float), t])
        bad = ~_imag_ok(r, x)
        if bad.any():
            return SelfMapVerdict(
                False, method, (f"Im r(x) < 0 at real x = {x[bad][0]:.6g}",)
            )
        reasons.append(f"Im r >= 0 on the real line ({len(roots)} sign-change candidates)")

    z = _interior_grid()
    w = r(z)
    finite = np.isfinite(w)
    neg = finite & (w.imag < -SELFMAP_TOL)
    if neg.any():
        k = int(np.argmax(neg))
        return SelfMapVerdict(
            False, method, (f"Im r(z) = {w[k].imag:.3g} < 0 at interior point z = {z[k]:.4g}",)
        )
    reasons.append("Im r >= 0 on the interior grid")
    return SelfMapVerdict(True, method, tuple(reasons))


def necessary_conditions(r: RationalMap) -> tuple[Condition, ...]:
    """Coefficient conditions every bounded rational symbol satisfies.

    (i) n = m + 1, (ii) a_n/b_m real and positive, (iii) Im(a_0/b_0) >= 0.
    A failure proves r is not a bounded symbol; passing proves nothing.
    """
    n, m = r.n, r.m
    lead = r.num.leading / r.den.leading
    out = [
        Condition(
            "(i) n = m + 1",
            "pass" if n == m + 1 else "fail",
            f"n = {n}, m = {m}, n - m = {n - m}",
        )
    ]
    real = abs(lead.imag) <= RATIO_TOL * abs(lead)
    out.append(
        Condition(
            "(ii) a_n/b_m real and positive",
            "pass" if real and lead.real > 0 else "fail",
            f"a_n/b_m = {lead:.6g}",
        )
    )
    b0 = r.den.coeffs[0]
    if b0 == 0:
        out.append(Condition("(iii) Im(a_0/b_0) >= 0", "not applicable", "den constant term zero"))
    else:
        a0 = r.num.coeffs[0] if r.num.coeffs else 0j
        c = a0 / b0
        out.append(
            Condition(
                "(iii) Im(a_0/b_0) >= 0",
                "pass" if c.imag >= -RATIO_TOL * max(1.0, abs(c)) else "fail",
                f"a_0/b_0 = {c:.6g}",
            )
        )
    return tuple(out)


def infinite_measure_obstruction(r: RationalMap) -> ObstructionWitness | None:
    """Witness that r stays bounded on a set of infinite measure.

    When r has a finite limit at infinity, |r(x)| < K = |r(oo)| + 1 for
    |x| > N, so C_r f_2 is not square integrable. Returns None when r
    escapes to infinity.
    """
    lim = r.at_infinity()
    if math.isinf(lim.real):
        return None
    K = abs(lim) + 1.0
    kind = "finite-limit-at-infinity" if r.n == r.m else "bounded-on-tail"
    # |num|^2 - K^2 |den|^2 on the real line
    g = r.num * r.num.conj() - (r.den * r.den.conj()) * (K * K)
    g = Poly(tuple(complex(c.real, 0.0) for c in g.coeffs))
    crossings = _real_roots(g)
    N = max((abs(x) for x in crossings), default=0.0)
    for _ in range(60):
        xs = np.geomspace(max(N, 1e-3) * (1 + 1e-9) + 1e-12, (1 + N) * 1e6, 500)
        xs = np.concatenate([xs, -xs])
        vals = np.abs(r(xs.astype(complex)))
        if np.all(vals < K):
            return ObstructionWitness(kind, K, float(N))
        N = 2 * N + 1
    raise ArithmeticError("could not certify a tail bound")  # pragma: no cover


@functools.lru_cache(maxsize=256)
def classify_rational(r: RationalMap) -> SymbolClassification:
    """Bounded iff r is a self-map with deg num = deg den + 1."""
    sm = is_selfmap(r)
    lead = r.num.leading / r.den.leading
    b0 = r.den.coeffs[0]
    const: complex | str
    if b0 == 0:
        const = "den constant term zero"
    else:
        const = (r.num.coeffs[0] if r.num.coeffs else 0j) / b0
    conds = necessary_conditions(r)
    obstruction = infinite_measure_obstruction(r)
    common = dict(
        is_selfmap=sm.value,
        selfmap_method=sm.method,
        n=r.n,
        m=r.m,
        leading_ratio=lead,
        constant_ratio=const,
        at_infinity=r.at_infinity(),
        conditions=conds,
        obstruction=obstruction,
    )
    if not sm:
        return SymbolClassification(
            bounded=None, reasons=("not applicable: not a self-map",) + sm.reasons, **common
        )
    bounded = r.n == r.m + 1
    if bounded:
        reasons = (f"n = {r.n} = m + 1: r(oo) = oo",)
    else:
        reasons = (f"n = {r.n}, m = {r.m}: r(oo) is finite, C_r is not bounded",)
    return SymbolClassification(bounded=bounded, reasons=reasons + sm.reasons, **common)


@dataclass(frozen=True)
class QLPVerdict:
    bounded: bool
    a1: float
    b1: float
    method: str = "exponent rule only"
    reasons: tuple[str, ...] = field(default=())

    @property
    def gap(self) -> float:
        return self.a1 - self.b1

    def to_json(self) -> dict:
        return {
            "bounded": self.bounded,
            "a1": self.a1,
            "b1": self.b1,
            "gap": self.gap,
            "method": self.method,
            "reasons": list(self.reasons),
        }


def _top_exponent(terms: Sequence[tuple[complex, float]], side: str) -> float:
    if not terms:
        raise ValueError(f"{side} has no terms")
    live = []
    for coef, power in terms:
        if power < 0:
            raise ValueError(f"negative exponent {power} in {side}")
        if coef != 0:
            live.append(float(power))
    if not live:
        raise ValueError(f"{side} is identically zero")
    return max(live)


def classify_qlp(
    numerator_terms: Sequence[tuple[complex, float]],
    denominator_terms: Sequence[tuple[complex, float]],
) -> QLPVerdict:
    """Quotients of sums of nonnegative real powers: bounded iff a1 - b1 >= 1.

    Self-map status is not checked for non-integer exponents.
    """
    a1 = _top_exponent(numerator_terms, "numerator")
    b1 = _top_exponent(denominator_terms, "denominator")
    gap = a1 - b1
    ok = gap >= 1.0
    why = f"a1 - b1 = {gap:g} {'>=' if ok else '<'} 1"
    return QLPVerdict(ok, a1, b1, reasons=(why,))


def qlp_terms(r: RationalMap) -> tuple[list[tuple[complex, float]], list[tuple[complex, float]]]:
    """Exponent data of a rational map in the form classify_qlp takes."""
    num = [(c, float(k)) for k, c in enumerate(r.num.coeffs) if c != 0]
    den = [(c, float(k)) for k, c in enumerate(r.den.coeffs) if c != 0]
    return num or [(0j, 0.0)], den
