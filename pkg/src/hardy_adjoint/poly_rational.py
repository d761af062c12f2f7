"""Complex polynomials and rational maps with numerically robust root finding.

Coefficients are stored in ascending order of powers, so ``Poly((4, 0, 1))``
is ``z**2 + 4``. All objects are immutable and hashable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .errors import NotApplicableError, PoleError

#: roots closer than this (relative to 1 + |root|) are merged
MERGE_RADIUS = 1e-7
#: backward-error tolerance a polished root must meet
POLISH_TOL = 1e-10
#: common roots of num/den closer than this are cancelled
GCD_TOL = 1e-9
#: |Im t| <= IM_THRESHOLD * (1 + |t|) counts as a real root
IM_THRESHOLD = 1e-9
#: roots with Im between the two thresholds are flagged as ambiguous
AMBIGUOUS_THRESHOLD = 1e-7
POLE_TOL = 1e-14

HalfPlane = Literal["upper", "real", "all"]


def _as_complex_tuple(values: Iterable) -> tuple[complex, ...]:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            re, im = v
            out.append(complex(float(re), float(im)))
        else:
            out.append(complex(v))
    return tuple(out)


@dataclass(frozen=True)
class Poly:
    """Polynomial with complex coefficients in ascending powers.

    Trailing (highest-power) zero coefficients are trimmed, so the zero
    polynomial has ``coeffs == ()`` and degree -1.
    """

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        c = list(_as_complex_tuple(self.coeffs))
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "Poly":
        return cls(tuple(lead * np.asarray(npoly.polyfromroots(roots), dtype=complex)))

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> complex:
        return self.coeffs[-1] if self.coeffs else 0j

    def array(self) -> np.ndarray:
        return np.array(self.coeffs if self.coeffs else (0j,), dtype=complex)

    def __call__(self, z):
        if np.ndim(z) == 0:
            acc = 0j
            for c in reversed(self.coeffs):
                acc = acc * z + c
            return acc
        return kernels.horner(self.array(), z)

    def deriv(self, order: int = 1) -> "Poly":
        c = self.coeffs
        for _ in range(order):
            c = tuple(k * c[k] for k in range(1, len(c)))
        return Poly(c)

    def conj(self) -> "Poly":
        return Poly(tuple(c.conjugate() for c in self.coeffs))

    def is_real(self, tol: float = 1e-14) -> bool:
        return all(abs(c.imag) <= tol * max(1.0, abs(c)) for c in self.coeffs)

    def _binary(self, other, op) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly((complex(other),))
        return Poly(tuple(op(self.array(), other.array())))

    def __add__(self, other):
        return self._binary(other, npoly.polyadd)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, npoly.polysub)

    def __rsub__(self, other):
        return Poly((complex(other),)) - self

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self._binary(other, npoly.polymul)
        return Poly(tuple(complex(other) * c for c in self.coeffs))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def deflate(self, root: complex) -> "Poly":
        """Quotient of synthetic division by (z - root), remainder dropped."""
        c = self.coeffs
        if len(c) <= 1:
            return Poly(())
        out = [0j] * (len(c) - 1)
        acc = 0j
        for k in range(len(c) - 1, 0, -1):
            acc = acc * root + c[k]
            out[k - 1] = acc
        return Poly(tuple(out))

    def to_json(self) -> list[list[float]]:
        return [[c.real, c.imag] for c in self.coeffs] or [[0.0, 0.0]]


class Root(NamedTuple):
    location: complex
    multiplicity: int


@dataclass(frozen=True)
class RootSet:
    """Roots with multiplicities plus the worst residual |p(root)|."""

    roots: tuple[Root, ...]
    residual: float = 0.0
    warnings: tuple[str, ...] = ()

    def __iter__(self) -> Iterator[Root]:
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def locations(self) -> list[complex]:
        return [r.location for r in self.roots]

    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def to_json(self) -> list[dict]:
        return [
            {"location": [r.location.real, r.location.imag], "multiplicity": r.multiplicity}
            for r in self.roots
        ]


def poly_eval(p: Poly, z):
    """Horner evaluation of ``p`` at ``z`` (scalar or array)."""
    return p(z)


def poly_derivative(p: Poly) -> Poly:
    return p.deriv()


def _newton(p: Poly, dp: Poly, z: complex, steps: int = 12) -> complex:
    fz = abs(p(z))
    for _ in range(steps):
        d = dp(z)
        if d == 0 or fz == 0:
            break
        cand = z - p(z) / d
        fc = abs(p(cand))
        if not fc < fz:
            break
        z, fz = cand, fc
    return z


def _scale(p: Poly, z: complex) -> float:
    r = abs(z)
    return sum(abs(c) * r**k for k, c in enumerate(p.coeffs))


def _cluster(points: Sequence[complex], radius: float) -> list[list[int]]:
    """Single-linkage clusters of points within radius * (1 + |point|)."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            tol = radius * (1 + max(abs(points[i]), abs(points[j])))
            if abs(points[i] - points[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


_EPS = float(np.finfo(float).eps)


def _loose_radius(n: int, merge_radius: float) -> float:
    return max(merge_radius, 10 * _EPS ** (1 / max(n, 1)))


def _merged_root(p: Poly, members: Sequence[complex], merge_radius: float) -> Root:
    k = len(members)
    centre = complex(np.mean(members))
    if k > 1:
        q = p.deriv(k - 1)
        polished = _newton(q, q.deriv(), centre)
        if abs(polished - centre) <= 10 * max(merge_radius, _EPS ** (1 / k)) * (1 + abs(centre)):
            centre = polished
    return Root(centre, k)


def _sort_key(r: Root):
    return (round(r.location.real, 12), round(r.location.imag, 12))


def poly_roots(p: Poly, merge_radius: float = MERGE_RADIUS) -> RootSet:
    """All complex roots of ``p`` with multiplicities.

    Companion-matrix eigenvalues are Newton-polished against ``p``; roots
    within ``merge_radius`` are merged and the merged root is re-polished as
    a simple root of the appropriate derivative.
    """
    n = p.degree()
    if n < 1:
        raise NotApplicableError("no roots of a constant")
    c = list(p.coeffs)
    zeros = 0
    while c[zeros] == 0:
        zeros += 1
    rest = Poly(tuple(c[zeros:]))
    found: list[complex] = []
    if rest.degree() == 1:
        found.append(-rest.coeffs[0] / rest.coeffs[1])
    elif rest.degree() > 1:
        dp = rest.deriv()
        eig = npoly.polyroots(rest.array())
        found.extend(_newton(rest, dp, complex(z)) for z in eig)

    roots: list[Root] = []
    warnings: list[str] = []
    for group in _cluster(found, _loose_radius(len(found), merge_radius)):
        members = [found[i] for i in group]
        centre = complex(np.mean(members))
        spread = max(abs(z - centre) for z in members)
        k = len(group)
        # a k-fold root is only resolved to about eps**(1/k) by the eigensolver
        if k > 1 and spread > max(merge_radius, 10 * _EPS ** (1 / k)) * (1 + abs(centre)):
            for sub in _cluster(members, merge_radius):
                sub_members = [members[i] for i in sub]
                roots.append(_merged_root(rest, sub_members, merge_radius))
            continue
        roots.append(_merged_root(rest, members, merge_radius))
    if zeros:
        roots.append(Root(0j, zeros))

    roots.sort(key=_sort_key)
    residual = max(abs(p(r.location)) for r in roots)
    for r in roots:
        if abs(p(r.location)) > POLISH_TOL * _scale(p, r.location):
            warnings.append(f"root {r.location} has residual {abs(p(r.location)):.3g}")
    return RootSet(tuple(roots), residual, tuple(warnings))


@dataclass(frozen=True)
class RationalMap:
    """A rational map num/den, reduced to lowest terms on construction."""

    num: Poly
    den: Poly
    warnings: tuple[str, ...] = field(default=(), compare=False, hash=False)

    def __post_init__(self):
        num = self.num if isinstance(self.num, Poly) else Poly(tuple(self.num))
        den = self.den if isinstance(self.den, Poly) else Poly(tuple(self.den))
        if den.is_zero():
            raise ValueError("denominator is identically zero")
        num, den, notes = _cancel_common_roots(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        if notes:
            object.__setattr__(self, "warnings", tuple(self.warnings) + tuple(notes))

    @classmethod
    def from_coeffs(cls, num: Sequence, den: Sequence = (1,)) -> "RationalMap":
        return cls(Poly(tuple(num)), Poly(tuple(den)))

    @property
    def n(self) -> int:
        return max(self.num.degree(), 0)

    @property
    def m(self) -> int:
        return self.den.degree()

    def is_constant(self) -> bool:
        return self.num.degree() <= 0 and self.den.degree() == 0

    def is_real(self) -> bool:
        return self.num.is_real() and self.den.is_real()

    def __call__(self, z):
        if np.ndim(z) == 0:
            return self.num(z) / self.den(z)
        return kernels.rational(self.num.array(), self.den.array(), z)

    def deriv_eval(self, z):
        a, b = self.num, self.den
        da, db = a.deriv(), b.deriv()
        if np.ndim(z) == 0:
            bz = b(z)
            return (da(z) * bz - a(z) * db(z)) / (bz * bz)
        bz = b(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (da(z) * bz - a(z) * db(z)) / (bz * bz)

    def at_infinity(self) -> complex:
        """Limit at infinity; ``complex('inf')`` when the map escapes."""
        if self.num.is_zero():
            return 0j
        if self.n > self.m:
            return complex(math.inf, 0)
        if self.n < self.m:
            return 0j
        return self.num.leading / self.den.leading

    def poles(self) -> RootSet:
        if self.m < 1:
            return RootSet(())
        return poly_roots(self.den)

    def real_poles(self) -> list[float]:
        return [
            r.location.real
            for r in self.poles()
            if abs(r.location.imag) <= AMBIGUOUS_THRESHOLD * (1 + abs(r.location))
        ]

    def scaled(self, c: complex) -> "RationalMap":
        return RationalMap(self.num * c, self.den * c)

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "RationalMap":
        if not isinstance(obj, dict) or "num" not in obj or "den" not in obj:
            raise ValueError('symbol must be an object with "num" and "den" arrays')
        return cls(Poly(_as_complex_tuple(obj["num"])), Poly(_as_complex_tuple(obj["den"])))

    def __str__(self) -> str:
        def fmt(p: Poly) -> str:
            terms = []
            for k, c in enumerate(p.coeffs):
                if c == 0:
                    continue
                cs = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"
                terms.append(cs if k == 0 else f"{cs}*z" + (f"^{k}" if k > 1 else ""))
            return " + ".join(terms) or "0"

        return f"({fmt(self.num)}) / ({fmt(self.den)})"


def _cancel_common_roots(num: Poly, den: Poly):
    notes = []
    if num.degree() < 1 or den.degree() < 1:
        return num, den, notes
    changed = True
    while changed and num.degree() >= 1 and den.degree() >= 1:
        changed = False
        rn = [r.location for r in poly_roots(num) for _ in range(r.multiplicity)]
        rd = [r.location for r in poly_roots(den) for _ in range(r.multiplicity)]
        best = None
        for a in rn:
            for b in rd:
                d = abs(a - b)
                if d <= GCD_TOL * (1 + abs(a)) and (best is None or d < best[0]):
                    best = (d, a, b)
        if best is not None:
            root = 0.5 * (best[1] + best[2])
            num, den = num.deflate(root), den.deflate(root)
            notes.append(f"cancelled common factor (z - {root:.6g})")
            changed = True
    return num, den, notes


def rat_eval(r: RationalMap, z: complex) -> complex:
    """num(z)/den(z) with a pole-proximity check."""
    z = complex(z)
    nz, dz = r.num(z), r.den(z)
    if abs(dz) < POLE_TOL * (1 + abs(nz)):
        poles = r.poles().locations
        dist = min((abs(z - p) for p in poles), default=0.0)
        raise PoleError(f"{z} is within {dist:.3g} of a pole", distance=dist)
    return nz / dz


def rat_derivative_eval(r: RationalMap, z: complex) -> complex:
    z = complex(z)
    rat_eval(r, z)  # pole check
    return complex(r.deriv_eval(z))


def conj_reflect(r: RationalMap) -> RationalMap:
    """The map s -> conj(r(conj(s))), i.e. r with conjugated coefficients."""
    return RationalMap(r.num.conj(), r.den.conj())


def preimages_upper(r: RationalMap, z: complex, filter: HalfPlane = "upper") -> RootSet:
    """Solutions t of r(t) = z, restricted to a half-plane.

    ``filter`` selects the open upper half-plane, the real line or all roots.
    Roots whose imaginary part falls between IM_THRESHOLD and
    AMBIGUOUS_THRESHOLD are reported as real with a warning.
    """
    p = r.num - r.den * complex(z)
    if p.degree() < 1:
        raise NotApplicableError(f"num - z*den is constant for z = {z}")
    rs = poly_roots(p)
    keep: list[Root] = []
    warnings = list(rs.warnings)
    for root in rs:
        t = root.location
        scale = 1 + abs(t)
        if abs(t.imag) <= IM_THRESHOLD * scale:
            kind = "real"
        elif abs(t.imag) <= AMBIGUOUS_THRESHOLD * scale:
            kind = "real"
            warnings.append(f"root {t} is within the ambiguous band around the real line")
        else:
            kind = "upper" if t.imag > 0 else "lower"
        if filter == "all":
            keep.append(root)
        elif filter == kind == "real":
            keep.append(Root(complex(t.real, 0.0), root.multiplicity))
        elif filter == kind:
            keep.append(root)
    return RootSet(tuple(keep), rs.residual, tuple(warnings))


def preimages_many(r: RationalMap, zs) -> np.ndarray:
    """All roots of r.num - z r.den for each z in a batch, shape (len(zs), degree).

    Companion eigenvalues with two vectorised Newton steps; no multiplicity
    merging, so callers must treat close roots themselves.
    """
    zs = np.asarray(zs, dtype=complex).ravel()
    num, den = r.num.array(), r.den.array()
    d = max(num.size, den.size) - 1
    if d < 1:
        raise NotApplicableError("num - z*den is constant")
    P = np.zeros((zs.size, d + 1), dtype=complex)
    P[:, : num.size] += num
    P[:, : den.size] -= zs[:, None] * den
    if np.any(P[:, d] == 0):
        raise NotApplicableError("degree of num - z*den drops for some z")
    if d == 1:
        return (-P[:, 0] / P[:, 1])[:, None]
    C = np.zeros((zs.size, d, d), dtype=complex)
    C[:, np.arange(1, d), np.arange(d - 1)] = 1.0
    C[:, :, -1] = -P[:, :d] / P[:, d : d + 1]
    roots = np.linalg.eigvals(C)
    dP = P[:, 1:] * np.arange(1, d + 1)
    for _ in range(2):
        pv = np.zeros_like(roots)
        dv = np.zeros_like(roots)
        for j in range(d, -1, -1):
            pv = pv * roots + P[:, j : j + 1]
        for j in range(d - 1, -1, -1):
            dv = dv * roots + dP[:, j : j + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = pv / dv
        roots = roots - np.where(np.isfinite(step), step, 0.0)
    return roots
