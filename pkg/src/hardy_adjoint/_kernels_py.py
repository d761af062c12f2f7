"""Pure-numpy implementations of the numerical hot loops.

Every function here has a compiled twin in ``_kernels.pyx`` with the same
signature and semantics. ``hardy_adjoint.kernels`` picks one at import time.
"""
import numpy as np


def horner(coeffs, z):
    """Evaluate the polynomial with ascending ``coeffs`` at every entry of ``z``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, coeffs[-1] if coeffs.size else 0j, dtype=complex)
    for c in coeffs[-2::-1]:
        out *= z
        out += c
    return out


def rational(num, den, z):
    """num(z) / den(z) elementwise; poles give inf/nan as numpy does."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return horner(num, z) / horner(den, z)


def poisson_atoms(x, y, locations, masses):
    """sum_j masses[j] * P_y(x - locations[j]) for arrays x, y of equal shape."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    for loc, w in zip(locations, masses):
        out += w * y / ((x - loc) ** 2 + y ** 2)
    return out / np.pi


def panel_nodes(breaks, gl_x, gl_w):
    """Gauss-Legendre nodes/weights on every panel [breaks[k], breaks[k+1]].

    ``breaks`` has shape (M, B) and is sorted along axis 1. Returns arrays of
    shape (M, (B-1)*q) where q = len(gl_x).
    """
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:, :-1, None]
    b = breaks[:, 1:, None]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid + half * gl_x[None, None, :]
    weights = half * gl_w[None, None, :] * np.ones_like(nodes)
    m = breaks.shape[0]
    return nodes.reshape(m, -1), weights.reshape(m, -1)


def row_dot(values, weights):
    """Row-wise weighted sums, accumulated left to right in fixed order."""
    return np.einsum("ij,ij->i", values, weights)
