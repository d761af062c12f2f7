# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the routines in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


def horner(coeffs, z):
    cdef cplx[::1] c = np.ascontiguousarray(coeffs, dtype=complex).ravel()
    z_arr = np.asarray(z, dtype=complex)
    shape = z_arr.shape
    cdef cplx[::1] zz = np.ascontiguousarray(z_arr).ravel()
    out_arr = np.empty(zz.shape[0], dtype=complex)
    cdef cplx[::1] out = out_arr
    cdef Py_ssize_t n = zz.shape[0], deg = c.shape[0] - 1, i, k
    cdef cplx acc, x
    if deg < 0:
        out_arr[:] = 0
        return out_arr.reshape(shape)
    for i in range(n):
        x = zz[i]
        acc = c[deg]
        for k in range(deg - 1, -1, -1):
            acc = acc * x + c[k]
        out[i] = acc
    return out_arr.reshape(shape)


def rational(num, den, z):
    cdef cplx[::1] a = np.ascontiguousarray(num, dtype=complex).ravel()
    cdef cplx[::1] b = np.ascontiguousarray(den, dtype=complex).ravel()
    z_arr = np.asarray(z, dtype=complex)
    shape = z_arr.shape
    cdef cplx[::1] zz = np.ascontiguousarray(z_arr).ravel()
    out_arr = np.empty(zz.shape[0], dtype=complex)
    cdef cplx[::1] out = out_arr
    cdef Py_ssize_t n = zz.shape[0], na = a.shape[0] - 1, nb = b.shape[0] - 1, i, k
    cdef cplx p, q, x
    cdef double nan = float("nan"), inf = float("inf")
    for i in range(n):
        x = zz[i]
        p = a[na]
        for k in range(na - 1, -1, -1):
            p = p * x + a[k]
        q = b[nb]
        for k in range(nb - 1, -1, -1):
            q = q * x + b[k]
        if q.real == 0 and q.imag == 0:
            if p.real == 0 and p.imag == 0:
                out[i] = nan + 1j * nan
            else:
                out[i] = inf + 1j * nan
        else:
            out[i] = p / q
    return out_arr.reshape(shape)


def poisson_atoms(x, y, locations, masses):
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = xb.shape
    cdef double[::1] xx = np.ascontiguousarray(xb, dtype=float).ravel()
    cdef double[::1] yy = np.ascontiguousarray(yb, dtype=float).ravel()
    cdef double[::1] loc = np.ascontiguousarray(locations, dtype=float).ravel()
    cdef double[::1] w = np.ascontiguousarray(masses, dtype=float).ravel()
    out_arr = np.zeros(xx.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = xx.shape[0], na = loc.shape[0], i, j
    cdef double acc, d, pi = np.pi
    for i in range(n):
        acc = 0.0
        for j in range(na):
            d = xx[i] - loc[j]
            acc += w[j] * yy[i] / (d * d + yy[i] * yy[i])
        out[i] = acc / pi
    return out_arr.reshape(shape)


def panel_nodes(breaks, gl_x, gl_w):
    cdef double[:, ::1] br = np.ascontiguousarray(breaks, dtype=float)
    cdef double[::1] gx = np.ascontiguousarray(gl_x, dtype=float)
    cdef double[::1] gw = np.ascontiguousarray(gl_w, dtype=float)
    cdef Py_ssize_t m = br.shape[0], nb = br.shape[1], q = gx.shape[0]
    nodes_arr = np.empty((m, (nb - 1) * q))
    weights_arr = np.empty((m, (nb - 1) * q))
    cdef double[:, ::1] nodes = nodes_arr
    cdef double[:, ::1] weights = weights_arr
    cdef Py_ssize_t i, k, j, col
    cdef double half, mid
    for i in range(m):
        col = 0
        for k in range(nb - 1):
            half = 0.5 * (br[i, k + 1] - br[i, k])
            mid = 0.5 * (br[i, k + 1] + br[i, k])
            for j in range(q):
                nodes[i, col] = mid + half * gx[j]
                weights[i, col] = half * gw[j]
                col += 1
    return nodes_arr, weights_arr


def row_dot(values, weights):
    cdef cplx[:, ::1] v = np.ascontiguousarray(values, dtype=complex)
    cdef double[:, ::1] w = np.ascontiguousarray(weights, dtype=float)
    cdef Py_ssize_t m = v.shape[0], n = v.shape[1], i, j
    out_arr = np.empty(m, dtype=complex)
    cdef cplx[::1] out = out_arr
    cdef cplx acc
    for i in range(m):
        acc = 0
        for j in range(n):
            acc = acc + v[i, j] * w[i, j]
        out[i] = acc
    return out_arr
