# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-step kernels; same signatures as ``_pykernels``."""

import numpy as np

BACKEND = "cython"


def chain_term(int m, const double[::1] f1, const double[::1] f2, const double[::1] f3,
               const double[::1] f4, const double[::1] u1, const double[::1] u2,
               const double[::1] u3, const double[::1] u4, double[::1] out):
    cdef Py_ssize_t j, n = out.shape[0]
    cdef double a, sq
    if m < 1 or m > 4:
        raise ValueError(f"chain_term supports m = 1..4, got {m}")
    with nogil:
        if m == 1:
            for j in range(n):
                out[j] = f1[j] * u1[j]
        elif m == 2:
            for j in range(n):
                a = u1[j]
                out[j] = f2[j] * a * a + f1[j] * u2[j]
        elif m == 3:
            for j in range(n):
                a = u1[j]
                out[j] = f3[j] * a * a * a + 3.0 * f2[j] * a * u2[j] + f1[j] * u3[j]
        else:
            for j in range(n):
                a = u1[j]
                sq = a * a
                out[j] = (f4[j] * sq * sq + 6.0 * f3[j] * sq * u2[j]
                          + 3.0 * f2[j] * u2[j] * u2[j] + 4.0 * f2[j] * a * u3[j]
                          + f1[j] * u4[j])


cdef inline double[::1] _flat(arr):
    # complex128 as interleaved (re, im) doubles
    return arr.view(np.float64)


def accel(const double[::1] omega2, uh, fh, double inv_eps2, out):
    cdef const double[::1] u = _flat(uh)
    cdef const double[::1] f = _flat(fh)
    cdef double[::1] o = _flat(out)
    cdef Py_ssize_t k, n = omega2.shape[0]
    cdef double w
    with nogil:
        for k in range(n):
            w = omega2[k]
            o[2 * k] = -(w * u[2 * k] + inv_eps2 * f[2 * k])
            o[2 * k + 1] = -(w * u[2 * k + 1] + inv_eps2 * f[2 * k + 1])


def main_update(u, d, v, const double[::1] gap, const double[::1] wsin2,
                const double[:, ::1] A, const double[:, ::1] Adot, F):
    """In place: ``d <- d - gap*u - sum A F``, ``u <- u + d``, ``v <- v - wsin2*u - sum Adot F``."""
    cdef double[::1] uu = _flat(u)
    cdef double[::1] dd = _flat(d)
    cdef double[::1] vv = _flat(v)
    cdef const double[:, ::1] f = F.view(np.float64)
    cdef Py_ssize_t k, m, j, n = gap.shape[0], nt = f.shape[0]
    cdef double uc, dn, vn, a, b, fm
    with nogil:
        for j in range(2 * n):
            k = j >> 1
            uc = uu[j]
            dn = dd[j] - gap[k] * uc
            vn = vv[j] - wsin2[k] * uc
            for m in range(nt):
                fm = f[m, j]
                dn = dn - A[m, k] * fm
                vn = vn - Adot[m, k] * fm
            dd[j] = dn
            uu[j] = uc + dn
            vv[j] = vn
