# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, fabs, sin

cnp.import_array()

cdef double SERIES_CUTOFF = 1e-4


cdef inline double complex _phase_kernel(double phi, double t) nogil:
    cdef double z = t * phi
    cdef double complex iz
    cdef double sh, ch
    if fabs(z) < SERIES_CUTOFF:
        iz = 1j * z
        return t * (1.0 + 0.5 * iz + iz * iz / 6.0 + iz * iz * iz / 24.0)
    # e^{iz} - 1 = -2 sin^2(z/2) + 2i sin(z/2) cos(z/2); dividing by i phi
    # swaps the parts: (sin z - i (cos z - 1)) / phi
    sh = sin(0.5 * z)
    ch = cos(0.5 * z)
    return (2.0 * sh * ch + 2.0j * sh * sh) / phi


def phase_kernel(phi, double t):
    cdef const double[::1] p = np.ascontiguousarray(phi, dtype=np.float64).ravel()
    out = np.empty(p.shape[0], dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i
    for i in range(p.shape[0]):
        o[i] = _phase_kernel(p[i], t)
    return out.reshape(np.shape(phi))


def triple_interaction(j, a, double dxi, double t, Py_ssize_t n,
                       bint skip_same_sign=False):
    cdef const long long[::1] jj = np.ascontiguousarray(j, dtype=np.int64)
    cdef const double complex[::1] aa = np.ascontiguousarray(a, dtype=np.complex128)
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t K = jj.shape[0]
    cdef Py_ssize_t p, q, r
    cdef long long jo, half = n // 2
    cdef int sp, sq, sr
    cdef double x, x1, x2, phi
    cdef double complex apq
    with nogil:
        for p in range(K):
            sp = (jj[p] > 0) - (jj[p] < 0)
            for q in range(K):
                sq = (jj[q] > 0) - (jj[q] < 0)
                x1 = jj[q] * dxi
                # the phase is symmetric in (q, r): visit r >= q, double off-diagonal
                apq = aa[p] * aa[q]
                for r in range(q, K):
                    jo = jj[p] + jj[q] + jj[r]
                    if jo >= half or jo <= -half:
                        continue
                    if skip_same_sign:
                        sr = (jj[r] > 0) - (jj[r] < 0)
                        if sp == sq and sq == sr and sp != 0:
                            continue
                    x2 = jj[r] * dxi
                    x = jj[p] * dxi + x1 + x2
                    phi = -3.0 * (x - x1) * (x - x2) * (x1 + x2)
                    if jo < 0:
                        jo += n
                    if r == q:
                        o[jo] += _phase_kernel(phi, t) * apq * aa[r]
                    else:
                        o[jo] += 2.0 * _phase_kernel(phi, t) * apq * aa[r]
    return out


def box_energies(c, box, Py_ssize_t nbox):
    cdef const double complex[::1] cc = np.ascontiguousarray(c, dtype=np.complex128)
    cdef const long long[::1] bb = np.ascontiguousarray(box, dtype=np.int64)
    out = np.zeros(nbox, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef long long b
    with nogil:
        for i in range(cc.shape[0]):
            b = bb[i]
            if b >= 0 and b < nbox:
                o[b] += cc[i].real * cc[i].real + cc[i].imag * cc[i].imag
    return out


def bilinear_weighted_sum(x1, w1, x2, w2):
    cdef const double[::1] a1 = np.ascontiguousarray(x1, dtype=np.float64)
    cdef const double[::1] b1 = np.ascontiguousarray(w1, dtype=np.float64)
    cdef const double[::1] a2 = np.ascontiguousarray(x2, dtype=np.float64)
    cdef const double[::1] b2 = np.ascontiguousarray(w2, dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef double total = 0.0, row, s1
    with nogil:
        for i in range(a1.shape[0]):
            s1 = a1[i] * a1[i]
            row = 0.0
            for k in range(a2.shape[0]):
                row = row + b2[k] / fabs(s1 - a2[k] * a2[k])
            total = total + b1[i] * row
    return total
