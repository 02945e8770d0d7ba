# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cascade kernels; same contract as ``_pykernels``."""
import numpy as np

from libc.math cimport cos, cosh, sin, sinh, sqrt

ctypedef double complex cplx

DEF RAIL = 0
DEF SHUNT = 1


cdef inline void _element(signed char kind, cplx v, const cplx[:, ::1] t,
                          const cplx[:, ::1] tinv, const cplx* s,
                          cplx* e) noexcept nogil:
    cdef cplx tk[16]
    cdef cplx ch[2]
    cdef cplx sh[2]
    cdef cplx z, acc
    cdef double a, b
    cdef int i, j, m
    for i in range(16):
        e[i] = 0
    if kind == SHUNT:
        e[0] = 1
        e[5] = 1
        e[10] = 1
        e[15] = 1
        e[8] = v
        e[13] = v
        e[9] = -v
        e[12] = -v
        return
    for m in range(2):
        z = s[m] * v
        a = z.real
        b = z.imag
        ch[m] = cosh(a) * cos(b) + 1j * (sinh(a) * sin(b))
        sh[m] = sinh(a) * cos(b) + 1j * (cosh(a) * sin(b))
    # T @ K with K = [[D1, -D2], [-D2, D1]]
    for i in range(4):
        tk[4 * i + 0] = t[i, 0] * ch[0] - t[i, 2] * sh[0]
        tk[4 * i + 1] = t[i, 1] * ch[1] - t[i, 3] * sh[1]
        tk[4 * i + 2] = -t[i, 0] * sh[0] + t[i, 2] * ch[0]
        tk[4 * i + 3] = -t[i, 1] * sh[1] + t[i, 3] * ch[1]
    for i in range(4):
        for j in range(4):
            acc = 0
            for m in range(4):
                acc = acc + tk[4 * i + m] * tinv[m, j]
            e[4 * i + j] = acc


cdef inline void _matmul4(const cplx* a, const cplx* b, cplx* out) noexcept nogil:
    cdef int i, j, m
    cdef cplx acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for m in range(4):
                acc = acc + a[4 * i + m] * b[4 * m + j]
            out[4 * i + j] = acc


cdef inline void _orthonormalize(cplx* w) noexcept nogil:
    # w is 4x2 row-major
    cdef double n = 0
    cdef cplx r = 0
    cdef int i
    for i in range(4):
        n += w[2 * i].real * w[2 * i].real + w[2 * i].imag * w[2 * i].imag
    n = sqrt(n)
    for i in range(4):
        w[2 * i] = w[2 * i] / n
    for i in range(4):
        r = r + w[2 * i].conjugate() * w[2 * i + 1]
    n = 0
    for i in range(4):
        w[2 * i + 1] = w[2 * i + 1] - r * w[2 * i]
        n += w[2 * i + 1].real * w[2 * i + 1].real + w[2 * i + 1].imag * w[2 * i + 1].imag
    n = sqrt(n)
    for i in range(4):
        w[2 * i + 1] = w[2 * i + 1] / n


def chain_product_batch(const signed char[::1] kinds, const cplx[::1] values,
                        const long long[::1] offsets, t, tinv, s):
    cdef const cplx[:, ::1] tv = np.ascontiguousarray(t, dtype=np.complex128)
    cdef const cplx[:, ::1] tiv = np.ascontiguousarray(tinv, dtype=np.complex128)
    cdef cplx sv[2]
    sv[0] = s[0]
    sv[1] = s[1]
    cdef Py_ssize_t nb = offsets.shape[0] - 1
    out = np.empty((nb, 4, 4), dtype=np.complex128)
    cdef cplx[:, :, ::1] ov = out
    cdef cplx p[16]
    cdef cplx e[16]
    cdef cplx tmp[16]
    cdef Py_ssize_t b, k
    cdef int i
    with nogil:
        for b in range(nb):
            for i in range(16):
                p[i] = 0
            p[0] = 1
            p[5] = 1
            p[10] = 1
            p[15] = 1
            for k in range(offsets[b], offsets[b + 1]):
                _element(kinds[k], values[k], tv, tiv, sv, e)
                _matmul4(p, e, tmp)
                for i in range(16):
                    p[i] = tmp[i]
            for i in range(16):
                ov[b, i // 4, i % 4] = p[i]
    return out


def propagate_batch(w0, const signed char[::1] kinds, const cplx[::1] values,
                    const long long[::1] offsets, t, tinv, s):
    cdef const cplx[:, ::1] tv = np.ascontiguousarray(t, dtype=np.complex128)
    cdef const cplx[:, ::1] tiv = np.ascontiguousarray(tinv, dtype=np.complex128)
    cdef const cplx[:, ::1] w0v = np.ascontiguousarray(w0, dtype=np.complex128)
    cdef cplx sv[2]
    sv[0] = s[0]
    sv[1] = s[1]
    cdef Py_ssize_t nb = offsets.shape[0] - 1
    out = np.empty((nb, 4, 2), dtype=np.complex128)
    cdef cplx[:, :, ::1] ov = out
    cdef cplx w[8]
    cdef cplx nw[8]
    cdef cplx e[16]
    cdef cplx acc
    cdef Py_ssize_t b, k
    cdef int i, j, m
    with nogil:
        for b in range(nb):
            for i in range(4):
                w[2 * i] = w0v[i, 0]
                w[2 * i + 1] = w0v[i, 1]
            _orthonormalize(w)
            k = offsets[b + 1] - 1
            while k >= offsets[b]:
                _element(kinds[k], values[k], tv, tiv, sv, e)
                for i in range(4):
                    for j in range(2):
                        acc = 0
                        for m in range(4):
                            acc = acc + e[4 * i + m] * w[2 * m + j]
                        nw[2 * i + j] = acc
                for i in range(8):
                    w[i] = nw[i]
                _orthonormalize(w)
                k -= 1
            for i in range(4):
                ov[b, i, 0] = w[2 * i]
                ov[b, i, 1] = w[2 * i + 1]
    return out
