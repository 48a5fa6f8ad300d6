# Compiled counting kernels; same signatures as _pykernels.
import numpy as np

from libc.stdint cimport int32_t, int64_t
from libc.stdlib cimport calloc, free


cdef inline int64_t _iabs(int64_t v) nogil:
    return -v if v < 0 else v


def ip_table(xdig, ydig, int64_t p):
    cdef int64_t[:, ::1] xd = np.ascontiguousarray(xdig, dtype=np.int64)
    cdef int64_t[:, ::1] yd = np.ascontiguousarray(ydig, dtype=np.int64)
    if xd.shape[1] != yd.shape[1]:
        raise ValueError("digit vectors have different lengths")
    cdef Py_ssize_t nx = xd.shape[0], ny = yd.shape[0], n = xd.shape[1]
    out = np.empty((nx, ny), dtype=np.int32)
    cdef int32_t[:, ::1] o = out
    cdef Py_ssize_t i, j, c
    cdef int64_t acc
    with nogil:
        for i in range(nx):
            for j in range(ny):
                acc = 0
                for c in range(n):
                    acc = (acc + xd[i, c] * yd[j, c]) % p
                o[i, j] = <int32_t>acc
    return out


def joint_counts(table, wx, int64_t nz):
    cdef int32_t[:, ::1] t = np.ascontiguousarray(table, dtype=np.int32)
    cdef int64_t[::1] w = np.ascontiguousarray(wx, dtype=np.int64)
    cdef Py_ssize_t nx = t.shape[0], ny = t.shape[1]
    out = np.zeros((ny, nz), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Py_ssize_t x, y
    cdef int64_t wv
    with nogil:
        for x in range(nx):
            wv = w[x]
            if wv == 0:
                continue
            for y in range(ny):
                o[y, t[x, y]] += wv
    return out


def collision_counts(table):
    cdef int32_t[:, ::1] t = np.ascontiguousarray(table, dtype=np.int32)
    cdef Py_ssize_t nx = t.shape[0], ny = t.shape[1]
    out = np.zeros((nx, nx), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Py_ssize_t a, b, y
    cdef int64_t cnt
    with nogil:
        for a in range(nx):
            for b in range(a, nx):
                cnt = 0
                for y in range(ny):
                    if t[a, y] == t[b, y]:
                        cnt += 1
                o[a, b] = cnt
                o[b, a] = cnt
    return out


def gf2m_mul_table(int m, int64_t poly):
    cdef int64_t size = 1 << m
    cdef int64_t top = 1 << m
    out = np.empty((size, size), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef int64_t a0, b0, a, b, acc
    with nogil:
        for a0 in range(size):
            for b0 in range(size):
                a = a0
                b = b0
                acc = 0
                while b:
                    if b & 1:
                        acc ^= a
                    b >>= 1
                    a <<= 1
                    if a & top:
                        a ^= poly
                o[a0, b0] = acc
    return out


def pair_slice_l1(ztab, wx, int64_t p):
    cdef int32_t[:, ::1] z = np.ascontiguousarray(ztab, dtype=np.int32)
    cdef int64_t[::1] w = np.ascontiguousarray(wx, dtype=np.int64)
    cdef Py_ssize_t nx = z.shape[0], ny = z.shape[1]
    out = np.zeros((ny, ny), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef int64_t *c = <int64_t *> calloc(p * p, sizeof(int64_t))
    cdef int64_t *col = <int64_t *> calloc(p, sizeof(int64_t))
    if c == NULL or col == NULL:
        free(c)
        free(col)
        raise MemoryError()
    cdef Py_ssize_t y, y2, x, i, j
    cdef int64_t acc
    try:
        with nogil:
            for y in range(ny):
                for y2 in range(ny):
                    if y == y2:
                        continue
                    for i in range(p * p):
                        c[i] = 0
                    for i in range(p):
                        col[i] = 0
                    for x in range(nx):
                        c[z[x, y] * p + z[x, y2]] += w[x]
                        col[z[x, y2]] += w[x]
                    acc = 0
                    for i in range(p):
                        for j in range(p):
                            acc += _iabs(p * c[i * p + j] - col[j])
                    o[y, y2] = acc
    finally:
        free(c)
        free(col)
    return out
