"""Pure-Python/numpy implementations of the counting kernels.

Signatures and results match ``_ckernels`` exactly; all counts are int64.
"""

import numpy as np


def ip_table(xdig, ydig, p):
    """``T[i, j] = <xdig[i], ydig[j]> mod p`` as int32."""
    xdig = np.asarray(xdig, dtype=np.int64)
    ydig = np.asarray(ydig, dtype=np.int64)
    if xdig.shape[1] != ydig.shape[1]:
        raise ValueError("digit vectors have different lengths")
    # reduce per coordinate so the dot product stays well inside int64
    out = np.zeros((xdig.shape[0], ydig.shape[0]), dtype=np.int64)
    for c in range(xdig.shape[1]):
        out += np.multiply.outer(xdig[:, c], ydig[:, c]) % p
        out %= p
    return out.astype(np.int32)


def joint_counts(table, wx, nz):
    """``J[y, z] = sum_x wx[x] * [table[x, y] == z]``."""
    table = np.asarray(table, dtype=np.int64)
    wx = np.asarray(wx, dtype=np.int64)
    nx, ny = table.shape
    cols = np.arange(ny, dtype=np.int64)[None, :]
    flat = (cols * nz + table).ravel()
    weights = np.broadcast_to(wx[:, None], (nx, ny)).ravel()
    counts = np.zeros(ny * nz, dtype=np.int64)
    np.add.at(counts, flat, weights)
    return counts.reshape(ny, nz)


def collision_counts(table):
    """``C[a, b] = |{y : table[a, y] == table[b, y]}|``."""
    table = np.asarray(table)
    nx = table.shape[0]
    out = np.zeros((nx, nx), dtype=np.int64)
    for a in range(nx):
        out[a] = (table == table[a][None, :]).sum(axis=1)
    return out


def gf2m_mul_table(m, poly):
    size = 1 << m
    top = 1 << m
    out = np.zeros((size, size), dtype=np.int64)
    for a0 in range(size):
        for b0 in range(size):
            a, b, acc = a0, b0, 0
            while b:
                if b & 1:
                    acc ^= a
                b >>= 1
                a <<= 1
                if a & top:
                    a ^= poly
            out[a0, b0] = acc
    return out


def pair_slice_l1(ztab, wx, p):
    """Integer L1 numerators for every ordered pair ``(y, y')``.

    ``N[y, y'] = sum_{z, z'} |p * C[z, z'] - c'[z']|`` with
    ``C[z, z'] = sum_x wx[x] [ztab[x, y] = z and ztab[x, y'] = z']`` and
    ``c'`` its column sums.  The diagonal is left at zero.
    """
    ztab = np.asarray(ztab, dtype=np.int64)
    wx = np.asarray(wx, dtype=np.int64)
    ny = ztab.shape[1]
    out = np.zeros((ny, ny), dtype=np.int64)
    for y in range(ny):
        for y2 in range(ny):
            if y == y2:
                continue
            c = np.zeros(p * p, dtype=np.int64)
            np.add.at(c, ztab[:, y] * p + ztab[:, y2], wx)
            c = c.reshape(p, p)
            col = c.sum(axis=0)
            out[y, y2] = np.abs(p * c - col[None, :]).sum()
    return out
