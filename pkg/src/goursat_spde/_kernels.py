"""Compiled inner loops. Source dispatch codes come from ``source``."""

import math

import numba as nb
import numpy as np

NO_SINGULARITY = np.iinfo(np.int64).max


@nb.njit(inline="always")
def _drift(kind, p0, p1, y):
    if kind == 1:
        return p0 * y + p1
    elif kind == 2:
        return p0 * y * (1.0 - y)
    elif kind == 3:
        return p0 * y * (1.0 - y) * (y - p1)
    elif kind == 4:
        return p0 * math.sin(y)
    elif kind == 5:
        return math.exp(y)
    return 0.0


@nb.njit(cache=True, nogil=True)
def march(Y, kind, p0, p1, dxdt, noise_scale, N, use_noise, guard, j_offset, smin):
    """Fill ``Y[1:, 1:]`` in place, column by column.

    ``Y[:, 0]`` and ``Y[0, :]`` must already hold data. Block column ``jb``
    is lattice column ``jb + j_offset`` and uses ``N[i - 1, jb - 1]``.
    Sites whose anti-diagonal ``i + j`` is at or past the first divergent one
    are set to NaN; returns ``(smin, i, j)`` of the earliest divergence
    (``smin == NO_SINGULARITY`` if none).
    """
    nx1, nb1 = Y.shape
    si = -1
    sj = -1
    for jb in range(1, nb1):
        j = jb + j_offset
        for i in range(1, nx1):
            if i + j >= smin:
                Y[i, jb] = np.nan
                continue
            v = Y[i - 1, jb] + Y[i, jb - 1] - Y[i - 1, jb - 1] + dxdt * _drift(kind, p0, p1, Y[i - 1, jb - 1])
            if use_noise:
                v += noise_scale * N[i - 1, jb - 1]
            if not (abs(v) <= guard):
                smin = i + j
                si = i
                sj = j
                v = np.nan
            Y[i, jb] = v
    return smin, si, sj


@nb.njit(cache=True, nogil=True)
def blank_diagonals(Y, smin, j_offset):
    nx1, nb1 = Y.shape
    for jb in range(nb1):
        j = jb + j_offset
        for i in range(nx1):
            if i + j >= smin:
                Y[i, jb] = np.nan
