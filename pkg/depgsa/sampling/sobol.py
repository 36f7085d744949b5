# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Unscrambled Sobol' sequence from Joe-Kuo direction numbers.

The points are generated in Gray-code order (Antonov-Saleev), with
32-bit direction numbers.  The bundled table ``data/joe-kuo-1024.txt``
has the usual layout, one line per dimension (from the 2nd one):

    d  s  a  m_1 ... m_s

where ``s`` is the degree of the primitive polynomial, ``a`` encodes its
inner coefficients, and ``m_i`` are the initial direction integers.  The
first dimension is the van der Corput sequence in base 2.

References
----------
[1] S. Joe and F. Y. Kuo,
    "Constructing Sobol sequences with better two-dimensional
    projections", SIAM J. Sci. Comput. 30, 2635-2654 (2008)
[2] I. A. Antonov and V. M. Saleev,
    "An economic method of computing LP_tau-sequences",
    USSR Comput. Math. Math. Phys. 19, 252-256 (1979)
"""

import logging
from functools import lru_cache

import numpy as np
import numba as nb
from pkg_resources import resource_filename

from ..errors import ConfigError


logger = logging.getLogger(__name__)

# Bits of the direction numbers
NBITS = 32
DIRECTION_FILE = resource_filename(__name__, "data/joe-kuo-1024.txt")


def read_direction_numbers(filepath=DIRECTION_FILE):
    """
    Read a Joe-Kuo direction numbers file.

    Returns
    -------
    table : list[(int, int, list[int])]
        ``(s, a, m)`` of the dimensions 2, 3, ...
    """
    table = []
    with open(filepath) as fp:
        for lineno, line in enumerate(fp, start=1):
            items = line.split()
            if not items or not items[0].isdigit():
                continue
            values = [int(v) for v in items]
            d, s, a, m = values[0], values[1], values[2], values[3:]
            if len(m) != s or d != len(table) + 2:
                raise ConfigError("%s:%d: malformed direction numbers" %
                                  (filepath, lineno))
            table.append((s, a, m))
    logger.debug("Read direction numbers of %d dimensions from: %s" %
                 (len(table) + 1, filepath))
    return table


@lru_cache(maxsize=4)
def _load_table(filepath):
    return read_direction_numbers(filepath)


def max_dimension(filepath=DIRECTION_FILE):
    """Number of dimensions supported by the direction numbers file."""
    return len(_load_table(filepath)) + 1


def direction_numbers(dim, filepath=DIRECTION_FILE):
    """
    The ``NBITS``-bit direction numbers ``V[j, k] = v_k 2^NBITS`` of the
    first ``dim`` dimensions.

    Raises
    ------
    ConfigError :
        ``dim`` exceeds the dimensions of the file.
    """
    table = _load_table(filepath)
    if dim > len(table) + 1:
        raise ConfigError("Sobol' dimension %d exceeds the %d dimensions "
                          "of the direction numbers" % (dim, len(table) + 1))
    V = np.zeros((dim, NBITS), dtype=np.int64)
    for k in range(NBITS):
        V[0, k] = 1 << (NBITS - 1 - k)
    for j in range(1, dim):
        s, a, m = table[j-1]
        for k in range(min(s, NBITS)):
            V[j, k] = m[k] << (NBITS - 1 - k)
        for k in range(s, NBITS):
            v = V[j, k-s] ^ (V[j, k-s] >> s)
            for l in range(1, s):
                if (a >> (s - 1 - l)) & 1:
                    v ^= V[j, k-l]
            V[j, k] = v
    return V


@nb.jit(nb.float64[:, :](nb.int64[:, :], nb.int64, nb.int64),
        nopython=True)
def _sobol_points(V, skip, n):
    """
    Points ``skip, ..., skip+n-1`` of the sequence in Gray-code order.
    """
    dim, nbits = V.shape
    scale = 1.0 / float(1 << nbits)
    points = np.zeros((n, dim), dtype=np.float64)
    state = np.zeros(dim, dtype=np.int64)
    # state of the point ``skip``: XOR of the directions of its Gray code
    gray = skip ^ (skip >> 1)
    bit = 0
    while gray > 0:
        if gray & 1:
            for j in range(dim):
                state[j] ^= V[j, bit]
        gray >>= 1
        bit += 1
    for i in range(n):
        for j in range(dim):
            points[i, j] = state[j] * scale
        # the next point flips the direction of the lowest zero bit
        c = 0
        idx = skip + i
        while idx & 1:
            idx >>= 1
            c += 1
        if c < nbits:
            for j in range(dim):
                state[j] ^= V[j, c]
    return points


def sobol_joe_kuo(n, dim, skip=1, filepath=DIRECTION_FILE):
    """
    Generate ``n`` points of the unscrambled Sobol' sequence.

    Parameters
    ----------
    n : int
        Number of points.
    dim : int
        Number of dimensions.
    skip : int, optional
        Number of leading points skipped (the first point is all zeros).

    Returns
    -------
    points : 2D `~numpy.ndarray`, shape ``(n, dim)``
    """
    if n < 1 or dim < 1:
        raise ConfigError("need n >= 1 and dim >= 1 (got %d, %d)" %
                          (n, dim))
    if skip + n > 2**NBITS:
        raise ConfigError("at most 2^%d Sobol' points" % NBITS)
    V = direction_numbers(dim, filepath=filepath)
    return _sobol_points(V, int(skip), int(n))
