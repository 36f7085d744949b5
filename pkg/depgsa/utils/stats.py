# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Numerical helpers shared by the estimators.

* pairwise_sum / pairwise_mean:
  Tree summation over the first axis with a fixed leaf partition, so the
  result does not depend on how the rows were produced or split.

* map_row_chunks:
  Apply a row-wise function over fixed chunks of the rows, optionally
  in a pool of threads, and reassemble the results in order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np


logger = logging.getLogger(__name__)

# Number of rows summed directly at the leaves of the summation tree
LEAF_SIZE = 128
# Rows per chunk handed to a worker
CHUNK_SIZE = 4096


def pairwise_sum(a, leaf=LEAF_SIZE):
    """
    Sum the array over its first axis by pairwise (tree) reduction.

    The rows are first partitioned into consecutive leaves of ``leaf``
    rows; the leaf sums are then added pairwise level by level.  The
    partition only depends on the number of rows.

    Parameters
    ----------
    a : array_like
        Array of shape ``(n, ...)``.

    Returns
    -------
    total : `~numpy.ndarray`
        Array of shape ``a.shape[1:]``.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if n == 0:
        return np.zeros(a.shape[1:])
    partial = [a[i:i+leaf].sum(axis=0) for i in range(0, n, leaf)]
    while len(partial) > 1:
        merged = [partial[i] + partial[i+1]
                  for i in range(0, len(partial)-1, 2)]
        if len(partial) % 2 == 1:
            merged.append(partial[-1])
        partial = merged
    return np.asarray(partial[0])


def pairwise_mean(a, leaf=LEAF_SIZE):
    a = np.asarray(a, dtype=np.float64)
    return pairwise_sum(a, leaf=leaf) / a.shape[0]


def pairwise_var(a, leaf=LEAF_SIZE):
    """
    Unbiased sample variance over the first axis (elementwise), with the
    sums done by ``pairwise_sum``.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if n < 2:
        return np.full(a.shape[1:], np.nan)
    mean = pairwise_sum(a, leaf=leaf) / n
    return pairwise_sum((a - mean)**2, leaf=leaf) / (n - 1)


def pairwise_cov(a, leaf=LEAF_SIZE):
    """
    Unbiased sample covariance matrix of the rows of the 2D array ``a``.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if n < 2:
        return np.full((a.shape[1], a.shape[1]), np.nan)
    centered = a - pairwise_sum(a, leaf=leaf) / n
    outer = centered[:, :, np.newaxis] * centered[:, np.newaxis, :]
    return pairwise_sum(outer, leaf=leaf) / (n - 1)


def map_row_chunks(func, arrays, threads=1, chunk=CHUNK_SIZE):
    """
    Apply ``func`` to consecutive row chunks of the given arrays and
    concatenate the results along the first axis.

    Parameters
    ----------
    func : callable
        Called as ``func(*chunks, offset)`` where ``chunks`` are the row
        slices of ``arrays`` and ``offset`` the index of the first row.
    arrays : list[`~numpy.ndarray`]
        Arrays sharing their first dimension.
    threads : int, optional
        Number of worker threads; 1 evaluates sequentially.

    NOTE
    ----
    The chunk boundaries do not depend on ``threads``.
    """
    n = arrays[0].shape[0]
    starts = list(range(0, n, chunk)) or [0]

    def _job(start):
        chunks = [a[start:start+chunk] for a in arrays]
        return func(*chunks, start)

    if threads is None or threads <= 1 or len(starts) == 1:
        results = [_job(s) for s in starts]
    else:
        logger.debug("Evaluate %d row chunks with %d threads" %
                     (len(starts), threads))
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(_job, starts))
    return np.concatenate(results, axis=0)


# Nudges keeping uniforms strictly inside (0, 1): 0 -> 2^-64 and
# 1 -> the largest double below 1 (1 - 2^-64 is not representable).
UNIT_LOW = 2.0**-64
UNIT_HIGH = 1.0 - 2.0**-53


def clip_open_unit(u):
    """
    Move the uniforms at the end points 0 and 1 strictly inside (0, 1).
    """
    return np.clip(np.asarray(u, dtype=np.float64), UNIT_LOW, UNIT_HIGH)


def get_rng(seed=None):
    """
    Return a ``numpy.random.Generator``; an existing generator is passed
    through unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
