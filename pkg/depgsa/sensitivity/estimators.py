# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Estimators of the covariance matrices and of the sensitivity indices.

Per sample row ``i`` of a pick-freeze batch, the kernels

    K_i     = (A - D)(C - B)^T + (C - B)(A - D)^T
    K_tot_i = (A - D)(A - D)^T + (C - B)(C - B)^T

are averaged into the unbiased estimators

    D_u     = sum(K_i) / (4 m)
    D_u_tot = sum(K_tot_i) / (4 m)

of the first-order and total covariances of the subset ``u``, while

    Sigma   = sum((A - B)(A - B)^T) / (2 M)

estimates the output covariance.  The first-type indices are the trace
ratios ``tr(D_u) / tr(Sigma)``, the second-type ones the Frobenius norm
ratios ``||D_u|| / ||Sigma||``; both reduce to the classical indices for
a scalar output.

The standard errors come from the per-row summands ``K_i / 4`` (whose
mean is ``D_u``): ``sqrt(Var[tr(K_i/4)]) / tr(Sigma)`` for the first
type, and the delta method with ``Var[<K_i/4, D_u>] / ||D_u||^2`` for
the second type.  The 95% intervals are ``estimate +/- 1.96 SE/sqrt(m)``.
"""

import logging
from collections import OrderedDict

import numpy as np

from .pickfreeze import PickFreezeBatch
from ..errors import DegenerateVarianceError, DomainError
from ..utils.stats import pairwise_sum, pairwise_var


logger = logging.getLogger(__name__)

# Quantile of the 95% normal intervals
Z95 = 1.96
# Relative trace of Sigma below which the output is deemed constant
DEGENERATE_TOL = 1e-14
# Relative norm of D_u below which the second-type CI is skipped
ZERO_NORM_TOL = 1e-10
# Relative tolerance of the Loewner eigenvalue tests
LOEWNER_TOL = 1e-10

FLAG_HEURISTIC = "m=M heuristic"
FLAG_NO_CI2 = "type-2 CI skipped"


def _outer(a, b):
    return a[:, :, np.newaxis] * b[:, np.newaxis, :]


def kernel_first_order(A, B, C, D):
    """
    Per-row first-order kernels; shape ``(m, N, N)``, each exactly
    symmetric.
    """
    P = _outer(A - D, C - B)
    return P + np.swapaxes(P, 1, 2)


def kernel_total(A, B, C, D):
    """Per-row total kernels; shape ``(m, N, N)``, each PSD."""
    AD = A - D
    CB = C - B
    return _outer(AD, AD) + _outer(CB, CB)


def estimate_sigma(A, B):
    """
    Estimate the output covariance from ``M`` pairs of independent
    outputs: ``sum((A - B)(A - B)^T) / (2 M)``.

    Raises
    ------
    DomainError :
        Fewer than 2 pairs.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64).T).T
    B = np.atleast_2d(np.asarray(B, dtype=np.float64).T).T
    M = A.shape[0]
    if M < 2:
        raise DomainError("need at least 2 output pairs (got %d)" % M)
    AB = A - B
    return pairwise_sum(_outer(AB, AB)) / (2.0 * M)


def total_only_estimator(batch):
    """
    Estimate the total covariance from ``A`` and ``D`` only:
    ``sum((A - D)(A - D)^T) / (2 m)``.
    """
    AD = batch.A - batch.D
    return pairwise_sum(_outer(AD, AD)) / (2.0 * batch.m)


def output_scale2(*arrays):
    """Mean squared output, the scale of the degeneracy test."""
    return float(np.mean([np.mean(np.asarray(a)**2) for a in arrays]))


class CovarianceEstimates:
    """
    Covariance estimates of one subset.

    Attributes
    ----------
    D_u, D_tot, sigma : 2D `~numpy.ndarray`, shape ``(N, N)``
    m, M : int
        Rows of the pick-freeze batch and of the ``Sigma`` estimate.
    K, K_tot : 3D `~numpy.ndarray`, shape ``(m, N, N)``
        Per-row kernels.
    scale2 : float
        Mean squared output.
    total_only : 2D `~numpy.ndarray` or None
    AD : 2D `~numpy.ndarray`
        ``A - D`` rows, kept for the variance of ``total_only``.
    """

    def __init__(self, D_u, D_tot, sigma, m, M, K, K_tot, scale2,
                 total_only=None, AD=None, batch=None):
        self.D_u = D_u
        self.D_tot = D_tot
        self.sigma = sigma
        self.m = m
        self.M = M
        self.K = K
        self.K_tot = K_tot
        self.scale2 = scale2
        self.total_only = total_only
        self.AD = AD
        self.batch = batch

    @property
    def N(self):
        return self.sigma.shape[0]


def estimate_covariances(batch, sigma_pairs=None, sigma=None,
                         total_only=False):
    """
    Estimate ``D_u``, ``D_u_tot`` and ``Sigma`` of a pick-freeze batch.

    Parameters
    ----------
    batch : `~depgsa.sensitivity.pickfreeze.PickFreezeBatch`
    sigma_pairs : (A, B), optional
        Output pairs estimating ``Sigma``; default ``(batch.A, batch.B)``.
    sigma : 2D `~numpy.ndarray`, optional
        An already estimated (e.g., pooled) ``Sigma``, with its number
        of rows given by ``sigma_pairs`` when available.
    total_only : bool, optional
        Also compute the total-only estimator.

    Returns
    -------
    cov : `CovarianceEstimates`
    """
    A, B, C, D = batch.A, batch.B, batch.C, batch.D
    K = kernel_first_order(A, B, C, D)
    K_tot = kernel_total(A, B, C, D)
    m = batch.m
    D_u = pairwise_sum(K) / (4.0 * m)
    D_tot = pairwise_sum(K_tot) / (4.0 * m)
    if sigma_pairs is None:
        sigma_pairs = (A, B)
    M = np.asarray(sigma_pairs[0]).shape[0]
    if sigma is None:
        sigma = estimate_sigma(*sigma_pairs)
    scale2 = output_scale2(*sigma_pairs)
    cov = CovarianceEstimates(
        D_u=D_u, D_tot=D_tot, sigma=np.asarray(sigma), m=m, M=M,
        K=K, K_tot=K_tot, scale2=scale2,
        total_only=total_only_estimator(batch) if total_only else None,
        AD=A - D, batch=batch)
    return cov


def check_sigma(sigma, scale2):
    """
    Raises
    ------
    DegenerateVarianceError :
        ``tr(Sigma) <= 1e-14 * scale2``.
    """
    tr = float(np.trace(sigma))
    if not tr > DEGENERATE_TOL * max(scale2, np.finfo(float).tiny):
        raise DegenerateVarianceError(
            "output covariance is degenerate: trace %.3g "
            "(mean squared output %.3g)" % (tr, scale2))
    return tr


class IndexEntry:
    """
    Estimated indices of one subset.

    Attributes
    ----------
    values : OrderedDict{(family, order): float}
        Raw estimates; ``family`` is ``"dGSI1"``, ``"dGSI2"``, ``"dS"``
        (scalar output) or ``"dGSI1_tot_only"``, ``order`` is
        ``"first"`` or ``"total"``.
    stderr : OrderedDict{(family, order): float}
        Asymptotic standard errors (``NaN`` when skipped).
    flags : list[str]
    """

    def __init__(self, subset, m, M, N, label=None):
        self.subset = tuple(subset)
        self.m = m
        self.M = M
        self.N = N
        self.label = label
        self.values = OrderedDict()
        self.stderr = OrderedDict()
        self.flags = []

    def add(self, family, order, value, se):
        self.values[(family, order)] = float(value)
        self.stderr[(family, order)] = float(se)

    def ci(self, family, order):
        value = self.values[(family, order)]
        half = Z95 * self.stderr[(family, order)] / np.sqrt(self.m)
        return (value - half, value + half)

    def get(self, family="dGSI1", order="first"):
        return self.values[(family, order)]

    def display(self, family="dGSI1", order="first"):
        """The estimate clamped to [0, 1] for presentation."""
        return float(np.clip(self.values[(family, order)], 0.0, 1.0))

    def __repr__(self):
        return "IndexEntry(%s, %s)" % (
            ":".join(str(i) for i in self.subset),
            ", ".join("%s/%s=%.4g" % (f, o, v)
                      for (f, o), v in self.values.items()))


def _type2(D, K, sigma_norm):
    norm = np.linalg.norm(D)
    value = norm / sigma_norm
    if norm < ZERO_NORM_TOL * sigma_norm:
        return (value, np.nan)
    # Var[<K_i/4, D>] / ||D||^2 is the delta-method variance of ||D||
    proj = np.einsum("ijk,jk->i", K / 4.0, D)
    se = np.sqrt(pairwise_var(proj)) / norm / sigma_norm
    return (value, se)


def compute_indices(cov):
    """
    Compute the first- and second-type indices of a subset with their
    asymptotic standard errors.

    Raises
    ------
    DegenerateVarianceError :
        The output covariance is (numerically) zero.
    """
    batch = cov.batch
    subset = batch.subset if batch is not None else ()
    label = batch.label if batch is not None else None
    entry = IndexEntry(subset, cov.m, cov.M, cov.N, label=label)
    tr_sigma = check_sigma(cov.sigma, cov.scale2)
    sigma_norm = np.linalg.norm(cov.sigma)
    if cov.N == 1:
        entry.add("dS", "first", *_scalar_index(batch, "first",
                                                cov.sigma[0, 0]))
        entry.add("dS", "total", *_scalar_index(batch, "total",
                                                cov.sigma[0, 0]))
    for order, D, K in [("first", cov.D_u, cov.K),
                        ("total", cov.D_tot, cov.K_tot)]:
        ktr = np.trace(K, axis1=1, axis2=2) / 4.0
        se1 = np.sqrt(pairwise_var(ktr)) / tr_sigma
        entry.add("dGSI1", order, np.trace(D) / tr_sigma, se1)
        value2, se2 = _type2(D, K, sigma_norm)
        if np.isnan(se2):
            logger.info("Second-type %s CI of %s skipped: ||D|| ~ 0" %
                        (order, subset))
            if FLAG_NO_CI2 not in entry.flags:
                entry.flags.append(FLAG_NO_CI2)
        entry.add("dGSI2", order, value2, se2)
    if cov.total_only is not None:
        # per-row summands (A - D)(A - D)^T / 2
        rows = np.sum(cov.AD**2, axis=1) / 2.0
        entry.add("dGSI1_tot_only", "total",
                  np.trace(cov.total_only) / tr_sigma,
                  np.sqrt(pairwise_var(rows)) / tr_sigma)
    if cov.M <= cov.m:
        entry.flags.append(FLAG_HEURISTIC)
    return entry


def _scalar_index(batch, order, sigma2):
    """Scalar-output index ``sigma_u / sigma`` with its SE."""
    A, B, C, D = (batch.A[:, 0], batch.B[:, 0], batch.C[:, 0],
                  batch.D[:, 0])
    if order == "first":
        rows = 2.0 * (A - D) * (C - B) / 4.0
    else:
        rows = ((A - D)**2 + (C - B)**2) / 4.0
    s_u = pairwise_sum(rows) / batch.m
    return (s_u / sigma2, np.sqrt(pairwise_var(rows)) / sigma2)


def estimate_indices(batch, sigma_pairs=None, sigma=None,
                     total_only=False):
    """
    Chain the kernels, the covariance estimates and the indices of a
    pick-freeze batch.
    """
    if not isinstance(batch, PickFreezeBatch):
        batch = PickFreezeBatch(*batch)
    cov = estimate_covariances(batch, sigma_pairs=sigma_pairs, sigma=sigma,
                               total_only=total_only)
    return compute_indices(cov)


# Results of the Loewner comparisons
U_DOMINATED = "uDominated"
OMEGA_DOMINATED = "omegaDominated"
EQUAL = "equal"
INCOMPARABLE = "incomparable"


def loewner_rank_check(D_u, D_w, tol=LOEWNER_TOL):
    """
    Compare two total covariance matrices in the Loewner order.

    Returns
    -------
    result : str
        ``"uDominated"`` (``D_u <= D_w``), ``"omegaDominated"``,
        ``"equal"`` (both) or ``"incomparable"``.
    """
    D_u = np.asarray(D_u, dtype=np.float64)
    D_w = np.asarray(D_w, dtype=np.float64)
    if D_u.shape != D_w.shape:
        raise DomainError("matrices of different shapes: %s, %s" %
                          (D_u.shape, D_w.shape))
    diff = D_w - D_u
    diff = (diff + diff.T) / 2.0
    norm = np.linalg.norm(diff)
    if norm == 0.0:
        return EQUAL
    eig = np.linalg.eigvalsh(diff)
    u_dom = eig[0] >= -tol * norm
    w_dom = eig[-1] <= tol * norm
    if u_dom and w_dom:
        return EQUAL
    elif u_dom:
        return U_DOMINATED
    elif w_dom:
        return OMEGA_DOMINATED
    return INCOMPARABLE


def loewner_comparisons(covs, entries, max_subsets=64):
    """
    Pairwise Loewner comparisons of the total covariances, with the
    check that the trace and the Frobenius norm (the numerators of both
    index types) rank the dominated subset lower.

    Parameters
    ----------
    covs : list[`CovarianceEstimates`]
    entries : list[`IndexEntry`]
        Matching ``covs``.
    max_subsets : int, optional
        Skip the comparisons beyond this number of subsets.

    Returns
    -------
    results : list[OrderedDict]
    """
    n = len(covs)
    if n > max_subsets:
        logger.info("Skipped the Loewner comparisons of %d subsets "
                    "(limit %d)" % (n, max_subsets))
        return []
    results = []
    for a in range(n):
        for b in range(a+1, n):
            if covs[a].N != covs[b].N:
                continue
            res = loewner_rank_check(covs[a].D_tot, covs[b].D_tot)
            ea, eb = entries[a], entries[b]
            # numerators of the two index types; the Sigma estimates may
            # differ between representations
            t1 = (np.trace(covs[a].D_tot), np.trace(covs[b].D_tot))
            t2 = (np.linalg.norm(covs[a].D_tot),
                  np.linalg.norm(covs[b].D_tot))
            if res == U_DOMINATED:
                consistent = t1[0] <= t1[1] and t2[0] <= t2[1]
            elif res == OMEGA_DOMINATED:
                consistent = t1[0] >= t1[1] and t2[0] >= t2[1]
            elif res == EQUAL:
                consistent = (np.isclose(t1[0], t1[1]) and
                              np.isclose(t2[0], t2[1]))
            else:
                consistent = None
            if consistent is False:
                logger.warning("Index types rank %s and %s differently "
                               "although %s" % (ea.subset, eb.subset, res))
            results.append(OrderedDict([
                ("u", list(ea.subset)),
                ("omega", list(eb.subset)),
                ("result", res),
                ("consistent", consistent),
            ]))
    return results
