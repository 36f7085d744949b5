# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Closed-form sensitivity indices of the built-in test models.

For the linear model of a Gaussian vector, the index of any subset ``u``
follows from the conditional variance of a Gaussian vector,

    dS_u = b_u^T Sigma_uu^{-1} b_u / V,   b_u = Cov(X_u, M(X)),

and the total index equals the first-order one.  For the portfolio
model, the closed forms cover the subsets mirrored by its four
representations; the other subsets are marked ``NOT_AVAILABLE``.
"""

import logging
from collections import OrderedDict
from itertools import combinations

import numpy as np

from .builtin import LinearGaussian, Portfolio


logger = logging.getLogger(__name__)

NOT_AVAILABLE = "not-available"


def _all_subsets(d):
    return [c for p in range(1, d + 1)
            for c in combinations(range(1, d + 1), p)]


def linear_closed_forms(model):
    """
    The printed closed forms of the linear model: ``dS_1, dS_2, dS_3,
    dS_12, dS_23, dS_13``.
    """
    s1, s2, s3 = model.sigma
    r12, r13, r23 = model.rho
    V = (s1**2 + s2**2 + s3**2 +
         2*r12*s1*s2 + 2*r13*s1*s3 + 2*r23*s2*s3)
    a1 = s1 + r12*s2 + r13*s3
    a2 = s2 + r12*s1 + r23*s3
    a3 = s3 + r13*s1 + r23*s2
    ds = OrderedDict()
    ds[(1,)] = a1**2 / V
    ds[(2,)] = a2**2 / V
    ds[(3,)] = a3**2 / V
    ds[(1, 2)] = (((1 - r12**2) * a1**2 +
                   (s2*(1 - r12**2) + s3*(r23 - r12*r13))**2) /
                  ((1 - r12**2) * V))
    ds[(2, 3)] = (((1 - r23**2) * a2**2 +
                   (s3*(1 - r23**2) + s1*(r13 - r12*r23))**2) /
                  ((1 - r23**2) * V))
    ds[(1, 3)] = (((1 - r13**2) * a3**2 +
                   (s1*(1 - r13**2) + s2*(r12 - r13*r23))**2) /
                  ((1 - r13**2) * V))
    return ds


def linear_indices(model, subsets=None):
    """
    Indices ``(first, total)`` of the linear model for any subsets.
    """
    S = model.covariance
    V = float(S.sum())
    b = S.sum(axis=1)
    result = OrderedDict()
    for u in (subsets or _all_subsets(3)):
        u = tuple(sorted(u))
        pos = [i - 1 for i in u]
        bu = b[pos]
        value = float(bu @ np.linalg.solve(S[np.ix_(pos, pos)], bu)) / V
        result[u] = (value, value)
    return result


def _student_moments(nu, r34, s3, s4):
    """
    Variance of ``X3 X4`` and of ``E[X3 X4 | X3]`` for the bivariate t
    with scale matrix ``[[s3^2, r s3 s4], [r s3 s4, s4^2]]``.

    With ``X = sqrt(W) G``, ``W = nu / chi2_nu`` and ``G`` Gaussian,
    ``E[W] = nu/(nu-2)`` and ``E[W^2] = nu^2/((nu-2)(nu-4))``; the
    conditional mean ``E[X4 | X3] = r s4/s3 X3`` is linear.
    """
    c = s3**2 * s4**2 * nu**2 / ((nu - 2)**2 * (nu - 4))
    v_first = r34**2 * c * 2 * (nu - 1)
    v_total = c * (nu - 2 + r34**2 * nu)
    return (v_first, v_total)


def portfolio_variance(model):
    """The output variance ``D`` of the portfolio model."""
    s1, s2, s3, s4 = model.sigma
    r12, r34 = model.rho
    _, v_total = _student_moments(model.nu, r34, s3, s4)
    return s1**2 * s2**2 * (1 + r12**2) + v_total


def portfolio_indices(model, subsets=None):
    """
    Indices ``(first, total)`` of the portfolio model.  Subsets without
    a closed form map to ``NOT_AVAILABLE``.

    The Gaussian pair contributes ``Var(X1 X2) = s1^2 s2^2 (1 + r12^2)``
    of which ``2 r12^2 s1^2 s2^2`` is explained by ``X1`` alone; the
    Student pair is given by `_student_moments()`.  The total index of a
    lead equals the index of its pair, since ``E[M | Z]`` is constant in
    the latent input of the pair.
    """
    s1, s2, s3, s4 = model.sigma
    r12, r34 = model.rho
    g_total = s1**2 * s2**2 * (1 + r12**2)
    t_first, t_total = _student_moments(model.nu, r34, s3, s4)
    D = g_total + t_total
    dS1 = 2 * r12**2 * s1**2 * s2**2 / D
    dST1 = g_total / D
    dS3 = t_first / D
    dST3 = t_total / D
    known = {
        (1,): (dS1, dST1), (2,): (dS1, dST1),
        (3,): (dS3, dST3), (4,): (dS3, dST3),
        (1, 2): (dST1, dST1), (3, 4): (dST3, dST3),
        (1, 3): (dS1 + dS3, 1.0), (2, 3): (dS1 + dS3, 1.0),
        (1, 4): (dS1 + dS3, 1.0), (2, 4): (dS1 + dS3, 1.0),
        (1, 2, 3, 4): (1.0, 1.0),
    }
    result = OrderedDict()
    for u in (subsets or _all_subsets(4)):
        u = tuple(sorted(u))
        result[u] = known.get(u, NOT_AVAILABLE)
    return result


def analytic_indices(model, subsets=None):
    """
    Reference indices of a built-in model.

    Returns
    -------
    indices : OrderedDict{tuple[int]: (float, float)} or ``NOT_AVAILABLE``
        ``(first, total)`` per subset.
    """
    if isinstance(model, LinearGaussian):
        return linear_indices(model, subsets)
    elif isinstance(model, Portfolio):
        return portfolio_indices(model, subsets)
    logger.info("No closed-form indices for the model '%s'" % model.name)
    return NOT_AVAILABLE
