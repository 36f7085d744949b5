# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Dependency model of the uniform distribution on the simplex

    S_d = {x in R^d : x_i >= 0, x_1 + ... + x_d <= 1}.

Every margin is Beta(1, d).  Given the lead and the previous inputs with
sum ``s``, the next input is ``(1 - s) B_i`` where ``B_i ~ Beta(1, d-i)``
is independent of the past; for a pair this reads
``X_{w_1} = U (1 - X_j)``.
"""

import numpy as np

from .base import DependencyModel, LatentLaw
from ..margins import Beta
from ..errors import ParameterError
from ..utils.stats import clip_open_unit


def _beta1_ppf(u, k):
    """Quantile of Beta(1, k): ``1 - (1 - u)^(1/k)``."""
    if k == 1:
        return u
    return -np.expm1(np.log1p(-u) / k)


class SimplexDM(DependencyModel):
    kind = "simplex"

    def __init__(self, perm):
        perm = tuple(perm)
        if len(perm) < 2:
            raise ParameterError("simplex block requires >= 2 inputs")
        d = len(perm)
        margins = {i: Beta(1.0, d) for i in perm}
        latent_laws = [LatentLaw.uniform()] * (d - 1)
        super().__init__(perm[0], perm[1:], margins=margins,
                         latent_laws=latent_laws)

    def lead_ppf(self, u):
        return _beta1_ppf(clip_open_unit(u), self.dim)

    def _evaluate(self, x_lead, z, aux):
        d = self.dim
        q = z.shape[1]
        x = np.empty((x_lead.shape[0], q))
        remaining = 1.0 - x_lead
        for i in range(q):
            x[:, i] = remaining * _beta1_ppf(clip_open_unit(z[:, i]), d-i-1)
            remaining = remaining - x[:, i]
        return x


def simplex_dm(perm):
    """
    DM of the uniform distribution on the simplex for the permutation
    ``perm`` of the block indices.
    """
    return SimplexDM(perm)


def simplex_pair_dms(i, j):
    """
    Both DMs of a uniform pair on the 2-simplex: ``X_j = U (1 - X_i)``
    and ``X_i = U (1 - X_j)``.
    """
    return (SimplexDM((i, j)), SimplexDM((j, i)))
