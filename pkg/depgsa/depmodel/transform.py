# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Dependency models of transformed random vectors.

If ``X`` has the DM ``phi`` with lead ``X_j``, then for invertible
``T_j`` and any ``T_{~j}`` the vector ``W = (T_j(X_j), T_{~j}(X_{~j}))``
has the DM

    W_{~j} = T_{~j}( phi(T_j^{-1}(W_j), Z) ).

The symmetrized vector ``W = R * T(|X|)`` with independent random signs
``R`` (Rademacher) is also supported: the sign of the lead is carried by
the lead input itself, and the signs of the other inputs by auxiliary
uniforms.
"""

import logging

import numpy as np

from .base import DependencyModel
from ..errors import DependencyModelError
from ..utils.stats import clip_open_unit


logger = logging.getLogger(__name__)

# Levels of the lead quantiles where ``T_j^{-1}(T_j(x)) = x`` is checked
CHECK_LEVELS = np.arange(1, 100) / 100.0
# Relative tolerance of the inverse check
CHECK_TOL = 1e-9


def _check_inverse(base, t_lead, t_lead_inv):
    x = np.asarray(base.lead_ppf(CHECK_LEVELS), dtype=np.float64)
    with np.errstate(all="ignore"):
        back = np.asarray(t_lead_inv(t_lead(x)), dtype=np.float64)
    err = np.abs(back - x)
    tol = CHECK_TOL * np.maximum(1.0, np.abs(x))
    bad = ~(err <= tol)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise DependencyModelError(
            "transform inverse mismatch at x=%.6g (got %.6g)" %
            (x[k], back[k]))


def _apply_others(t_others, x):
    """Apply ``T_{~j}`` to the (n, q) DM outputs."""
    if t_others is None:
        return x
    if callable(t_others):
        return np.asarray(t_others(x), dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.shape[1]):
        out[:, i] = t_others[i](x[:, i])
    return out


class TransformedDM(DependencyModel):
    """
    DM of ``(T_j(X_j), T_{~j}(X_{~j}))`` built upon the DM of ``X``.

    Parameters
    ----------
    base : `~depgsa.depmodel.base.DependencyModel`
    t_lead, t_lead_inv : callable
        The invertible transform of the lead input and its inverse.
    t_others : callable, or list[callable], optional
        Transform of the other inputs: a function of the ``(n, q)``
        array of outputs, or one function per output in the order
        ``w_1, ..., w_{d-1}``.  ``None`` is the identity.

    Raises
    ------
    DependencyModelError :
        ``t_lead_inv`` is not the inverse of ``t_lead`` on the centiles
        of the lead input.
    """
    kind = "transformed"

    def __init__(self, base, t_lead, t_lead_inv, t_others=None):
        _check_inverse(base, t_lead, t_lead_inv)
        if (t_others is not None and not callable(t_others) and
                len(t_others) != len(base.order)):
            raise DependencyModelError("need %d transforms of the other "
                                       "inputs" % len(base.order))
        super().__init__(base.lead, base.order,
                         latent_laws=base.latent_laws, aux=base.aux)
        self.base = base
        self.t_lead = t_lead
        self.t_lead_inv = t_lead_inv
        self.t_others = t_others

    def lead_ppf(self, u):
        return np.asarray(self.t_lead(self.base.lead_ppf(u)),
                          dtype=np.float64)

    def _evaluate(self, x_lead, z, aux):
        x = self.base.evaluate(self.t_lead_inv(x_lead), z, aux)
        if self.t_others is None or callable(self.t_others):
            return _apply_others(self.t_others, x)
        return _apply_others(self.t_others[:x.shape[1]], x)


class SymmetrizedDM(DependencyModel):
    """
    DM of ``W = R * T(|X|)`` where ``R`` are independent Rademacher signs
    and ``X`` has the DM ``base``.

    The lead input ``W_j`` is drawn from one uniform ``u``: its sign is
    ``+1`` if ``u >= 1/2`` else ``-1`` and its magnitude is
    ``T_j(F_j^{<-}(|2u - 1|))``.  The sign of ``W_{w_i}`` comes from the
    auxiliary uniform ``sign<w_i>`` with the same rule.
    """
    kind = "symmetrized"

    def __init__(self, base, t_lead, t_lead_inv, t_others=None):
        _check_inverse(base, t_lead, t_lead_inv)
        aux = list(base.aux)
        aux += [("sign%d" % w, i) for i, w in enumerate(base.order, start=1)]
        super().__init__(base.lead, base.order,
                         latent_laws=base.latent_laws, aux=aux)
        self.base = base
        self.t_lead = t_lead
        self.t_lead_inv = t_lead_inv
        self.t_others = t_others

    @staticmethod
    def signs(u):
        return np.where(np.asarray(u) >= 0.5, 1.0, -1.0)

    def lead_ppf(self, u):
        u = np.asarray(u, dtype=np.float64)
        magnitude = self.t_lead(
            self.base.lead_ppf(clip_open_unit(np.abs(2*u - 1))))
        return self.signs(u) * np.asarray(magnitude, dtype=np.float64)

    def _evaluate(self, x_lead, z, aux):
        aux = np.asarray(aux, dtype=np.float64)
        if aux.ndim == 1:
            aux = aux[:, np.newaxis]
        nbase = len(self.base.aux)
        base_aux = aux[:, :nbase] if nbase else None
        x = self.base.evaluate(self.t_lead_inv(np.abs(x_lead)), z, base_aux)
        q = x.shape[1]
        if self.t_others is None or callable(self.t_others):
            x = _apply_others(self.t_others, x)
        else:
            x = _apply_others(self.t_others[:q], x)
        signs = np.column_stack([
            self.signs(self.aux_column(aux, "sign%d" % w))
            for w in self.order[:q]
        ]) if q else np.ones((x.shape[0], 0))
        return signs * x


def transform_dm(base, t_lead, t_lead_inv, t_others=None):
    """
    DM of the transformed vector ``(T_j(X_j), T_{~j}(X_{~j}))``.
    """
    return TransformedDM(base, t_lead, t_lead_inv, t_others)


def abs_symmetric_dm(base, t_lead, t_lead_inv, t_others=None):
    """
    DM of the symmetrized vector ``R * T(|X|)`` with independent
    Rademacher signs ``R``.
    """
    return SymmetrizedDM(base, t_lead, t_lead_inv, t_others)
