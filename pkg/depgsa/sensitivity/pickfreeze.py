# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Pick-freeze evaluations of a representation.

With two independent panels ``U1`` and ``U2`` of uniforms and the mask
of the columns frozen for a subset ``u``:

    A = g(U1)                    B = g(U2)
    C = g(U1 on u, U2 elsewhere) D = g(U2 on u, U1 elsewhere)

``A`` and ``B`` only depend on the representation and are shared by all
the subsets it serves.
"""

import logging

import numpy as np

from ..errors import ModelEvaluationError, ParameterError


logger = logging.getLogger(__name__)


class PickFreezeBatch:
    """
    The four output arrays of a subset, each of shape ``(m, N)``.
    """

    def __init__(self, A, B, C, D, subset=None, label=None):
        arrays = [np.atleast_2d(np.asarray(a, dtype=np.float64).T).T
                  for a in (A, B, C, D)]
        shapes = set(a.shape for a in arrays)
        if len(shapes) != 1:
            raise ParameterError("pick-freeze arrays of different shapes: "
                                 "%s" % sorted(shapes))
        self.A, self.B, self.C, self.D = arrays
        self.subset = subset
        self.label = label

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def N(self):
        return self.A.shape[1]

    def swapped(self):
        """The batch with the two panels exchanged."""
        return PickFreezeBatch(self.B, self.A, self.D, self.C,
                               subset=self.subset, label=self.label)


def _check_finite(y, what, rep):
    bad = ~np.all(np.isfinite(y), axis=1)
    if np.any(bad):
        row = int(np.argmax(bad))
        raise ModelEvaluationError("non-finite output of %s under the "
                                   "representation %s at row %d" %
                                   (what, rep.label, row), row=row)
    return y


class RepresentationSamples:
    """
    Panels of a run and the cached outputs ``A``, ``B`` of one
    representation.

    Parameters
    ----------
    rep : `~depgsa.representations.representation.Representation`
    U1, U2 : 2D `~numpy.ndarray`
        The two independent panels, shared by all the representations.
    threads : int, optional
    """

    def __init__(self, rep, U1, U2, threads=1):
        if U1.shape != U2.shape:
            raise ParameterError("panels of different shapes")
        self.rep = rep
        self.U1 = U1
        self.U2 = U2
        self.threads = threads
        self._A = None
        self._B = None

    @property
    def A(self):
        if self._A is None:
            self._A = _check_finite(
                self.rep.evaluate(self.U1, threads=self.threads), "A",
                self.rep)
        return self._A

    @property
    def B(self):
        if self._B is None:
            self._B = _check_finite(
                self.rep.evaluate(self.U2, threads=self.threads), "B",
                self.rep)
        return self._B

    def head(self, m):
        """
        The samples of the first ``m`` rows, sharing the outputs already
        evaluated.
        """
        if m > self.U1.shape[0]:
            raise ParameterError("only %d rows available (asked %d)" %
                                 (self.U1.shape[0], m))
        samples = RepresentationSamples(self.rep, self.U1[:m], self.U2[:m],
                                        threads=self.threads)
        samples._A = None if self._A is None else self._A[:m]
        samples._B = None if self._B is None else self._B[:m]
        return samples

    def release(self):
        self._A = None
        self._B = None


def pick_freeze_evaluate(samples, u):
    """
    Evaluate the pick-freeze batch of the subset ``u``.

    Parameters
    ----------
    samples : `RepresentationSamples`
        Representation (serving ``u``) with its panels.
    u : iterable of int

    Returns
    -------
    batch : `PickFreezeBatch`

    Raises
    ------
    ModelEvaluationError :
        Non-finite outputs; the error carries the row.
    """
    rep = samples.rep
    U1, U2 = samples.U1, samples.U2
    mask = rep.frozen_mask(u, width=U1.shape[1])
    used = mask[:rep.width]
    A, B = samples.A, samples.B
    if used.all():
        C, D = A, B
    elif not used.any():
        C, D = B, A
    else:
        C = _check_finite(
            rep.evaluate(np.where(mask, U1, U2), threads=samples.threads),
            "C", rep)
        D = _check_finite(
            rep.evaluate(np.where(mask, U2, U1), threads=samples.threads),
            "D", rep)
    logger.debug("Pick-freeze batch of %s: %d frozen of %d columns" %
                 (sorted(u), used.sum(), rep.width))
    return PickFreezeBatch(A, B, C, D, subset=tuple(sorted(u)),
                           label=rep.label)
