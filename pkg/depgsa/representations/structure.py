# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Block structure of the model inputs.

The inputs ``{1..d}`` are partitioned into the (possibly empty) block of
independent inputs and the dependent blocks, which are independent of
each other.  Every dependent block knows how to build its dependency
model for any permutation of its indices, and how to sample its joint
law directly (without the DM) for checks.
"""

import logging
from collections import OrderedDict

import numpy as np
from scipy import special

from ..depmodel.copulas import CopulaSpec, gaussian_dm, student_dm
from ..depmodel.simplex import simplex_dm
from ..empirical import constrained_pair_dms, rejection_sample
from ..margins import make_margin
from ..errors import DomainError, ParameterError, DependencyModelError
from ..utils.stats import clip_open_unit, get_rng


logger = logging.getLogger(__name__)

# Kinds of dependent blocks, in the order of the configuration docs
BLOCK_KINDS = ("gaussian", "student", "simplex", "empirical", "custom")


class DependentBlock:
    """
    A block of dependent inputs.

    Parameters
    ----------
    kind : str
        One of ``BLOCK_KINDS``.
    indices : list[int]
        Input indices of the block (at least 2).
    margins : dict{int: Margin or dict}, optional
        Margins of the inputs (``gaussian`` and ``student`` blocks).
    copula : `~depgsa.depmodel.copulas.CopulaSpec`, optional
        Copula of the ``gaussian`` and ``student`` blocks.
    sampler : `~depgsa.empirical.ConstrainedSampler`, optional
        Constrained sampler of the ``empirical`` pair.
    fit_options : dict, optional
        Options of the ``empirical`` fits: ``nsample``, ``seed``,
        ``levels``, ``features``, ``ridge``.
    dm_factory : callable, optional
        ``dm_factory(perm)`` returning the DM of a ``custom`` block.
    direct_sampler : callable, optional
        ``direct_sampler(n, rng)`` sampling a ``custom`` block, with
        columns in increasing index order.
    """

    def __init__(self, kind, indices, margins=None, copula=None,
                 sampler=None, fit_options=None, dm_factory=None,
                 direct_sampler=None):
        if kind not in BLOCK_KINDS:
            raise ParameterError("unknown block kind: %s" % kind)
        self.kind = kind
        self.indices = tuple(sorted(int(i) for i in indices))
        if len(self.indices) < 2:
            raise DomainError("dependent blocks need >= 2 inputs "
                              "(got %s)" % (self.indices,))
        if len(set(self.indices)) != len(self.indices):
            raise ParameterError("duplicate indices in block %s" %
                                 (self.indices,))
        self.margins = {int(k): make_margin(v)
                        for k, v in (margins or {}).items()}
        self.copula = copula
        self.sampler = sampler
        self.fit_options = dict(fit_options or {})
        self.dm_factory = dm_factory
        self.direct_sampler = direct_sampler
        self._dms = {}
        self._check()

    def _check(self):
        if self.kind in ("gaussian", "student"):
            if not isinstance(self.copula, CopulaSpec):
                raise DependencyModelError("%s block requires a copula" %
                                           self.kind)
            if self.copula.family != self.kind:
                raise DependencyModelError("copula family '%s' does not "
                                           "match the block kind '%s'" %
                                           (self.copula.family, self.kind))
            if sorted(self.copula.indices) != list(self.indices):
                raise DependencyModelError("copula indices %s do not match "
                                           "the block %s" %
                                           (self.copula.indices,
                                            self.indices))
            missing = set(self.indices) - set(self.margins)
            if missing:
                raise DependencyModelError("missing margins of inputs %s" %
                                           sorted(missing))
        elif self.kind == "empirical":
            if self.dim != 2:
                raise DependencyModelError("empirical blocks are pairs")
            if self.sampler is None:
                raise DependencyModelError("empirical block requires a "
                                           "constrained sampler")
        elif self.kind == "custom":
            if self.dm_factory is None:
                raise DependencyModelError("custom block requires a "
                                           "DM factory")

    @property
    def dim(self):
        return len(self.indices)

    def make_dm(self, perm):
        """
        Build (or get the cached) DM of the block for the permutation
        ``perm`` of its indices.
        """
        perm = tuple(int(i) for i in perm)
        if sorted(perm) != list(self.indices):
            raise ParameterError("%s is not a permutation of the block %s" %
                                 (perm, self.indices))
        if perm in self._dms:
            return self._dms[perm]
        if self.kind == "gaussian":
            dm = gaussian_dm(self.copula, self.margins, perm)
        elif self.kind == "student":
            dm = student_dm(self.copula, self.margins, perm)
        elif self.kind == "simplex":
            dm = simplex_dm(perm)
        elif self.kind == "empirical":
            opts = self.fit_options
            dms, _ = constrained_pair_dms(
                self.sampler, self.indices,
                nsample=opts.get("nsample", 10000),
                seed=opts.get("seed"),
                levels=opts.get("levels"),
                features=opts.get("features", ("1", "x", "x^2")),
                ridge=opts.get("ridge", 1e-6))
            self._dms.update(dms)
            dm = dms[perm]
        else:
            dm = self.dm_factory(perm)
        logger.debug("Built %s DM for permutation %s" % (self.kind, perm))
        self._dms[perm] = dm
        return dm

    def sample_direct(self, n, rng=None):
        """
        Sample the joint law of the block without its DMs; columns in
        increasing index order.
        """
        rng = get_rng(rng)
        d = self.dim
        if self.kind in ("gaussian", "student"):
            R = self.copula.submatrix(self.indices)
            y = rng.multivariate_normal(np.zeros(d), R, size=n)
            if self.kind == "gaussian":
                u = special.ndtr(y)
            else:
                nu = self.copula.nu
                w = rng.chisquare(nu, size=n) / nu
                u = special.stdtr(nu, y / np.sqrt(w)[:, np.newaxis])
            u = clip_open_unit(u)
            return np.column_stack([self.margins[i].inverse_cdf(u[:, k])
                                    for k, i in enumerate(self.indices)])
        elif self.kind == "simplex":
            return rng.dirichlet(np.ones(d + 1), size=n)[:, :d]
        elif self.kind == "empirical":
            seed = int(rng.integers(2**63))
            return rejection_sample(self.sampler, n, seed=seed)
        if self.direct_sampler is not None:
            return self.direct_sampler(n, rng)
        return self.make_dm(self.indices).sample(n, rng=rng)

    def __repr__(self):
        return "DependentBlock(%s, %s)" % (self.kind, self.indices)


class BlockStructure:
    """
    Partition of the inputs ``{1..d}`` into independent inputs and
    dependent blocks.

    Parameters
    ----------
    d : int
        Number of inputs.
    independent : dict{int: Margin or dict}, optional
        Margins of the independent inputs.
    blocks : list[`DependentBlock`], optional

    Raises
    ------
    ParameterError :
        The blocks do not partition ``{1..d}``.
    """

    def __init__(self, d, independent=None, blocks=()):
        self.d = int(d)
        self.independent = OrderedDict(
            (int(k), make_margin(v))
            for k, v in sorted((independent or {}).items(),
                               key=lambda kv: int(kv[0])))
        self.blocks = list(blocks)
        seen = list(self.independent.keys())
        for block in self.blocks:
            seen.extend(block.indices)
        if len(seen) != len(set(seen)):
            raise ParameterError("an input belongs to several blocks")
        if sorted(seen) != list(range(1, self.d + 1)):
            missing = sorted(set(range(1, self.d + 1)) - set(seen))
            extra = sorted(set(seen) - set(range(1, self.d + 1)))
            raise ParameterError("blocks do not partition {1..%d} "
                                 "(missing %s, out of range %s)" %
                                 (self.d, missing, extra))

    @property
    def independent_indices(self):
        return tuple(self.independent.keys())

    @property
    def dims(self):
        """Sizes ``d_k`` of the dependent blocks."""
        return [b.dim for b in self.blocks]

    def block_of(self, i):
        """Position of the dependent block holding ``i``, or ``None``."""
        for k, block in enumerate(self.blocks):
            if i in block.indices:
                return k
        return None

    def split(self, u):
        """
        Split a subset into its independent part and its parts in the
        dependent blocks.
        """
        u = set(int(i) for i in u)
        bad = [i for i in u if not 1 <= i <= self.d]
        if bad:
            raise DomainError("input index out of range: %s" % bad)
        indep = tuple(sorted(u & set(self.independent)))
        parts = [frozenset(u & set(b.indices)) for b in self.blocks]
        return (indep, parts)

    def sample_direct(self, n, rng=None):
        """
        Sample the inputs directly from their joint law; shape ``(n, d)``.
        """
        rng = get_rng(rng)
        x = np.empty((n, self.d))
        for i, margin in self.independent.items():
            x[:, i-1] = margin.rvs(n, rng=rng)
        for block in self.blocks:
            xb = block.sample_direct(n, rng=rng)
            for k, i in enumerate(block.indices):
                x[:, i-1] = xb[:, k]
        return x

    def __repr__(self):
        return "BlockStructure(d=%d, independent=%s, blocks=%s)" % (
            self.d, list(self.independent_indices), self.blocks)
