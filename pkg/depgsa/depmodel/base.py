# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Dependency models (DMs): functional representations of a dependent
random vector.

A dependency model of a block of ``d`` inputs, built for a permutation
``(j, w_1, ..., w_{d-1})`` of the block indices, writes

    X_{w_i} = phi_i(X_j, Z_1, ..., Z_i),    i = 1, ..., d-1,

where ``X_j`` (the *lead* input) follows its margin, and the latent
``Z_i`` are mutually independent and independent of ``X_j``.  Discrete
leads need an extra independent uniform ``lambda`` feeding the
distributional transform; such *auxiliary* uniforms are listed by the
``aux`` attribute.

Because ``phi_i`` only depends on the first ``i`` latents, a DM
conditioned on its prefix ``(X_j, X_{w_1}, ..., X_{w_p})`` is the
same DM with the prefix inputs frozen (see ``dm_condition_prefix()``).
"""

import logging

import numpy as np
from scipy import special

from ..errors import DomainError, ParameterError
from ..utils.stats import clip_open_unit, get_rng


logger = logging.getLogger(__name__)


class LatentLaw:
    """
    Law of a latent input, sampled by inversion of a U(0, 1) input.

    Parameters
    ----------
    name : str
        ``"normal"``, ``"student"`` or ``"uniform"``.
    df : float, optional
        Degrees of freedom of the ``"student"`` law.
    """
    NAMES = ("normal", "student", "uniform")

    def __init__(self, name, df=None):
        if name not in self.NAMES:
            raise ParameterError("unknown latent law: %s" % name)
        if name == "student" and not (df is not None and df > 0):
            raise ParameterError("student latent law requires df > 0")
        self.name = name
        self.df = None if df is None else float(df)

    @classmethod
    def normal(cls):
        return cls("normal")

    @classmethod
    def student(cls, df):
        return cls("student", df=df)

    @classmethod
    def uniform(cls):
        return cls("uniform")

    def ppf(self, u):
        u = clip_open_unit(u)
        if self.name == "normal":
            return special.ndtri(u)
        elif self.name == "student":
            return special.stdtrit(self.df, u)
        return u

    def cdf(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self.name == "normal":
            return special.ndtr(z)
        elif self.name == "student":
            return special.stdtr(self.df, z)
        return np.clip(z, 0.0, 1.0)

    def __repr__(self):
        if self.name == "student":
            return "LatentLaw(student, df=%g)" % self.df
        return "LatentLaw(%s)" % self.name

    def __eq__(self, other):
        return (isinstance(other, LatentLaw) and
                (self.name, self.df) == (other.name, other.df))

    def __hash__(self):
        return hash((self.name, self.df))


class DependencyModel:
    """
    Base class of the dependency models.

    Sub-classes implement ``_evaluate()``, and may override
    ``lead_ppf()`` when the lead input is not simply drawn by the inverse
    CDF of its margin.

    Attributes
    ----------
    kind : str
        Name of the model family.
    lead : int
        Index of the lead input ``j``.
    order : tuple[int]
        Indices ``(w_1, ..., w_{d-1})`` of the other inputs, in the order
        they are generated.
    margins : dict{int: `~depgsa.margins.Margin`}
        Margins of the inputs, when known explicitly.
    latent_laws : list[`LatentLaw`]
        Laws of the latent inputs ``Z_1, ..., Z_{d-1}``.
    aux : list[(str, int)]
        Auxiliary U(0, 1) inputs as ``(name, position)``, where
        ``position`` is 0 for the lead input and ``i`` for ``X_{w_i}``.
    """
    kind = None

    def __init__(self, lead, order, margins=None, latent_laws=None, aux=()):
        self.lead = int(lead)
        self.order = tuple(int(w) for w in order)
        components = (self.lead,) + self.order
        if len(set(components)) != len(components):
            raise ParameterError("duplicate indices in permutation: %s" %
                                 (components,))
        self.margins = dict(margins or {})
        if latent_laws is None:
            latent_laws = [LatentLaw.uniform()] * len(self.order)
        self.latent_laws = list(latent_laws)
        if len(self.latent_laws) != len(self.order):
            raise ParameterError("need %d latent laws, got %d" %
                                 (len(self.order), len(self.latent_laws)))
        self.aux = list(aux)

    @property
    def components(self):
        """The permutation ``(j, w_1, ..., w_{d-1})``."""
        return (self.lead,) + self.order

    @property
    def indices(self):
        """The block indices in increasing order."""
        return tuple(sorted(self.components))

    @property
    def dim(self):
        return len(self.order) + 1

    def lead_ppf(self, u):
        """
        Map U(0, 1) inputs to the lead input (its inverse CDF).
        """
        return self.margins[self.lead].inverse_cdf(clip_open_unit(u))

    def aux_column(self, aux, name):
        """
        Return the column of the auxiliary input ``name``.

        Raises
        ------
        DomainError :
            The auxiliary inputs are missing.
        """
        names = [a[0] for a in self.aux]
        if aux is None:
            raise DomainError("auxiliary input '%s' is required" % name)
        aux = np.asarray(aux, dtype=np.float64)
        if aux.ndim == 1:
            aux = aux[:, np.newaxis]
        k = names.index(name)
        if aux.shape[1] <= k:
            raise DomainError("auxiliary input '%s' is required" % name)
        return aux[:, k]

    def evaluate(self, x_lead, z, aux=None):
        """
        Evaluate the DM on ``n`` rows.

        Parameters
        ----------
        x_lead : 1D array_like, length ``n``
            Values of the lead input.
        z : 2D array_like, shape ``(n, q)``
            Values of the first ``q <= d-1`` latent inputs.
        aux : 2D array_like, shape ``(n, len(self.aux))``, optional
            Auxiliary uniforms, required when ``self.aux`` is not empty.

        Returns
        -------
        x : 2D `~numpy.ndarray`, shape ``(n, q)``
            Values of ``X_{w_1}, ..., X_{w_q}``.
        """
        x_lead = np.atleast_1d(np.asarray(x_lead, dtype=np.float64))
        z = np.asarray(z, dtype=np.float64)
        if z.ndim == 1:
            z = z[:, np.newaxis]
        if z.ndim != 2 or z.shape[0] != x_lead.shape[0]:
            raise ParameterError("latent inputs must have shape (n, q) "
                                 "with n = %d" % x_lead.shape[0])
        if z.shape[1] > len(self.order):
            raise ParameterError("at most %d latent inputs, got %d" %
                                 (len(self.order), z.shape[1]))
        if self.aux and aux is None:
            raise DomainError("auxiliary inputs %s are required" %
                              [a[0] for a in self.aux])
        return self._evaluate(x_lead, z, aux)

    def _evaluate(self, x_lead, z, aux):
        raise NotImplementedError

    def sample(self, n, rng=None):
        """
        Draw ``n`` samples of the block by drawing the lead, latent and
        auxiliary inputs independently.

        Returns
        -------
        x : 2D `~numpy.ndarray`, shape ``(n, d)``
            Columns ordered as ``self.indices``.
        """
        rng = get_rng(rng)
        u = rng.random((n, self.dim + len(self.aux)))
        x_lead = self.lead_ppf(u[:, 0])
        z = np.column_stack([law.ppf(u[:, i+1])
                             for i, law in enumerate(self.latent_laws)])
        aux = u[:, self.dim:] if self.aux else None
        x_rest = self.evaluate(x_lead, z, aux)
        by_index = dict(zip(self.components,
                            [x_lead] + [x_rest[:, i]
                                        for i in range(len(self.order))]))
        return np.column_stack([by_index[i] for i in self.indices])

    def __repr__(self):
        return "%s(%s)" % (self.__class__.__name__,
                           ", ".join(str(i) for i in self.components))


class PrefixLaw:
    """
    Joint law of the prefix ``(X_j, X_{w_1}, ..., X_{w_p})`` of a DM,
    generated by the lead input and the first ``p`` latents.
    """

    def __init__(self, dm, p):
        self.dm = dm
        self.p = p
        self.components = dm.components[:p+1]

    def sample(self, n, rng=None):
        """
        Draw ``n`` samples of the prefix; columns ordered as
        ``self.components``.
        """
        x = self.dm.sample(n, rng=rng)
        pos = [self.dm.indices.index(i) for i in self.components]
        return x[:, pos]


class SuffixDM(DependencyModel):
    """
    The DM of the suffix ``(X_{w_{p+1}}, ..., X_{w_{d-1}})`` conditioned
    on the prefix of the parent DM.

    The conditioning tuple is ``(x_j, z_1, ..., z_p)``: the lead value
    and the ``p`` prefix latents.  The suffix latents ``z_{p+1}, ...``
    are the inputs of the DM proper.  The evaluation is the parent DM
    restricted to the suffix outputs, hence bit-identical to it.

    Attributes
    ----------
    suffix : tuple[int]
        Indices of the conditioned inputs, same as ``order``.
    """

    def __init__(self, parent, p):
        if not 1 <= p <= parent.dim - 1:
            raise DomainError("prefix length must be in [1, %d]" %
                              (parent.dim - 1))
        self.parent = parent
        self.p = p
        super().__init__(parent.lead, parent.order[p:],
                         margins=parent.margins,
                         latent_laws=parent.latent_laws[p:],
                         aux=parent.aux)
        self.kind = parent.kind

    @property
    def suffix(self):
        return self.order

    def lead_ppf(self, u):
        return self.parent.lead_ppf(u)

    def evaluate(self, x_lead, z, aux=None):
        """
        Evaluate the suffix on ``n`` rows.

        Parameters
        ----------
        x_lead : 1D array_like, length ``n``
        z : 2D array_like, shape ``(n, p + q)``
            The ``p`` prefix latents, then the first ``q`` suffix latents.
        aux : 2D array_like, optional

        Returns
        -------
        x : 2D `~numpy.ndarray`, shape ``(n, q)``
        """
        z = np.asarray(z, dtype=np.float64)
        if z.ndim == 1:
            z = z[:, np.newaxis]
        if z.ndim != 2 or z.shape[1] < self.p:
            raise ParameterError("need the %d prefix latent inputs" % self.p)
        x = self.parent.evaluate(x_lead, z, aux)
        return x[:, self.p:]

    def sample(self, n, rng=None):
        """
        Draw ``n`` samples of the suffix (prefix drawn along); columns
        ordered as ``self.suffix``.
        """
        x = self.parent.sample(n, rng=rng)
        pos = [self.parent.indices.index(i) for i in self.suffix]
        return x[:, pos]


def dm_condition_prefix(dm, p):
    """
    Split a DM into the law of its prefix and the DM of the suffix
    conditioned on the prefix.

    Parameters
    ----------
    dm : `DependencyModel`
    p : int
        Number of the prefix latents, ``0 <= p <= d-1``.  The prefix is
        ``(X_j, X_{w_1}, ..., X_{w_p})``; with ``p = 0`` the suffix DM is
        ``dm`` itself, and with ``p = d-1`` the suffix is empty.

    Returns
    -------
    prefix : `PrefixLaw`
    suffix : `DependencyModel`

    Raises
    ------
    DomainError :
        ``p`` out of range.
    """
    if not 0 <= p <= dm.dim - 1:
        raise DomainError("prefix length %s not in [0, %d]" %
                          (p, dm.dim - 1))
    prefix = PrefixLaw(dm, p)
    if p == 0:
        return (prefix, dm)
    return (prefix, SuffixDM(dm, p))
