# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Univariate marginal distributions.

Every margin exposes the CDF ``F``, the left limit ``F(x-) = P(X < x)``,
the point mass ``P(X = x)``, the generalized inverse
``F^{<-}(p) = inf{x : F(x) >= p}`` and the distributional transform

    tau(x, lambda) = P(X < x) + lambda * P(X = x),

which maps any (possibly discrete) variable to a U(0, 1) variable when
``lambda ~ U(0, 1)`` is independent of ``X``.

The methods accept scalars or NumPy arrays and are vectorized; scalar
inputs give scalar outputs.

Currently supported families:

- ``uniform``:   Uniform(a, b)
- ``normal``:    Normal(mu, sigma)
- ``student``:   StudentT(nu, loc, scale)
- ``beta``:      Beta(alpha, beta)
- ``bernoulli``: Bernoulli(p)
- ``discrete``:  finite support with probabilities
- ``empirical``: empirical distribution of a sample
"""

import logging
from collections import OrderedDict

import numpy as np
from scipy import special

from .errors import ParameterError, DomainError
from .utils.stats import clip_open_unit, get_rng


logger = logging.getLogger(__name__)

# Tolerance on the total probability of the discrete families
PROB_SUM_TOL = 1e-12


def _scalar_or_array(a):
    a = np.asarray(a, dtype=np.float64)
    return a[()] if a.ndim == 0 else a


class Margin:
    """
    Base class of the univariate margins.

    Sub-classes implement ``_cdf()`` and ``_ppf()`` (the quantile function
    on the open interval (0, 1)), set the ``family`` name and the
    ``continuous`` flag, and provide ``support``, ``mean`` and ``var``.
    The discrete sub-classes also override ``cdf_left()`` and ``pmf()``.

    Attributes
    ----------
    family : str
        Family name, as used in the configurations.
    continuous : bool
        Whether the CDF is continuous (then ``tau(x, lambda) = F(x)``).
    """
    family = None
    params = ()
    continuous = True

    def cdf(self, x):
        """
        The CDF ``P(X <= x)``; nondecreasing and right-continuous.
        """
        return _scalar_or_array(self._cdf(np.asarray(x, dtype=np.float64)))

    def cdf_left(self, x):
        """
        The left limit of the CDF ``P(X < x)``.
        """
        return self.cdf(x)

    def pmf(self, x):
        """
        The point mass ``P(X = x)``, zero for continuous margins.
        """
        x = np.asarray(x, dtype=np.float64)
        return _scalar_or_array(np.zeros_like(x))

    def inverse_cdf(self, p):
        """
        The generalized inverse ``inf{x : F(x) >= p}``.

        At ``p = 0`` (resp. ``p = 1``) the infimum (resp. supremum) of the
        support is returned when it is finite.

        Raises
        ------
        DomainError :
            ``p`` outside [0, 1], or ``p`` at an end point where the
            support is unbounded.
        """
        p = np.asarray(p, dtype=np.float64)
        if np.any(np.isnan(p)) or np.any((p < 0) | (p > 1)):
            raise DomainError("probability outside [0, 1]")
        lo, hi = self.support
        if np.any(p == 0) and not np.isfinite(lo):
            raise DomainError("inverse CDF at p=0 is -inf for %s" % self)
        if np.any(p == 1) and not np.isfinite(hi):
            raise DomainError("inverse CDF at p=1 is +inf for %s" % self)
        inner = np.clip(p, np.nextafter(0, 1), np.nextafter(1, 0))
        x = np.asarray(self._ppf(inner), dtype=np.float64)
        x = np.where(p == 0, lo, x)
        x = np.where(p == 1, hi, x)
        return _scalar_or_array(x)

    def distributional_transform(self, x, lam):
        """
        The distributional transform ``P(X < x) + lam * P(X = x)``.

        For continuous margins this is ``F(x)`` whatever ``lam``.
        """
        if self.continuous:
            return self.cdf(x)
        lam = np.asarray(lam, dtype=np.float64)
        return _scalar_or_array(self.cdf_left(x) + lam * self.pmf(x))

    def rvs(self, size, rng=None):
        """
        Draw random variates by inversion.
        """
        u = clip_open_unit(get_rng(rng).random(size))
        return self.inverse_cdf(u)

    @property
    def support(self):
        return (-np.inf, np.inf)

    def to_dict(self):
        """
        Parameters of the margin as a dict accepted by ``make_margin()``.
        """
        raise NotImplementedError

    def __repr__(self):
        params = ", ".join("%s=%s" % (k, v) for k, v in self.to_dict().items()
                           if k != "family")
        return "%s(%s)" % (self.__class__.__name__, params)

    def __eq__(self, other):
        return (type(self) is type(other) and
                self.to_dict() == other.to_dict())

    def __hash__(self):
        return hash(repr(self))


class Uniform(Margin):
    family = "uniform"
    params = ("a", "b")

    def __init__(self, a=0.0, b=1.0):
        a, b = float(a), float(b)
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ParameterError("Uniform requires finite a < b")
        self.a, self.b = a, b

    def _cdf(self, x):
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)

    def _ppf(self, p):
        return self.a + p * (self.b - self.a)

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def mean(self):
        return 0.5 * (self.a + self.b)

    @property
    def var(self):
        return (self.b - self.a)**2 / 12.0

    def to_dict(self):
        return OrderedDict([("family", self.family),
                            ("a", self.a), ("b", self.b)])


class Normal(Margin):
    family = "normal"
    params = ("mu", "sigma")

    def __init__(self, mu=0.0, sigma=1.0):
        mu, sigma = float(mu), float(sigma)
        if not (np.isfinite(mu) and sigma > 0 and np.isfinite(sigma)):
            raise ParameterError("Normal requires sigma > 0")
        self.mu, self.sigma = mu, sigma

    def _cdf(self, x):
        return special.ndtr((x - self.mu) / self.sigma)

    def _ppf(self, p):
        return self.mu + self.sigma * special.ndtri(p)

    @property
    def mean(self):
        return self.mu

    @property
    def var(self):
        return self.sigma**2

    def to_dict(self):
        return OrderedDict([("family", self.family),
                            ("mu", self.mu), ("sigma", self.sigma)])


class StudentT(Margin):
    """
    Location-scale Student t distribution with ``nu`` degrees of freedom.
    """
    family = "student"
    params = ("nu", "loc", "scale")

    def __init__(self, nu, loc=0.0, scale=1.0):
        nu, loc, scale = float(nu), float(loc), float(scale)
        if not (nu > 0 and scale > 0 and np.isfinite(loc)):
            raise ParameterError("StudentT requires nu > 0 and scale > 0")
        self.nu, self.loc, self.scale = nu, loc, scale

    def _cdf(self, x):
        return special.stdtr(self.nu, (x - self.loc) / self.scale)

    def _ppf(self, p):
        return self.loc + self.scale * special.stdtrit(self.nu, p)

    @property
    def mean(self):
        return self.loc if self.nu > 1 else np.nan

    @property
    def var(self):
        if self.nu > 2:
            return self.scale**2 * self.nu / (self.nu - 2)
        return np.inf if self.nu > 1 else np.nan

    def to_dict(self):
        return OrderedDict([("family", self.family), ("nu", self.nu),
                            ("loc", self.loc), ("scale", self.scale)])


class Beta(Margin):
    family = "beta"
    params = ("alpha", "beta")

    def __init__(self, alpha, beta):
        alpha, beta = float(alpha), float(beta)
        if not (alpha > 0 and beta > 0):
            raise ParameterError("Beta requires alpha > 0 and beta > 0")
        self.alpha, self.beta = alpha, beta

    def _cdf(self, x):
        return special.betainc(self.alpha, self.beta, np.clip(x, 0.0, 1.0))

    def _ppf(self, p):
        return special.betaincinv(self.alpha, self.beta, p)

    @property
    def support(self):
        return (0.0, 1.0)

    @property
    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    @property
    def var(self):
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s**2 * (s + 1))

    def to_dict(self):
        return OrderedDict([("family", self.family),
                            ("alpha", self.alpha), ("beta", self.beta)])


class DiscreteFinite(Margin):
    """
    Distribution on a finite set of support values.

    Parameters
    ----------
    values : list[float]
        Support values (sorted internally; must be distinct).
    probs : list[float]
        Probabilities of the values, summing to 1 within 1e-12.
    """
    family = "discrete"
    params = ("values", "probs")
    continuous = False

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=np.float64).ravel()
        probs = np.asarray(probs, dtype=np.float64).ravel()
        if values.size == 0 or values.size != probs.size:
            raise ParameterError("values and probs must have the same "
                                 "nonzero length")
        if not np.all(np.isfinite(values)):
            raise ParameterError("support values must be finite")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROB_SUM_TOL:
            raise ParameterError("probabilities must be nonnegative and "
                                 "sum to 1 (got %.15g)" % probs.sum())
        order = np.argsort(values, kind="mergesort")
        values, probs = values[order], probs[order]
        if np.any(np.diff(values) == 0):
            raise ParameterError("support values must be distinct")
        self.values = values
        self.probs = probs
        self._cum = np.cumsum(probs)
        self._cum[-1] = 1.0

    def _count_le(self, x, side):
        return np.searchsorted(self.values, x, side=side)

    def _cdf(self, x):
        k = self._count_le(x, "right")
        return np.where(k > 0, self._cum[np.maximum(k-1, 0)], 0.0)

    def cdf_left(self, x):
        x = np.asarray(x, dtype=np.float64)
        k = self._count_le(x, "left")
        res = np.where(k > 0, self._cum[np.maximum(k-1, 0)], 0.0)
        return _scalar_or_array(res)

    def pmf(self, x):
        x = np.asarray(x, dtype=np.float64)
        k = np.minimum(self._count_le(x, "left"), self.values.size - 1)
        res = np.where(self.values[k] == x, self.probs[k], 0.0)
        return _scalar_or_array(res)

    def _ppf(self, p):
        k = np.searchsorted(self._cum, p, side="left")
        return self.values[np.minimum(k, self.values.size - 1)]

    @property
    def support(self):
        return (float(self.values[0]), float(self.values[-1]))

    @property
    def mean(self):
        return float(np.dot(self.values, self.probs))

    @property
    def var(self):
        return float(np.dot((self.values - self.mean)**2, self.probs))

    def to_dict(self):
        return OrderedDict([("family", self.family),
                            ("values", self.values.tolist()),
                            ("probs", self.probs.tolist())])


class Bernoulli(DiscreteFinite):
    """
    Bernoulli(p) on {0, 1} with ``P(X = 1) = p``.
    """
    family = "bernoulli"
    params = ("p",)

    def __init__(self, p):
        p = float(p)
        if not (0.0 <= p <= 1.0):
            raise ParameterError("Bernoulli requires 0 <= p <= 1")
        self.p = p
        super().__init__([0.0, 1.0], [1.0 - p, p])

    def to_dict(self):
        return OrderedDict([("family", self.family), ("p", self.p)])


class Empirical(DiscreteFinite):
    """
    Empirical distribution of a sample.

    The CDF is the right-continuous empirical CDF and the inverse the
    plain ``inf`` definition (no interpolation, no midpoint ties).
    """
    family = "empirical"
    params = ("sample",)

    def __init__(self, sample):
        sample = np.sort(np.asarray(sample, dtype=np.float64).ravel())
        if sample.size == 0:
            raise ParameterError("empirical margin requires a sample")
        if not np.all(np.isfinite(sample)):
            raise ParameterError("empirical sample must be finite")
        self.sample = sample
        values, counts = np.unique(sample, return_counts=True)
        super().__init__(values, counts / sample.size)

    def to_dict(self):
        return OrderedDict([("family", self.family),
                            ("sample", self.sample.tolist())])

    def __repr__(self):
        return "Empirical(n=%d)" % self.sample.size


# All supported margin families, keyed by their configuration names
MARGINS_ALL = OrderedDict([
    ("uniform",   Uniform),
    ("normal",    Normal),
    ("student",   StudentT),
    ("beta",      Beta),
    ("bernoulli", Bernoulli),
    ("discrete",  DiscreteFinite),
    ("empirical", Empirical),
])


def make_margin(spec):
    """
    Create the margin described by a dict (or config section) with the
    ``family`` key and the family parameters as the other keys, e.g.,
    ``{"family": "normal", "mu": 0, "sigma": 2}``.

    An existing ``Margin`` instance is returned unchanged.
    """
    if isinstance(spec, Margin):
        return spec
    params = dict(spec)
    family = str(params.pop("family", "")).lower()
    try:
        cls = MARGINS_ALL[family]
    except KeyError:
        raise ParameterError("unknown margin family: '%s'" % family)
    try:
        return cls(**params)
    except TypeError as e:
        raise ParameterError("invalid parameters for '%s' margin: %s" %
                             (family, e))


def margin_from_config(section):
    """
    Create the margin of a validated configuration section, which holds
    the parameters of every family with their defaults; only the
    parameters of the selected ``family`` are used.
    """
    family = section.get("family", "uniform")
    try:
        cls = MARGINS_ALL[family]
    except KeyError:
        raise ParameterError("unknown margin family: '%s'" % family)
    params = {key: section[key] for key in cls.params if key in section}
    return cls(**params)


def cdf(margin, x):
    """``P(X <= x)`` of the given margin."""
    return margin.cdf(x)


def inverse_cdf(margin, p):
    """Generalized inverse ``inf{x : F(x) >= p}`` of the given margin."""
    return margin.inverse_cdf(p)


def distributional_transform(margin, x, lam):
    """Distributional transform ``P(X < x) + lam * P(X = x)``."""
    return margin.distributional_transform(x, lam)
