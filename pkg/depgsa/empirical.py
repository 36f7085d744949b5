# Copyright (c) 2023-2024 DepGSA developers
# MIT License
#
# References:
# [1] Koenker & Bassett 1978, Econometrica, 46, 33
#     Regression quantiles
# [2] He, Pan, Tan & Zhou 2023, Journal of Econometrics, 232, 2
#     Smoothed quantile regression with large-scale inference
#     https://github.com/WenxinZhou/conquer

"""
Dependency models of distributions only known through samples.

* Rejection sampling of ``X ~ F`` conditioned on ``c(X) in D``;
* Quantile-regression DMs: the conditional quantile curves
  ``x_w = f(x_j; theta(z))`` fitted on a grid of levels ``z`` by
  minimizing the ridge-regularized pinball loss

      sum_i L(x_w_i - f(x_j_i; theta), z) + (lambda / 2) |theta|^2,
      L(x, u) = x (u - 1{x < 0}),

  and then used as a DM by feeding ``z ~ U(0, 1)``.

The pinball loss is minimized through its convolution-smoothed version
(Gaussian kernel) by gradient descent with Barzilai-Borwein step sizes.
"""

import logging
from collections import OrderedDict

import numpy as np
from scipy import special

from .depmodel.base import DependencyModel, LatentLaw
from .margins import Empirical, make_margin
from .errors import (DomainError, FittingError, InfeasibleError,
                     ParameterError)
from .utils.io import json_dump, json_load


logger = logging.getLogger(__name__)

# Minimum number of trials before an infeasibility decision
MIN_TRIALS = 10**6
# Acceptance rate below which the constraint is deemed infeasible
MIN_ACCEPTANCE = 1e-4
# Largest number of candidates drawn at once
MAX_BATCH = 2**20

# Default grid of the quantile levels: 0.01, 0.02, ..., 0.99
DEFAULT_LEVELS = np.arange(1, 100) / 100.0
DEFAULT_FEATURES = ("1", "x", "x^2")
FEATURES_ALL = ("1", "x", "x^2", "|x|")
# Minimum sample size of the quantile fits
MIN_FIT_SAMPLES = 50


class ConstrainedSampler:
    """
    Sampler of ``X ~ F`` conditioned on ``c(X) in D``.

    Parameters
    ----------
    base : callable
        ``base(n, rng)`` returns ``n`` samples of ``F`` as an ``(n, d)``
        array.
    constraint : callable, optional
        The constraint map ``c``: ``(n, d)`` array to ``(n,)`` or
        ``(n, N)`` values.  ``None`` is the identity.
    low, high : float or array_like, optional
        Bounds of the box ``D = [low, high]``.
    predicate : callable, optional
        Acceptance test on the values of ``c``, returning a boolean
        ``(n,)`` array; replaces the box.

    Attributes
    ----------
    attempts : int
        Number of candidates drawn so far.
    accepted : int
        Number of candidates accepted so far.
    """

    def __init__(self, base, constraint=None, low=-np.inf, high=np.inf,
                 predicate=None):
        self.base = base
        self.constraint = constraint
        self.low = low
        self.high = high
        self.predicate = predicate
        self.attempts = 0
        self.accepted = 0

    @property
    def rate(self):
        """Measured acceptance rate."""
        return self.accepted / self.attempts if self.attempts else np.nan

    def accept(self, x):
        """Boolean mask of the rows of ``x`` satisfying the constraint."""
        c = x if self.constraint is None else self.constraint(x)
        c = np.asarray(c, dtype=np.float64)
        if self.predicate is not None:
            return np.asarray(self.predicate(c), dtype=bool)
        ok = (c >= self.low) & (c <= self.high)
        if ok.ndim > 1:
            ok = np.all(ok, axis=1)
        return ok

    def reset(self):
        self.attempts = 0
        self.accepted = 0


def rejection_sample(sampler, m, seed=None):
    """
    Draw ``m`` samples satisfying the constraint by rejection.

    The candidates come from a Philox generator keyed by ``seed``; the
    batch sizes only depend on the acceptance counts, so the output is
    deterministic given the seed.

    Raises
    ------
    InfeasibleError :
        The acceptance rate is below 1e-4 after 10^6 trials.
    """
    if m < 1:
        raise DomainError("number of samples must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    sampler.reset()
    chunks = []
    naccepted = 0
    batch = m
    while naccepted < m:
        x = np.asarray(sampler.base(batch, rng), dtype=np.float64)
        if x.ndim == 1:
            x = x[:, np.newaxis]
        ok = sampler.accept(x)
        chunks.append(x[ok])
        naccepted += int(ok.sum())
        sampler.attempts += batch
        sampler.accepted += int(ok.sum())
        rate = sampler.rate
        if sampler.attempts >= MIN_TRIALS and rate < MIN_ACCEPTANCE:
            raise InfeasibleError(
                "acceptance rate %.3g after %d trials" %
                (rate, sampler.attempts),
                rate=rate, attempts=sampler.attempts)
        need = m - naccepted
        est = max(rate, MIN_ACCEPTANCE)
        batch = int(min(max(1.2 * need / est, 1024), MAX_BATCH))
    logger.info("Rejection sampling: %d/%d accepted (rate %.4f)" %
                (sampler.accepted, sampler.attempts, sampler.rate))
    return np.concatenate(chunks, axis=0)[:m]


def pinball_loss(x, u):
    """
    The pinball (check) loss ``L(x, u) = x (u - 1{x < 0})``.
    """
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < 0) | (u > 1)):
        raise DomainError("quantile level outside [0, 1]")
    x = np.asarray(x, dtype=np.float64)
    res = x * (u - (x < 0))
    return res[()] if res.ndim == 0 else res


class FeatureMap:
    """
    Features of the conditioning value, computed on the standardized
    value ``t = (x - mean) / std``; the non-constant features are
    standardized again on the fitting sample.
    """

    def __init__(self, features, x=None, params=None):
        features = tuple(features)
        for f in features:
            if f not in FEATURES_ALL:
                raise ParameterError("unknown feature: '%s'" % f)
        if "1" not in features:
            features = ("1",) + features
        self.features = ("1",) + tuple(f for f in features if f != "1")
        if params is not None:
            self.x_mean = params["x_mean"]
            self.x_std = params["x_std"]
            self.f_mean = np.asarray(params["f_mean"], dtype=np.float64)
            self.f_std = np.asarray(params["f_std"], dtype=np.float64)
        else:
            x = np.asarray(x, dtype=np.float64)
            self.x_mean = float(np.mean(x))
            self.x_std = float(np.std(x)) or 1.0
            raw = self._raw(x)
            self.f_mean = raw[:, 1:].mean(axis=0)
            std = raw[:, 1:].std(axis=0)
            self.f_std = np.where(std > 0, std, 1.0)

    def _raw(self, x):
        t = (x - self.x_mean) / self.x_std
        cols = []
        for f in self.features:
            if f == "1":
                cols.append(np.ones_like(t))
            elif f == "x":
                cols.append(t)
            elif f == "x^2":
                cols.append(t**2)
            else:
                cols.append(np.abs(t))
        return np.column_stack(cols)

    def design(self, x):
        raw = self._raw(np.asarray(x, dtype=np.float64))
        raw[:, 1:] = (raw[:, 1:] - self.f_mean) / self.f_std
        return raw

    def params(self):
        return OrderedDict([("x_mean", self.x_mean),
                            ("x_std", self.x_std),
                            ("f_mean", self.f_mean.tolist()),
                            ("f_std", self.f_std.tolist())])


class QuantileFitter:
    """
    Fit the quantile curves of ``y`` given ``x`` on a grid of levels.

    Parameters
    ----------
    x, y : 1D array_like
        Conditioning and conditioned samples.
    features : list[str], optional
        Features among ``"1"``, ``"x"``, ``"x^2"``, ``"|x|"``.
    ridge : float, optional
        Ridge weight ``lambda`` on the non-intercept coefficients.
    options : dict, optional
        ``max_iter``: maximum iterations per level (default 1000);
        ``max_lr``: maximum step size (default 50);
        ``tol``: relative objective decrease stopping the descent
        (default 1e-6);
        ``grad_tol``: gradient sup-norm stopping the descent
        (default 1e-10);
        ``anneal``: number of halvings of the smoothing bandwidth
        (default 4).
    """
    opt = {"max_iter": 1000, "max_lr": 50, "tol": 1e-6, "grad_tol": 1e-10,
           "anneal": 4}

    def __init__(self, x, y, features=DEFAULT_FEATURES, ridge=1e-6,
                 options=None):
        self.x = np.asarray(x, dtype=np.float64).ravel()
        self.y = np.asarray(y, dtype=np.float64).ravel()
        self.n = self.x.size
        if self.n != self.y.size:
            raise ParameterError("x and y must have the same length")
        if self.n < MIN_FIT_SAMPLES:
            raise DomainError("quantile fit requires >= %d samples" %
                              MIN_FIT_SAMPLES)
        if ridge < 0:
            raise ParameterError("ridge weight must be >= 0")
        self.ridge = float(ridge)
        self.fmap = FeatureMap(features, x=self.x)
        self.X = self.fmap.design(self.x)
        self.opt = dict(self.opt)
        self.opt.update(options or {})

    @staticmethod
    def iqr(x):
        return (np.quantile(x, 0.75) - np.quantile(x, 0.25)) / 1.38898

    def bandwidth(self, tau):
        p = self.X.shape[1] - 1
        h0 = min((p + np.log(self.n)) / self.n, 0.5) ** 0.4
        return max(0.01, h0 * (tau - tau**2) ** 0.5)

    def _penalty_grad(self, beta):
        g = self.ridge * beta
        g[0] = 0.0
        return g

    def objective(self, beta, tau, h):
        """Smoothed pinball loss plus the ridge term."""
        r = self.y - self.X @ beta
        loss = ((tau - special.ndtr(-r/h)) * r +
                0.5 * h * np.sqrt(2/np.pi) * np.exp(-(r/h)**2 / 2))
        return np.mean(loss) + 0.5 * self.ridge * np.dot(beta[1:], beta[1:])

    def gradient(self, beta, tau, h):
        r = self.y - self.X @ beta
        w = (special.ndtr(-r/h) - tau) / self.n
        return self.X.T @ w + self._penalty_grad(beta)

    def loss(self, beta, tau):
        """Plain (unsmoothed) pinball loss plus the ridge term."""
        loss = pinball_loss(self.y - self.X @ beta, tau)
        return np.mean(loss) + 0.5 * self.ridge * np.dot(beta[1:], beta[1:])

    def _descend(self, beta, tau, bw):
        """
        Barzilai-Borwein descent of the loss smoothed with bandwidth
        ``bw``, started at ``beta``.

        Returns
        -------
        beta, niter, converged, objective, gradient sup-norm
        """
        grad0 = self.gradient(beta, tau, bw)
        if np.max(np.abs(grad0)) <= self.opt["grad_tol"]:
            return (beta, 0, True, self.objective(beta, tau, bw), 0.0)
        diff_beta = -grad0
        beta = beta + diff_beta
        obj0 = self.objective(beta, tau, bw)
        t = 0
        nsmall = 0
        while t < self.opt["max_iter"]:
            grad1 = self.gradient(beta, tau, bw)
            gmax = float(np.max(np.abs(grad1)))
            if gmax <= self.opt["grad_tol"]:
                return (beta, t, True, obj0, gmax)
            diff_grad = grad1 - grad0
            r0 = diff_beta.dot(diff_beta)
            r1 = diff_grad.dot(diff_grad)
            r01 = diff_grad.dot(diff_beta)
            if r1 == 0 or r01 <= 0:
                lr = 1.0
            else:
                lr = min(r01/r1, r0/r01, self.opt["max_lr"])
            grad0, diff_beta = grad1, -lr * grad1
            beta = beta + diff_beta
            t += 1
            obj1 = self.objective(beta, tau, bw)
            rel = abs(obj0 - obj1) / max(abs(obj0), np.finfo(float).tiny)
            nsmall = nsmall + 1 if rel < self.opt["tol"] else 0
            obj0 = obj1
            if nsmall >= 2:
                return (beta, t, True, obj0, float(np.max(np.abs(grad0))))
        return (beta, t, False, obj0, float(np.max(np.abs(grad0))))

    def fit(self, tau):
        """
        Fit the quantile curve of level ``tau``.

        The smoothed loss is minimized first with the bandwidth of
        ``bandwidth()``, then again with the bandwidth halved ``anneal``
        times, each descent started from the previous solution.  An
        annealing stage that does not converge is dropped and the
        previous solution kept.

        Returns
        -------
        beta : 1D `~numpy.ndarray`
            Coefficients on the standardized features.
        niter : int
            Total iterations over all the stages.

        Raises
        ------
        FittingError :
            No convergence of the first stage within ``max_iter``
            iterations.
        """
        if not 0 < tau < 1:
            raise DomainError("quantile level must be in (0, 1)")
        p = self.X.shape[1]
        beta = np.zeros(p)
        beta[0] = np.quantile(self.y, tau)
        if np.ptp(self.y) == 0:
            return (beta, 0)
        res = self.y - beta[0]
        h = self.bandwidth(tau)
        bw = h * min(np.std(res), self.iqr(res))
        if bw == 0 or np.log(bw) < -10:
            bw = h

        beta, niter, ok, obj, gmax = self._descend(beta, tau, bw)
        if not ok:
            raise FittingError(
                "quantile fit at level %g did not converge in %d "
                "iterations" % (tau, niter),
                diagnostics={"level": tau, "iterations": niter,
                             "objective": obj, "gradient": gmax})
        for _ in range(int(self.opt["anneal"])):
            bw *= 0.5
            beta1, t, ok, obj, gmax = self._descend(beta, tau, bw)
            niter += t
            if not ok:
                logger.debug("Level %g: annealing stopped at bandwidth "
                             "%g" % (tau, bw))
                break
            beta = beta1
        return (beta, niter)


class QuantileDM(DependencyModel):
    """
    DM of a pair ``(X_j, X_w)`` given by the conditional quantile curves
    of ``X_w`` given ``X_j``:

        X_w = Q(Z | X_j),    Z ~ U(0, 1),

    where ``Q`` interpolates linearly the fitted curves between the grid
    levels, is clamped to the extreme curves beyond the grid, and is made
    nondecreasing in the level by a cumulative maximum over the levels.

    Parameters
    ----------
    lead, target : int
        Input indices ``j`` and ``w``.
    levels : 1D array_like
        Increasing grid of levels in (0, 1).
    coefficients : 2D array_like, shape ``(nlevels, nfeatures)``
    fmap : `FeatureMap`
    lead_margin : `~depgsa.margins.Margin`
        Margin of the lead input.
    """
    kind = "empirical"

    def __init__(self, lead, target, levels, coefficients, fmap,
                 lead_margin, ridge=0.0):
        super().__init__(lead, (target,),
                         margins={int(lead): make_margin(lead_margin)},
                         latent_laws=[LatentLaw.uniform()])
        self.levels = np.asarray(levels, dtype=np.float64)
        self.coefficients = np.asarray(coefficients, dtype=np.float64)
        if self.coefficients.shape != (self.levels.size,
                                       len(fmap.features)):
            raise ParameterError("coefficients must have shape "
                                 "(nlevels, nfeatures)")
        if np.any(np.diff(self.levels) <= 0):
            raise ParameterError("levels must be increasing")
        self.fmap = fmap
        self.ridge = ridge

    @property
    def target(self):
        return self.order[0]

    def curves(self, x):
        """
        Fitted quantiles at every grid level after the monotone
        rearrangement; shape ``(n, nlevels)``.
        """
        q = self.fmap.design(np.atleast_1d(x)) @ self.coefficients.T
        return np.maximum.accumulate(q, axis=1)

    def quantile(self, x, u):
        """
        Conditional quantile of level ``u`` of ``X_w`` given ``X_j = x``.
        """
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        u = np.broadcast_to(np.asarray(u, dtype=np.float64), x.shape)
        q = self.curves(x)
        levels = self.levels
        if levels.size == 1:
            return q[:, 0]
        uc = np.clip(u, levels[0], levels[-1])
        k = np.searchsorted(levels, uc, side="right") - 1
        k = np.clip(k, 0, levels.size - 2)
        rows = np.arange(x.size)
        frac = (uc - levels[k]) / (levels[k+1] - levels[k])
        return q[rows, k] + frac * (q[rows, k+1] - q[rows, k])

    def _evaluate(self, x_lead, z, aux):
        if z.shape[1] == 0:
            return np.zeros((x_lead.size, 0))
        return self.quantile(x_lead, z[:, 0])[:, np.newaxis]

    def coverage(self, x, y):
        """
        Fraction of the points ``(x, y)`` below each fitted curve.
        """
        q = self.curves(x)
        return np.mean(np.asarray(y)[:, np.newaxis] <= q, axis=0)

    def to_dict(self):
        """
        Coefficient table, with keys in the order: ``lead``, ``target``,
        ``features``, ``levels``, ``coefficients``, ``scaling``,
        ``ridge``, ``lead_margin``.
        """
        return OrderedDict([
            ("lead", self.lead),
            ("target", self.target),
            ("features", list(self.fmap.features)),
            ("levels", self.levels.tolist()),
            ("coefficients", self.coefficients.tolist()),
            ("scaling", self.fmap.params()),
            ("ridge", self.ridge),
            ("lead_margin", self.margins[self.lead].to_dict()),
        ])

    @classmethod
    def from_dict(cls, data):
        fmap = FeatureMap(data["features"], params=data["scaling"])
        return cls(data["lead"], data["target"], data["levels"],
                   data["coefficients"], fmap,
                   make_margin(data["lead_margin"]),
                   ridge=data.get("ridge", 0.0))

    def save(self, outfile, clobber=False):
        json_dump(self.to_dict(), outfile, clobber=clobber)

    @classmethod
    def load(cls, infile):
        return cls.from_dict(json_load(infile))


def fit_quantile_dm(sample, levels=None, features=DEFAULT_FEATURES,
                    ridge=1e-6, lead=1, target=2, lead_margin=None,
                    options=None):
    """
    Fit a quantile-regression DM of ``X_target`` given ``X_lead``.

    Parameters
    ----------
    sample : 2D array_like, shape ``(m, 2)``
        Columns ``(x_lead, x_target)``.
    levels : 1D array_like, optional
        Grid of levels in (0, 1); default 0.01, ..., 0.99.
    features : list[str], optional
    ridge : float, optional
    lead, target : int, optional
        Input indices of the two columns.
    lead_margin : `~depgsa.margins.Margin`, optional
        Margin of the lead; default the empirical margin of the sample.

    Raises
    ------
    DomainError :
        Less than 50 samples, or levels outside (0, 1).
    FittingError :
        A level failed to converge, or the fraction of the sample
        below a curve is off its level by more than
        ``3 sqrt(tau (1 - tau) / m)``.
    """
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 2 or sample.shape[1] != 2:
        raise ParameterError("sample must have shape (m, 2)")
    if sample.shape[0] < MIN_FIT_SAMPLES:
        raise DomainError("quantile fit requires >= %d samples" %
                          MIN_FIT_SAMPLES)
    levels = DEFAULT_LEVELS if levels is None else \
        np.sort(np.asarray(levels, dtype=np.float64))
    if np.any((levels <= 0) | (levels >= 1)):
        raise DomainError("quantile levels must be in (0, 1)")
    x, y = sample[:, 0], sample[:, 1]
    fitter = QuantileFitter(x, y, features=features, ridge=ridge,
                            options=options)
    coefs = np.empty((levels.size, len(fitter.fmap.features)))
    niters = []
    for i, tau in enumerate(levels):
        coefs[i], niter = fitter.fit(tau)
        niters.append(niter)
    logger.info("Fitted %d quantile curves of x%d | x%d "
                "(iterations: max %d, mean %.1f)" %
                (levels.size, target, lead, max(niters), np.mean(niters)))
    if lead_margin is None:
        lead_margin = Empirical(x)
    dm = QuantileDM(lead, target, levels, coefs, fitter.fmap, lead_margin,
                    ridge=ridge)

    cover = dm.coverage(x, y)
    band = 3 * np.sqrt(levels * (1 - levels) / x.size)
    miss = np.abs(cover - levels) - band
    if np.ptp(y) > 0 and np.any(miss > 0):
        worst = int(np.argmax(miss))
        raise FittingError(
            "coverage of %d quantile curves of x%d | x%d outside the "
            "band (worst level %g: coverage %.4f, band +/- %.4f)" %
            (np.sum(miss > 0), target, lead, levels[worst], cover[worst],
             band[worst]),
            diagnostics={"levels": levels.tolist(),
                         "coverage": cover.tolist(),
                         "band": band.tolist(),
                         "worst_level": float(levels[worst])})
    return dm


def constrained_pair_dms(sampler, indices, nsample=10000, seed=None,
                         levels=None, features=DEFAULT_FEATURES,
                         ridge=1e-6):
    """
    Build the DMs of a constrained pair in both directions: draw the
    constrained sample by rejection, then fit the quantile curves of
    each input given the other, with the empirical margin of the lead.

    Returns
    -------
    dms : dict{(int, int): `QuantileDM`}
        Keyed by the permutation ``(lead, target)``.
    sample : 2D `~numpy.ndarray`
    """
    i, j = indices
    sample = rejection_sample(sampler, nsample, seed=seed)
    dms = OrderedDict()
    for a, b in [(0, 1), (1, 0)]:
        lead, target = indices[a], indices[b]
        dms[(lead, target)] = fit_quantile_dm(
            sample[:, [a, b]], levels=levels, features=features,
            ridge=ridge, lead=lead, target=target)
    logger.info("Built the quantile DMs of the constrained pair "
                "(x%d, x%d)" % (i, j))
    return (dms, sample)
