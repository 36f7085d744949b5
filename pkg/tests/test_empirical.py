# Copyright (c) 2023-2024 DepGSA developers
# MIT License

import numpy as np
import pytest

from scipy import optimize

from depgsa.empirical import (ConstrainedSampler, FeatureMap, QuantileDM,
                              QuantileFitter,
                              constrained_pair_dms, fit_quantile_dm,
                              pinball_loss, rejection_sample)
from depgsa.errors import (DomainError, FittingError, InfeasibleError,
                           ParameterError)
from depgsa.margins import Normal


def _unit_square(n, rng):
    return rng.random((n, 2))


def _triangle_sampler():
    return ConstrainedSampler(_unit_square,
                              constraint=lambda x: x[:, 0] + x[:, 1],
                              high=1.0)


def test_pinball_loss():
    assert pinball_loss(2.0, 0.3) == pytest.approx(0.6)
    assert pinball_loss(-2.0, 0.3) == pytest.approx(1.4)
    assert pinball_loss(0.0, 0.9) == 0.0
    with pytest.raises(DomainError):
        pinball_loss(1.0, 1.5)


def test_rejection_sample():
    sampler = _triangle_sampler()
    x = rejection_sample(sampler, 5000, seed=42)
    assert x.shape == (5000, 2)
    assert np.all(x.sum(axis=1) <= 1.0)
    assert sampler.rate == pytest.approx(0.5, abs=0.02)
    # deterministic given the seed
    y = rejection_sample(_triangle_sampler(), 5000, seed=42)
    assert np.array_equal(x, y)
    with pytest.raises(DomainError):
        rejection_sample(sampler, 0, seed=1)


def test_rejection_sample_predicate():
    sampler = ConstrainedSampler(_unit_square,
                                 predicate=lambda c: c[:, 0] > c[:, 1])
    x = rejection_sample(sampler, 1000, seed=3)
    assert np.all(x[:, 0] > x[:, 1])


def test_rejection_sample_infeasible():
    sampler = ConstrainedSampler(_unit_square,
                                 constraint=lambda x: x[:, 0] + x[:, 1],
                                 low=3.0)
    with pytest.raises(InfeasibleError) as excinfo:
        rejection_sample(sampler, 10, seed=0)
    assert excinfo.value.rate == 0.0
    assert excinfo.value.attempts >= 10**6


def test_feature_map():
    x = np.linspace(-2, 2, 101)
    fmap = FeatureMap(["x", "x^2"], x=x)
    assert fmap.features == ("1", "x", "x^2")
    X = fmap.design(x)
    assert np.allclose(X[:, 0], 1.0)
    assert np.allclose(X[:, 1:].mean(axis=0), 0.0)
    assert np.allclose(X[:, 1:].std(axis=0), 1.0)
    same = FeatureMap(fmap.features, params=fmap.params())
    assert np.allclose(same.design(x), X)
    with pytest.raises(ParameterError):
        FeatureMap(["x^3"], x=x)


@pytest.fixture
def gaussian_pair(rng):
    x = rng.standard_normal(4000)
    y = 0.8 * x + 0.6 * rng.standard_normal(4000)
    return np.column_stack([x, y])


def test_fit_quantile_dm(gaussian_pair):
    levels = [0.1, 0.25, 0.5, 0.75, 0.9]
    dm = fit_quantile_dm(gaussian_pair, levels=levels, features=("1", "x"),
                         lead=2, target=5, lead_margin=Normal())
    assert dm.components == (2, 5)
    assert dm.target == 5
    # the conditional median of y given x is 0.8 x
    xs = np.array([-1.0, 0.0, 1.0])
    assert np.allclose(dm.quantile(xs, 0.5), 0.8 * xs, atol=0.06)
    cover = dm.coverage(gaussian_pair[:, 0], gaussian_pair[:, 1])
    assert np.allclose(cover, levels, atol=0.03)


def test_quantile_dm_interpolation(gaussian_pair):
    dm = fit_quantile_dm(gaussian_pair, levels=[0.25, 0.5, 0.75])
    x = np.zeros(5)
    u = np.array([0.01, 0.25, 0.375, 0.5, 0.99])
    q = dm.quantile(x, u)
    curves = dm.curves(0.0)[0]
    # clamped beyond the grid, linear between the levels
    assert q[0] == pytest.approx(curves[0])
    assert q[4] == pytest.approx(curves[2])
    assert q[2] == pytest.approx(0.5 * (curves[0] + curves[1]))
    assert np.all(np.diff(q) >= 0)


def test_quantile_dm_save_load(gaussian_pair, tmp_path):
    dm = fit_quantile_dm(gaussian_pair, levels=[0.2, 0.5, 0.8],
                         lead_margin=Normal())
    outfile = str(tmp_path / "pair.json")
    dm.save(outfile)
    other = QuantileDM.load(outfile)
    x = np.array([-0.5, 0.3])
    assert np.allclose(other.curves(x), dm.curves(x))
    with pytest.raises(OSError):
        dm.save(outfile)


def test_fit_quantile_dm_too_few_samples(rng):
    with pytest.raises(DomainError):
        fit_quantile_dm(rng.random((20, 2)))
    with pytest.raises(DomainError):
        fit_quantile_dm(rng.random((100, 2)), levels=[0.0, 0.5])


def test_fit_quantile_dm_coverage_error(rng):
    # ties of a binary target: no curve can hold 30% of the sample below
    x = rng.standard_normal(1000)
    y = rng.integers(0, 2, size=1000).astype(float)
    with pytest.raises(FittingError, match="coverage") as excinfo:
        fit_quantile_dm(np.column_stack([x, y]), levels=[0.3, 0.5, 0.7])
    diag = excinfo.value.diagnostics
    assert diag["levels"] == [0.3, 0.5, 0.7]
    assert diag["worst_level"] in (0.3, 0.7)
    assert diag["coverage"][0] == pytest.approx(np.mean(y == 0))
    assert diag["band"][1] == pytest.approx(3 * np.sqrt(0.25 / 1000))


def test_fit_quantile_dm_constant_target(rng):
    x = rng.standard_normal(200)
    sample = np.column_stack([x, np.full(200, 2.0)])
    dm = fit_quantile_dm(sample, levels=[0.1, 0.5, 0.9])
    assert np.allclose(dm.curves(np.array([-1.0, 0.0, 1.5])), 2.0)


def _linprog_quantile(X, y, tau):
    """Exact pinball minimizer: min tau u+ + (1-tau) u-, X b + u+ - u- = y."""
    n, p = X.shape
    c = np.concatenate([np.zeros(p), np.full(n, tau), np.full(n, 1 - tau)])
    eye = np.eye(n)
    A_eq = np.hstack([X, eye, -eye])
    bounds = [(None, None)] * p + [(0, None)] * (2 * n)
    res = optimize.linprog(c, A_eq=A_eq, b_eq=y, bounds=bounds,
                           method="highs")
    assert res.success
    return res.x[:p]


@pytest.mark.parametrize("tau", [0.1, 0.5])
def test_quantile_fitter_annealing(rng, tau):
    x = rng.standard_normal(600)
    y = 0.8 * x + 0.6 * rng.standard_normal(600)
    fitter = QuantileFitter(x, y, features=("1", "x"))
    plain = QuantileFitter(x, y, features=("1", "x"),
                           options={"anneal": 0})
    beta, _ = fitter.fit(tau)
    beta0, _ = plain.fit(tau)
    exact = fitter.loss(_linprog_quantile(fitter.X, fitter.y, tau), tau)
    assert fitter.loss(beta, tau) <= fitter.loss(beta0, tau) + 1e-7
    assert fitter.loss(beta, tau) - exact < 2e-4
    assert np.mean(y <= fitter.X @ beta) == pytest.approx(tau, abs=0.01)


def test_constrained_pair_dms(rng):
    dms, sample = constrained_pair_dms(_triangle_sampler(), (1, 2),
                                       nsample=3000, seed=11,
                                       levels=np.arange(1, 20) / 20.0,
                                       features=("1", "x"))
    assert list(dms) == [(1, 2), (2, 1)]
    assert sample.shape == (3000, 2)
    # X2 | X1 = x is U(0, 1 - x)
    dm = dms[(1, 2)]
    x = np.array([0.1, 0.5])
    assert np.allclose(dm.quantile(x, 0.5), 0.5 * (1 - x), atol=0.05)
    gen = dm.sample(20000, rng=rng)
    assert np.mean(gen.sum(axis=1) > 1.02) < 0.02
