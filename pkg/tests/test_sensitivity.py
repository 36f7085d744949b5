# Copyright (c) 2023-2024 DepGSA developers
# MIT License

import numpy as np
import pytest
from scipy import stats

from depgsa.errors import DegenerateVarianceError, DomainError
from depgsa.models.analytic import analytic_indices, linear_indices
from depgsa.models.builtin import LinearGaussian, Portfolio
from depgsa.representations import (PermutationPlan, build_representations,
                                    route_subsets)
from depgsa.sampling import SamplePlan, generate_panel
from depgsa.sensitivity import (IndexReport, PickFreezeBatch,
                                RepresentationSamples, compute_indices,
                                estimate_covariances, estimate_indices,
                                estimate_sigma, kernel_first_order,
                                kernel_total, loewner_rank_check,
                                pick_freeze_evaluate, total_only_estimator)
from depgsa.sensitivity.estimators import (FLAG_HEURISTIC, FLAG_NO_CI2,
                                           loewner_comparisons)
from depgsa.utils.io import csv_to_dataframe, json_load


def _random_batch(rng, m=500, N=3):
    """Pick-freeze batch of a linear multi-output function."""
    W = rng.standard_normal((4, N))
    U1 = rng.standard_normal((m, 4))
    U2 = rng.standard_normal((m, 4))
    mask = np.array([True, True, False, False])
    mixed1 = np.where(mask, U1, U2)
    mixed2 = np.where(mask, U2, U1)
    return PickFreezeBatch(U1 @ W, U2 @ W, mixed1 @ W, mixed2 @ W,
                           subset=(1, 2))


def test_kernels(rng):
    batch = _random_batch(rng)
    K = kernel_first_order(batch.A, batch.B, batch.C, batch.D)
    assert K.shape == (batch.m, 3, 3)
    assert np.array_equal(K, np.swapaxes(K, 1, 2))
    K_tot = kernel_total(batch.A, batch.B, batch.C, batch.D)
    eig = np.linalg.eigvalsh(K_tot)
    assert np.all(eig >= -1e-10 * np.abs(eig).max())


def test_estimate_sigma():
    A = np.array([[1.0], [3.0], [0.0]])
    B = np.array([[0.0], [1.0], [2.0]])
    # ((1)^2 + (2)^2 + (-2)^2) / (2 * 3)
    assert estimate_sigma(A, B)[0, 0] == pytest.approx(1.5)
    with pytest.raises(DomainError):
        estimate_sigma(A[:1], B[:1])


def test_batch_shapes():
    batch = PickFreezeBatch([1.0, 2.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.0])
    assert (batch.m, batch.N) == (2, 1)
    with pytest.raises(Exception):
        PickFreezeBatch(np.zeros((3, 2)), np.zeros((3, 2)),
                        np.zeros((3, 2)), np.zeros((2, 2)))


def test_scalar_batch_indices(rng):
    m = 20000
    w = np.array([1.0, 2.0, 1.0, 1.0])
    U1 = rng.standard_normal((m, 4))
    U2 = rng.standard_normal((m, 4))
    mask = np.array([True, True, False, False])
    batch = PickFreezeBatch(U1 @ w, U2 @ w, np.where(mask, U1, U2) @ w,
                            np.where(mask, U2, U1) @ w, subset=(1, 2))
    entry = estimate_indices(batch)
    # independent inputs, additive output: the share of the variance
    value = entry.get("dS", "first")
    assert value == pytest.approx(5.0 / 7.0, abs=0.03)
    assert entry.get("dS", "total") == pytest.approx(5.0 / 7.0, abs=0.03)
    assert value == pytest.approx(entry.get("dGSI1", "first"), rel=1e-12)
    assert entry.get("dGSI2", "first") == pytest.approx(abs(value),
                                                        rel=1e-12)
    assert entry.N == 1


def test_panel_swap_invariance(rng):
    batch = _random_batch(rng)
    a = estimate_indices(batch)
    b = estimate_indices(batch.swapped())
    for key in a.values:
        assert a.values[key] == pytest.approx(b.values[key], rel=1e-12)
        assert a.stderr[key] == pytest.approx(b.stderr[key], rel=1e-12)


def test_orthogonal_invariance(rng):
    batch = _random_batch(rng, N=3)
    Q = stats.ortho_group.rvs(3, random_state=1)
    rotated = PickFreezeBatch(batch.A @ Q.T, batch.B @ Q.T, batch.C @ Q.T,
                              batch.D @ Q.T, subset=batch.subset)
    a = estimate_indices(batch)
    b = estimate_indices(rotated)
    for key in [("dGSI1", "first"), ("dGSI1", "total"),
                ("dGSI2", "first"), ("dGSI2", "total")]:
        assert a.values[key] == pytest.approx(b.values[key], rel=1e-9)


def test_first_not_above_total_on_average(rng):
    batch = _random_batch(rng, m=20000)
    entry = estimate_indices(batch)
    assert (entry.get("dGSI1", "first") <=
            entry.get("dGSI1", "total") + 0.05)
    lo, hi = entry.ci("dGSI1", "first")
    assert lo < entry.get("dGSI1", "first") < hi


def test_degenerate_variance():
    ones = np.ones((100, 2))
    with pytest.raises(DegenerateVarianceError):
        estimate_indices(PickFreezeBatch(ones, ones, ones, ones))


def test_heuristic_flag(rng):
    batch = _random_batch(rng, m=200)
    entry = estimate_indices(batch)
    assert FLAG_HEURISTIC in entry.flags
    big = _random_batch(rng, m=1000)
    entry = estimate_indices(batch, sigma_pairs=(big.A, big.B))
    assert FLAG_HEURISTIC not in entry.flags
    assert entry.M == 1000 and entry.m == 200


def test_zero_index_skips_type2_ci(rng):
    A = rng.standard_normal((300, 2))
    B = rng.standard_normal((300, 2))
    # nothing frozen: C = B and D = A give D_u = 0 exactly
    entry = estimate_indices(PickFreezeBatch(A, B, B, A))
    assert entry.get("dGSI1", "first") == 0.0
    assert np.isnan(entry.stderr[("dGSI2", "first")])
    assert FLAG_NO_CI2 in entry.flags


def test_total_only_estimator(rng):
    batch = _random_batch(rng, m=20000)
    cov = estimate_covariances(batch, total_only=True)
    assert np.allclose(cov.total_only, total_only_estimator(batch))
    entry = compute_indices(cov)
    assert entry.get("dGSI1_tot_only", "total") == pytest.approx(
        entry.get("dGSI1", "total"), abs=0.05)


def test_loewner_rank_check():
    assert loewner_rank_check(np.diag([1.0, 1.0]),
                              np.diag([2.0, 1.0])) == "uDominated"
    assert loewner_rank_check(np.diag([2.0, 1.0]),
                              np.diag([1.0, 1.0])) == "omegaDominated"
    assert loewner_rank_check(np.eye(2), np.eye(2)) == "equal"
    assert loewner_rank_check(np.diag([1.0, 2.0]),
                              np.diag([2.0, 1.0])) == "incomparable"
    with pytest.raises(DomainError):
        loewner_rank_check(np.eye(2), np.eye(3))


def test_loewner_comparisons(rng):
    small = _random_batch(rng)
    covs = [estimate_covariances(small), estimate_covariances(small)]
    entries = [compute_indices(c) for c in covs]
    results = loewner_comparisons(covs, entries)
    assert len(results) == 1
    assert results[0]["result"] == "equal"
    assert results[0]["consistent"]
    assert loewner_comparisons(covs, entries, max_subsets=1) == []


@pytest.fixture(scope="module")
def linear_run():
    model = LinearGaussian()
    structure = model.structure()
    plan = PermutationPlan([b.indices for b in structure.blocks])
    subsets = [(1,), (2,), (3,), (1, 2), (2, 3), (1, 3)]
    table = route_subsets(plan, subsets)
    reps, width = build_representations(structure, model, table.labels)
    sp = SamplePlan(width, generator="sobol", seed=2024)
    m = 2**14
    U1 = generate_panel(sp, m, which=1)
    U2 = generate_panel(sp, m, which=2)
    samples = [RepresentationSamples(rep, U1, U2) for rep in reps]
    entries = []
    for u in subsets:
        batch = pick_freeze_evaluate(samples[table.assignment[u]], u)
        entries.append(estimate_indices(batch))
    return (model, subsets, table, samples, entries)


def test_linear_model_indices(linear_run):
    model, subsets, table, samples, entries = linear_run
    assert len(table.labels) == 3
    expected = linear_indices(model, subsets)
    for u, entry in zip(subsets, entries):
        first, total = expected[u]
        assert entry.get("dS", "first") == pytest.approx(first, abs=0.02)
        assert entry.get("dS", "total") == pytest.approx(total, abs=0.02)
    assert expected[(1,)][0] == pytest.approx(0.578)
    assert expected[(2,)][0] == pytest.approx(0.648)
    assert expected[(3,)][0] == pytest.approx(0.45)
    assert expected[(1, 2)][0] == pytest.approx(0.8187, abs=1e-4)


def test_samples_head(linear_run):
    model, subsets, table, samples, entries = linear_run
    head = samples[0].head(100)
    assert head.U1.shape[0] == 100
    assert np.array_equal(head.A, samples[0].A[:100])
    with pytest.raises(Exception):
        samples[0].head(2**15)


def test_index_report(linear_run, tmp_path):
    model, subsets, table, samples, entries = linear_run
    report = IndexReport(entries, meta={"model": "linear", "m": 2**14})
    assert len(report) == 6
    assert report[(2, 1)] is entries[3]
    with pytest.raises(KeyError):
        report[(1, 2, 3)]
    df = report.to_dataframe()
    assert set(df["index_family"]) == {"dS", "dGSI1", "dGSI2"}
    assert len(df) == 6 * 6
    outfile = str(tmp_path / "indices.csv")
    report.write_csv(outfile)
    back, comments = csv_to_dataframe(outfile)
    assert "model: linear" in comments
    assert np.array_equal(back["estimate"].values, df["estimate"].values)
    with pytest.raises(OSError):
        report.write_csv(outfile)
    jsonfile = str(tmp_path / "indices.json")
    report.write_json(jsonfile)
    data = json_load(jsonfile)
    assert data["model"] == "linear"
    assert data["indices"][0]["subset"] == [1]
    assert len(report.summary()) == 6


def _pick_freeze_entries(model, subsets, m, seed, generator="sobol"):
    structure = model.structure()
    plan = PermutationPlan([b.indices for b in structure.blocks])
    table = route_subsets(plan, subsets)
    reps, width = build_representations(structure, model, table.labels)
    sp = SamplePlan(width, generator=generator, seed=seed)
    U1 = generate_panel(sp, m, which=1)
    U2 = generate_panel(sp, m, which=2)
    samples = [RepresentationSamples(rep, U1, U2) for rep in reps]
    return [estimate_indices(pick_freeze_evaluate(
        samples[table.assignment[u]], u)) for u in subsets]


def test_portfolio_model_indices():
    # nu = 10 keeps the eighth moments finite
    model = Portfolio(nu=10.0)
    subsets = [(1,), (2,), (3,), (4,), (1, 2), (1, 3)]
    entries = _pick_freeze_entries(model, subsets, 2**15, seed=7)
    expected = analytic_indices(model, subsets)
    for u, entry in zip(subsets, entries):
        first, total = expected[u]
        assert entry.get("dS", "first") == pytest.approx(first, abs=0.03), u
        assert entry.get("dS", "total") == pytest.approx(total, abs=0.03), u


def _linear_replications(m, M, nrep, subsets):
    """Independent PRNG replications of the linear model batches."""
    model = LinearGaussian()
    structure = model.structure()
    plan = PermutationPlan([b.indices for b in structure.blocks])
    table = route_subsets(plan, subsets)
    reps, width = build_representations(structure, model, table.labels)
    for k in range(nrep):
        sp = SamplePlan(width, generator="prng", seed=1000 + k)
        U1 = generate_panel(sp, max(m, M), which=1)
        U2 = generate_panel(sp, max(m, M), which=2)
        samples = [RepresentationSamples(rep, U1, U2) for rep in reps]
        yield [(pick_freeze_evaluate(samples[table.assignment[u]].head(m),
                                     u),
                samples[table.assignment[u]])
               for u in subsets]


@pytest.mark.slow
def test_linear_estimators_unbiased():
    subsets = [(1,), (1, 2)]
    nrep = 500
    traces = np.empty((nrep, len(subsets), 2))
    for k, batches in enumerate(_linear_replications(200, 200, nrep,
                                                     subsets)):
        for i, (batch, _) in enumerate(batches):
            cov = estimate_covariances(batch)
            traces[k, i] = (np.trace(cov.D_u), np.trace(cov.D_tot))
    model = LinearGaussian()
    V = float(model.covariance.sum())
    expected = linear_indices(model, subsets)
    mean = traces.mean(axis=0)
    se = traces.std(axis=0, ddof=1) / np.sqrt(nrep)
    for i, u in enumerate(subsets):
        first, total = expected[u]
        assert abs(mean[i, 0] - first*V) < 3*se[i, 0], u
        assert abs(mean[i, 1] - total*V) < 3*se[i, 1], u


@pytest.mark.slow
def test_linear_estimator_asymptotic_normality():
    m, nrep = 200, 500
    truth = linear_indices(LinearGaussian(), [(1,)])[(1,)][0]
    scores = []
    # M >> m, so the variability of Sigma is negligible
    for batches in _linear_replications(m, 20000, nrep, [(1,)]):
        batch, samples = batches[0]
        entry = estimate_indices(batch, sigma_pairs=(samples.A, samples.B))
        value = entry.get("dS", "first")
        se = entry.stderr[("dS", "first")]
        scores.append(np.sqrt(m) * (value - truth) / se)
    assert stats.kstest(scores, "norm").pvalue > 0.01
