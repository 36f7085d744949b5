# Copyright (c) 2023-2024 DepGSA developers
# MIT License

import numpy as np
import pytest

from depgsa.errors import ConfigError
from depgsa.representations import PermutationPlan, build_representation
from depgsa.sampling import (SamplePlan, generate_panel, map_to_inputs,
                             sobol_joe_kuo)
from depgsa.sampling.sobol import direction_numbers, max_dimension
from depgsa.utils.stats import clip_open_unit


def test_sobol_first_points():
    x = sobol_joe_kuo(3, 1)
    assert np.allclose(x[:, 0], [0.5, 0.75, 0.25])
    x = sobol_joe_kuo(4, 1, skip=0)
    assert x[0, 0] == 0.0
    assert np.allclose(x[1:, 0], [0.5, 0.75, 0.25])


@pytest.mark.parametrize("dim", [1, 5, 40])
def test_sobol_stratification(dim):
    # every 1D projection of the first 2^k points is {j / 2^k}
    x = sobol_joe_kuo(64, dim, skip=0)
    for j in range(dim):
        assert np.allclose(np.sort(x[:, j]), np.arange(64) / 64.0)


def test_sobol_skip_is_a_shift():
    x = sobol_joe_kuo(100, 6, skip=0)
    y = sobol_joe_kuo(90, 6, skip=10)
    assert np.array_equal(x[10:], y)


def test_direction_numbers():
    assert max_dimension() == 1024
    V = direction_numbers(2)
    assert V[0, 0] == 2**31
    assert V[0, 31] == 1
    with pytest.raises(ConfigError):
        direction_numbers(1025)
    with pytest.raises(ConfigError):
        sobol_joe_kuo(0, 2)


def test_sample_plan_invalid():
    with pytest.raises(ConfigError):
        SamplePlan(3, generator="halton")
    with pytest.raises(ConfigError):
        SamplePlan(3, generator="sobol-joe-kuo", panel2="rescramble")
    with pytest.raises(ConfigError):
        SamplePlan(600, generator="sobol-joe-kuo")
    with pytest.raises(ConfigError):
        SamplePlan(0)
    assert SamplePlan(600, generator="sobol").total_dims == 1200
    assert SamplePlan(600, generator="prng").total_dims == 600
    assert SamplePlan(400, generator="sobol-joe-kuo").total_dims == 800


@pytest.mark.parametrize("generator, panel2", [
    ("sobol", "disjoint"),
    ("sobol", "rescramble"),
    ("sobol-joe-kuo", "disjoint"),
    ("prng", "disjoint"),
])
def test_panels(generator, panel2):
    plan = SamplePlan(4, generator=generator, seed=5, panel2=panel2)
    U1 = generate_panel(plan, 4096, which=1)
    U2 = generate_panel(plan, 4096, which=2)
    assert U1.shape == U2.shape == (4096, 4)
    for U in (U1, U2):
        assert np.all((U > 0) & (U < 1))
        assert np.allclose(U.mean(axis=0), 0.5, atol=0.02)
    # the two panels are independent
    C = np.corrcoef(np.hstack([U1, U2]), rowvar=False)[:4, 4:]
    assert np.max(np.abs(C)) < 0.06
    # deterministic given the seed
    assert np.array_equal(U1, generate_panel(plan, 4096, which=1))


def test_panels_seeds_differ():
    a = generate_panel(SamplePlan(2, seed=1), 256)
    b = generate_panel(SamplePlan(2, seed=2), 256)
    assert not np.allclose(a, b)


def test_joe_kuo_panels_are_disjoint_dimensions():
    plan = SamplePlan(2, generator="sobol-joe-kuo", skip=1)
    points = clip_open_unit(sobol_joe_kuo(32, 4, skip=1))
    assert np.array_equal(generate_panel(plan, 32, which=1), points[:, :2])
    assert np.array_equal(generate_panel(plan, 32, which=2), points[:, 2:])


def test_prng_skip_drops_rows():
    a = generate_panel(SamplePlan(3, generator="prng", seed=9, skip=0), 10)
    b = generate_panel(SamplePlan(3, generator="prng", seed=9, skip=2), 8)
    assert np.array_equal(a[2:], b)


def test_generate_panel_invalid():
    plan = SamplePlan(2)
    with pytest.raises(ValueError):
        generate_panel(plan, 10, which=3)
    with pytest.raises(ConfigError):
        generate_panel(plan, 0)


def test_plan_to_dict():
    plan = SamplePlan(3, generator="prng", seed=4, columns=["x1", "x2",
                                                            "x3"])
    data = plan.to_dict()
    assert data["generator"] == "prng"
    assert data["seed"] == 4
    assert data["columns"] == ["x1", "x2", "x3"]


def test_map_to_inputs(linear_model):
    structure = linear_model.structure()
    plan = PermutationPlan([structure.blocks[0].indices])
    rep = build_representation(structure, linear_model,
                               [plan.permutations[0][1]])
    U = np.array([[0.5, 0.5, 0.5, 0.9], [0.975, 0.5, 0.5, 0.1]])
    t = map_to_inputs(U, rep)
    assert t.independent.shape == (2, 0)
    assert t.leads.shape == (2, 1)
    assert np.allclose(t.leads[:, 0], [0.0, 1.959964], atol=1e-5)
    assert t.latents[0].shape == (2, 2)
    assert np.allclose(t.latents[0], 0.0)
    assert t.aux == [None]
    with pytest.raises(ConfigError):
        map_to_inputs(U[:, :2], rep)
