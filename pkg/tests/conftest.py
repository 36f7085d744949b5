# Copyright (c) 2023-2024 DepGSA developers
# MIT License

import json

import numpy as np
import pytest

from depgsa.configs.manager import ConfigManager
from depgsa.depmodel.copulas import CopulaSpec
from depgsa.margins import Normal, StudentT, Uniform
from depgsa.models.builtin import GSobol, LinearGaussian, Portfolio


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def linear_model():
    return LinearGaussian(sigma=(1.0, 1.0, 1.0), rho=(0.5, 0.2, 0.3))


@pytest.fixture
def portfolio_model():
    return Portfolio(sigma=(1.0, 1.0, 1.0, 1.0), rho=(0.5, 0.3), nu=5.0)


@pytest.fixture
def gsobol_model():
    return GSobol()


@pytest.fixture
def gauss3():
    """Gaussian copula of 3 standard normal inputs."""
    R = [[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]]
    copula = CopulaSpec("gaussian", (1, 2, 3), R)
    margins = {i: Normal(0.0, 1.0) for i in (1, 2, 3)}
    return (copula, margins)


@pytest.fixture
def student_pair():
    copula = CopulaSpec("student", (3, 4), [[1.0, 0.3], [0.3, 1.0]], nu=5)
    margins = {3: StudentT(5, 0.0, 1.0), 4: StudentT(5, 0.0, 1.0)}
    return (copula, margins)


@pytest.fixture
def uniform_gauss3():
    """Gaussian copula of uniform margins (g-function block)."""
    R = [[1.0, 0.0, 0.01], [0.0, 1.0, 0.85], [0.01, 0.85, 1.0]]
    copula = CopulaSpec("gaussian", (1, 2, 3), R)
    margins = {i: Uniform(0.0, 1.0) for i in (1, 2, 3)}
    return (copula, margins)


@pytest.fixture
def configs():
    return ConfigManager()


@pytest.fixture
def custom_config():
    """JSON configuration of a custom model with two dependent blocks."""
    data = {
        "schema": "depgsa/1",
        "model": {"expressions": ["x1 + x2*x3 + x4", "x1*x4"]},
        "independent": {"1": {"family": "uniform", "a": 0, "b": 1}},
        "blocks": [
            {"kind": "gaussian", "indices": [2, 3],
             "correlation": [[1.0, 0.4], [0.4, 1.0]],
             "margins": {"2": {"family": "normal", "mu": 0, "sigma": 1},
                         "3": {"family": "normal", "mu": 1, "sigma": 2}}},
            {"kind": "simplex", "indices": [4, 5]},
        ],
        "subsets": {"mode": "singletons", "list": [[2, 3], [4, 5]]},
        "sampling": {"m": 512, "generator": "sobol", "seed": 7},
        "output": {"format": "both", "prefix": "custom"},
    }
    return data


@pytest.fixture
def custom_config_text(custom_config):
    # x5 is not used by the model; give the model 5 inputs
    custom_config["model"]["dim"] = 5
    return json.dumps(custom_config)
