# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Named presets of the built-in test models.

A preset fills both the model and the block structure of its inputs,
with optional parameter overrides taken from the ``[model]`` section.
"""

import logging
from collections import OrderedDict

from ..models.builtin import make_model


logger = logging.getLogger(__name__)

# Subsets reported by default for each preset: the singletons, plus the
# pairs of the two dependent blocks of the g-function
PRESET_SUBSETS = OrderedDict([
    ("linear", [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3)]),
    ("portfolio", [(1,), (2,), (3,), (4,), (1, 2), (3, 4), (1, 3)]),
    ("gsobol", [(i,) for i in range(1, 11)] + [
        (1, 2), (1, 3), (1, 9), (1, 10), (2, 3),
        (2, 9), (2, 10), (3, 9), (3, 10), (9, 10)]),
])


def preset_params(name, section=None):
    """
    Model parameters of the preset from the ``[model]`` config section;
    empty values keep the model defaults.
    """
    params = {}
    if section is None:
        return params
    if name in ("linear", "portfolio"):
        if section.get("sigma"):
            params["sigma"] = tuple(section["sigma"])
        if section.get("rho"):
            params["rho"] = tuple(section["rho"])
    if name == "portfolio":
        params["nu"] = section.get("nu", 5.0)
    if name == "gsobol":
        if section.get("A"):
            params["A"] = section["A"]
        if section.get("rho"):
            params["rho"] = tuple(section["rho"])
    return params


def load_preset(name, section=None):
    """
    Build the model of a preset and its input structure.

    Returns
    -------
    model : `~depgsa.models.builtin.Model`
    structure : `~depgsa.representations.structure.BlockStructure`
    """
    model = make_model(name, **preset_params(name, section))
    logger.info("Loaded preset '%s': %d inputs, %d outputs" %
                (name, model.dim, model.n_outputs))
    return (model, model.structure())
