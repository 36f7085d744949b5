# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Custom checkers to further validate the configurations.

NOTE
----
These functions further check the configurations as a whole, which
means one config option may be checked against its context.
Therefore, they are very different to the checker functions used
in the ``validate.Validator``.

Every checker returns a dictionary ``{key: message}`` of the invalid
config options; an empty dictionary means no errors.
"""

import os
import logging

from ..errors import ConfigError, ExpressionError


logger = logging.getLogger(__name__)

# Number of inputs of the preset models
PRESET_DIMS = {"linear": 3, "portfolio": 4, "gsobol": 10}
# Number of (sigma, rho) parameters of the preset models
PRESET_PARAMS = {"linear": (3, 3), "portfolio": (4, 2), "gsobol": (0, 3)}
# Minimum number of pick-freeze rows for the confidence intervals
M_MIN = 100


def _parse_subset(text):
    """Parse a ``"1,2"`` subset string; ``None`` if malformed."""
    try:
        items = [int(s) for s in str(text).replace(":", ",").split(",")
                 if s.strip()]
    except ValueError:
        return None
    return tuple(sorted(set(items))) if items else None


def input_dim(configs):
    """
    Number of model inputs implied by the configurations: the preset
    dimension, ``model/dim``, or the largest referenced input index.
    """
    preset = configs.getn("model/preset")
    if preset:
        return PRESET_DIMS[preset]
    dim = configs.getn("model/dim")
    if dim:
        return dim
    used = [int(k) for k in configs.getn("independent").keys()
            if str(k).isdigit()]
    for block in configs.getn("blocks").values():
        used.extend(block["indices"])
    return max(used) if used else 0


def _check_missing(configs, keys):
    """Check whether the required config values are missing."""
    if isinstance(keys, str):
        keys = [keys, ]
    results = {}
    for key in keys:
        val = configs.getn(key)
        if val in ("", None, []):
            results[key] = "Value required but missing"
    return results


def _check_file_existence(configs, key):
    """Check whether the file specified by the config key exists."""
    results = {}
    path = configs.get_path(key)
    if path and not os.path.isfile(path):
        results[key] = "File not exist: %s" % path
    return results


def check_model(configs):
    """Check the ``[model]`` section."""
    from ..models.expression import parse_expression

    results = {}
    preset = configs.getn("model/preset")
    if preset:
        nsigma, nrho = PRESET_PARAMS[preset]
        sigma = configs.getn("model/sigma")
        rho = configs.getn("model/rho")
        if sigma and len(sigma) != nsigma:
            results["model/sigma"] = ("preset '%s' takes %d sigma values" %
                                      (preset, nsigma))
        if sigma and min(sigma) <= 0:
            results["model/sigma"] = "sigma must be > 0"
        if rho and len(rho) != nrho:
            results["model/rho"] = ("preset '%s' takes %d rho values" %
                                    (preset, nrho))
        if preset == "portfolio" and not configs.getn("model/nu") > 4:
            results["model/nu"] = "portfolio model requires nu > 4"
        A = configs.getn("model/A")
        if preset == "gsobol" and A:
            if len(A) % 10 != 0:
                results["model/A"] = "A must have 10 columns (row-major)"
            elif min(A) < 0:
                results["model/A"] = "A must be >= 0"
        return results

    results.update(_check_missing(configs, "model/expressions"))
    d = input_dim(configs)
    for k, text in enumerate(configs.getn("model/expressions")):
        try:
            parse_expression(text, dim=d or None)
        except ExpressionError as e:
            results["model/expressions[%d]" % (k+1)] = str(e)
    return results


def _check_constraint(name, block):
    """The constraint of an empirical block may only use its inputs."""
    from ..models.expression import parse_expression

    key = "blocks/%s/constraint" % name
    if not block["constraint"]:
        return {key: "empirical block requires a constraint expression"}
    try:
        tree = parse_expression(block["constraint"])
    except ExpressionError as e:
        return {key: str(e)}
    extra = tree.variables() - set(block["indices"])
    if extra:
        return {key: "constraint uses inputs outside the block: %s" %
                ", ".join("x%d" % i for i in sorted(extra))}
    return {}


def check_structure(configs):
    """
    Check that the independent inputs and the dependent blocks
    partition the inputs ``{1..d}``, and that the blocks carry what
    their kind requires.
    """
    results = {}
    if configs.getn("model/preset"):
        return results
    d = input_dim(configs)
    seen = {}
    for key in configs.getn("independent").keys():
        if not str(key).isdigit():
            results["independent/%s" % key] = "not an input index"
            continue
        seen.setdefault(int(key), []).append("independent")
    for name, block in configs.getn("blocks").items():
        indices = block["indices"]
        key = "blocks/%s/indices" % name
        if len(indices) < 2:
            results[key] = "dependent blocks need >= 2 inputs"
        for i in indices:
            seen.setdefault(int(i), []).append(name)
        kind = block["kind"]
        if kind in ("gaussian", "student"):
            margins = set(int(k) for k in block.sections if k.isdigit())
            missing = set(indices) - margins
            if missing:
                results["blocks/%s" % name] = ("missing margins of inputs %s"
                                               % sorted(missing))
        elif kind == "empirical":
            if len(indices) != 2:
                results[key] = "empirical blocks are pairs"
            results.update(_check_constraint(name, block))
            if block["bounds"] and len(block["bounds"]) != 2:
                results["blocks/%s/bounds" % name] = "bounds are [low, high]"
            margins = set(int(k) for k in block.sections if k.isdigit())
            missing = set(indices) - margins
            if missing:
                results["blocks/%s" % name] = ("missing margins of inputs %s"
                                               % sorted(missing))
    for i, owners in sorted(seen.items()):
        if i < 1 or (d and i > d):
            results["structure/x%d" % i] = ("index out of range (d = %d)" %
                                            d)
        elif len(owners) > 1:
            results["structure/x%d" % i] = ("input assigned more than once: "
                                            "%s" % ", ".join(owners))
    missing = set(range(1, d+1)) - set(seen)
    if missing:
        results["structure"] = ("inputs without margin or block: %s" %
                                sorted(missing))
    return results


def check_copulas(configs):
    """
    Check the correlation matrices of the copula blocks against the
    block dimensions; they must be symmetric positive definite.
    """
    from ..depmodel.copulas import CopulaSpec
    from ..errors import DependencyModelError, ParameterError

    results = {}
    if configs.getn("model/preset"):
        return results
    for name, block in configs.getn("blocks").items():
        if block["kind"] not in ("gaussian", "student"):
            continue
        key = "blocks/%s/correlation" % name
        d = len(block["indices"])
        R = block["correlation"]
        if len(R) != d*d:
            results[key] = ("correlation must have %d values (%dx%d)" %
                            (d*d, d, d))
            continue
        try:
            CopulaSpec(block["kind"], block["indices"], R, nu=block["nu"])
        except (DependencyModelError, ParameterError) as e:
            results[key] = str(e)
    return results


def check_subsets(configs):
    """Check the requested subsets are nonempty and within ``{1..d}``."""
    results = {}
    d = input_dim(configs)
    mode = configs.getn("subsets/mode")
    items = configs.getn("subsets/list")
    if mode == "list" and not items:
        results["subsets/list"] = "no subsets requested"
    if mode == "preset" and not configs.getn("model/preset"):
        results["subsets/mode"] = "mode 'preset' requires a model preset"
    if mode == "upto" and d and configs.getn("subsets/order") > d:
        results["subsets/order"] = "order > d = %d" % d
    errors = []
    for text in items:
        u = _parse_subset(text)
        if u is None:
            errors.append("malformed subset '%s'" % text)
        elif min(u) < 1 or (d and max(u) > d):
            errors.append("subset {%s}: index out of range (d = %d)" %
                          (text, d))
    if errors:
        results["subsets/list"] = "; ".join(errors)
    return results


def check_sampling(configs):
    """Check the ``[sampling]`` section."""
    results = {}
    m = configs.getn("sampling/m")
    if m < M_MIN:
        results["sampling/m"] = "m must be >= %d for the CIs (got %d)" % (
            M_MIN, m)
    M = configs.getn("sampling/M")
    if M == 1:
        results["sampling/M"] = "M must be >= 2 (or 0 for M = m)"
    if (configs.getn("sampling/generator") == "sobol-joe-kuo" and
            configs.getn("sampling/panel2") == "rescramble"):
        results["sampling/panel2"] = ("the unscrambled joe-kuo sequence "
                                      "cannot be rescrambled")
    results.update(_check_file_existence(configs, "sampling/direction_file"))
    return results


def check_output(configs):
    """Check the ``[output]`` section."""
    results = {}
    results.update(_check_missing(configs, ["output/dir", "output/prefix"]))
    prefix = configs.getn("output/prefix")
    if prefix and os.sep in prefix:
        results["output/prefix"] = "prefix must not contain '%s'" % os.sep
    return results


# Available checkers to validate the configurations
_CHECKERS = [
    check_model,
    check_structure,
    check_copulas,
    check_subsets,
    check_sampling,
    check_output,
]


def check_configs(configs, raise_exception=True, checkers=_CHECKERS):
    """
    Check the configurations are valid against the above checkers.

    Parameters
    ----------
    configs : `~ConfigManager`
        An `ConfigManager` instance contains both default and user
        configurations.
    raise_exception : bool, optional
        Whether raise a ``ConfigError`` exception if there is any invalid
        config options?
    checkers : list of functions, optional
        List of checker functions to be used.

    Returns
    -------
    result : bool
        ``True`` if the configurations pass all checker functions.
    errors : dict
        An dictionary containing the details about the invalid config
        options, with the keys identical to the config keys.
    """
    errors = {}
    for checker in checkers:
        errors.update(checker(configs))

    if errors != {}:
        if raise_exception:
            msg = "\n".join(['Config "{key}": {val}'.format(key=key, val=val)
                             for key, val in sorted(errors.items())])
            raise ConfigError(msg)
        else:
            return (False, errors)
    else:
        return (True, {})
