# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Sensitivity analysis runs.

A run goes through four phases:

1. plan: select the permutations of every dependent block and route the
   requested subsets jointly onto as few representations as possible;
2. representations: build only the routed representations and draw the
   two uniform panels shared by all of them;
3. estimation: evaluate ``A``/``B`` once per representation, then the
   pick-freeze batch, the covariances and the indices of every subset
   it serves;
4. output: write the index report (CSV and/or JSON) and the audit log.
"""

import os
import time
import hashlib
import logging
from collections import OrderedDict
from itertools import combinations

import numpy as np

from .configs.checkers import _parse_subset, input_dim, M_MIN
from .configs.presets import PRESET_SUBSETS, load_preset
from .empirical import ConstrainedSampler
from .margins import margin_from_config
from .depmodel.copulas import CopulaSpec
from .models.analytic import NOT_AVAILABLE, analytic_indices
from .models.builtin import ExpressionModel
from .models.expression import parse_expression
from .representations.permutations import PermutationPlan
from .representations.representation import build_representations
from .representations.routing import normalize_subset, route_subsets
from .representations.structure import BlockStructure, DependentBlock
from .sampling.panels import SamplePlan, generate_panel
from .sensitivity.estimators import (FLAG_HEURISTIC, compute_indices,
                                     estimate_covariances, estimate_sigma,
                                     loewner_comparisons)
from .sensitivity.pickfreeze import (RepresentationSamples,
                                     pick_freeze_evaluate)
from .sensitivity.report import IndexReport
from .utils.io import json_dump
from .errors import ConfigError, DomainError


logger = logging.getLogger(__name__)

SUBSET_MODES = ("list", "singletons", "pairs", "upto", "preset")
OUTPUT_FORMATS = ("csv", "json", "both")


def enumerate_subsets(d, mode="singletons", order=1, extra=(),
                      preset=None):
    """
    The requested subsets, without duplicates, in the order: generated
    subsets first, then the explicit ones.

    Raises
    ------
    DomainError :
        An empty subset or an index outside ``{1..d}``.
    """
    if mode not in SUBSET_MODES:
        raise ConfigError("unknown subsets mode: %s" % mode)
    inputs = range(1, d+1)
    if mode == "singletons":
        subsets = [(i,) for i in inputs]
    elif mode == "pairs":
        subsets = list(combinations(inputs, 2))
    elif mode == "upto":
        subsets = [c for p in range(1, min(order, d) + 1)
                   for c in combinations(inputs, p)]
    elif mode == "preset":
        if preset not in PRESET_SUBSETS:
            raise ConfigError("no preset subsets for model '%s'" % preset)
        subsets = list(PRESET_SUBSETS[preset])
    else:
        subsets = []
    subsets.extend(extra)
    result = []
    for u in subsets:
        u = normalize_subset(u)
        if u[0] < 1 or u[-1] > d:
            raise DomainError("subset %s: index out of range (d = %d)" %
                              (u, d))
        if u not in result:
            result.append(u)
    return result


def _constraint_function(text):
    tree = parse_expression(text)
    width = max(tree.variables() or {1})

    def constraint(x, indices):
        full = np.zeros((x.shape[0], width))
        for k, i in enumerate(indices):
            if i <= width:
                full[:, i-1] = x[:, k]
        return tree.evaluate(full)

    return constraint


def _block_from_config(name, section, seed):
    """Build the dependent block of a ``[blocks]`` sub-section."""
    kind = section["kind"]
    indices = [int(i) for i in section["indices"]]
    margins = {int(k): margin_from_config(section[k])
               for k in section.sections}
    if kind in ("gaussian", "student"):
        copula = CopulaSpec(kind, indices, section["correlation"],
                            nu=section["nu"] if kind == "student" else None)
        return DependentBlock(kind, indices, margins=margins, copula=copula)
    elif kind == "simplex":
        return DependentBlock(kind, indices)
    # empirical: pair of independent margins conditioned on the
    # constraint value lying in the bounds
    order = sorted(indices)
    constraint = _constraint_function(section["constraint"])
    bounds = section["bounds"] or [-np.inf, 0.0]

    def base(n, rng):
        return np.column_stack([margins[i].rvs(n, rng=rng) for i in order])

    sampler = ConstrainedSampler(
        base, constraint=lambda x: constraint(x, order),
        low=bounds[0], high=bounds[1])
    fit_options = {
        "nsample": section["nsample"],
        "seed": seed,
        "features": tuple(section["features"]),
        "ridge": section["ridge"],
    }
    logger.info("Block '%s': empirical pair %s under '%s' in [%g, %g]" %
                (name, order, section["constraint"], bounds[0], bounds[1]))
    return DependentBlock(kind, indices, margins=margins, sampler=sampler,
                          fit_options=fit_options)


class RunConfig:
    """
    Everything a run needs, built and checked from the configurations.

    Parameters
    ----------
    model : `~depgsa.models.builtin.Model`
    structure : `~depgsa.representations.structure.BlockStructure`
    subsets : list[tuple[int]]
    m : int
        Pick-freeze rows (at least 100).
    M : int, optional
        Rows of the output covariance estimate; default ``m``.
    preset : str, optional
        Name of the model preset, if any.

    The other keyword parameters mirror the ``[sampling]``,
    ``[estimation]`` and ``[output]`` config sections.
    """

    def __init__(self, model, structure, subsets, m, M=None,
                 generator="sobol", seed=20240521, skip=1,
                 panel2="disjoint", direction_file=None,
                 sigma="representation", threads=1, total_only=False,
                 loewner_max_subsets=64, outdir="depgsa-out", fmt="both",
                 prefix="depgsa", clobber=False, preset=None, digest=None):
        if m < M_MIN:
            raise ConfigError("m must be >= %d for the CIs (got %d)" %
                              (M_MIN, m))
        if model.dim != structure.d:
            raise ConfigError("model takes %d inputs, structure has %d" %
                              (model.dim, structure.d))
        if not subsets:
            raise ConfigError("no subsets requested")
        if sigma not in ("representation", "pooled"):
            raise ConfigError("unknown sigma estimation: %s" % sigma)
        if fmt not in OUTPUT_FORMATS:
            raise ConfigError("unknown output format: %s" % fmt)
        self.model = model
        self.structure = structure
        self.subsets = [normalize_subset(u) for u in subsets]
        for u in self.subsets:
            if u[0] < 1 or u[-1] > structure.d:
                raise ConfigError("subset %s: index out of range (d = %d)" %
                                  (u, structure.d))
        self.m = int(m)
        self.M = int(M) if M else self.m
        self.generator = generator
        self.seed = int(seed)
        self.skip = int(skip)
        self.panel2 = panel2
        self.direction_file = direction_file or None
        self.sigma = sigma
        self.threads = int(threads)
        self.total_only = bool(total_only)
        self.loewner_max_subsets = int(loewner_max_subsets)
        self.outdir = outdir
        self.fmt = fmt
        self.prefix = prefix
        self.clobber = bool(clobber)
        self.preset = preset or None
        self.digest = digest

    @classmethod
    def from_configs(cls, configs):
        """
        Build the run configuration from a `~ConfigManager`, which should
        have passed ``check_all()``.
        """
        preset = configs.getn("model/preset")
        if preset:
            model, structure = load_preset(preset, configs.getn("model"))
        else:
            d = input_dim(configs)
            seed = configs.getn("sampling/seed")
            independent = {int(k): margin_from_config(sec)
                           for k, sec in configs.getn("independent").items()}
            blocks = [_block_from_config(name, sec, seed)
                      for name, sec in configs.getn("blocks").items()]
            structure = BlockStructure(d, independent=independent,
                                       blocks=blocks)
            model = ExpressionModel(configs.getn("model/expressions"), dim=d)
        extra = [_parse_subset(s) for s in configs.getn("subsets/list")]
        subsets = enumerate_subsets(
            structure.d, mode=configs.getn("subsets/mode"),
            order=configs.getn("subsets/order"),
            extra=[u for u in extra if u], preset=preset)
        dump = configs.dump(flatten=True)
        dump.pop("userconfig", None)
        text = "\n".join("%s = %r" % (k, dump[k]) for k in sorted(dump))
        return cls(
            model, structure, subsets,
            m=configs.getn("sampling/m"), M=configs.getn("sampling/M"),
            generator=configs.getn("sampling/generator"),
            seed=configs.getn("sampling/seed"),
            skip=configs.getn("sampling/skip"),
            panel2=configs.getn("sampling/panel2"),
            direction_file=configs.get_path("sampling/direction_file"),
            sigma=configs.getn("estimation/sigma"),
            threads=configs.getn("estimation/threads"),
            total_only=configs.getn("estimation/total_only"),
            loewner_max_subsets=configs.getn(
                "estimation/loewner_max_subsets"),
            outdir=configs.get_path("output/dir"),
            fmt=configs.getn("output/format"),
            prefix=configs.getn("output/prefix"),
            clobber=configs.getn("output/clobber"),
            preset=preset,
            digest=hashlib.sha256(text.encode("utf-8")).hexdigest())

    def outfile(self, kind, ext):
        return os.path.join(self.outdir, "%s-%s.%s" % (self.prefix, kind,
                                                       ext))

    def to_dict(self):
        return OrderedDict([
            ("preset", self.preset),
            ("model", self.model.to_dict()),
            ("subsets", [list(u) for u in self.subsets]),
            ("m", self.m),
            ("M", self.M),
            ("generator", self.generator),
            ("seed", self.seed),
            ("skip", self.skip),
            ("panel2", self.panel2),
            ("sigma", self.sigma),
            ("threads", self.threads),
            ("total_only", self.total_only),
            ("format", self.fmt),
            ("config_digest", self.digest),
        ])


class RunResult:
    """
    Outcome of a run: the report (``None`` for a dry run), the routing
    table and the audit record.
    """

    def __init__(self, report, table, audit, files=()):
        self.report = report
        self.table = table
        self.audit = audit
        self.files = list(files)


def _banner(title):
    logger.info("=" * 20 + " %s " % title + "=" * 20)


def run(config, dry_run=False, write=True):
    """
    Run the sensitivity analysis described by ``config``.

    Parameters
    ----------
    config : `RunConfig`
    dry_run : bool, optional
        Stop after the planning phase (permutations and routing).
    write : bool, optional
        Write the report and audit files into ``config.outdir``.

    Returns
    -------
    result : `RunResult`

    Raises
    ------
    DegenerateVarianceError :
        The output covariance of a representation is (numerically) zero.
    ModelEvaluationError :
        Non-finite model outputs.
    """
    t0 = time.perf_counter()
    structure = config.structure
    audit = OrderedDict()
    audit["config"] = config.to_dict()

    _banner("plan")
    plan = PermutationPlan([b.indices for b in structure.blocks])
    table = route_subsets(plan, config.subsets)
    audit["R_min"] = plan.r_min
    audit["representations_built"] = len(table.labels)
    audit["plan"] = plan.to_dict()
    audit["routing"] = table.to_dict()
    logger.info("R_min = %d; building %d representations for %d subsets" %
                (plan.r_min, len(table.labels), len(config.subsets)))
    if dry_run:
        audit["wall_time"] = time.perf_counter() - t0
        logger.info("Dry run: stop after the planning phase")
        return RunResult(None, table, audit)

    _banner("representations")
    reps, width = build_representations(structure, config.model,
                                        table.labels)
    splan = SamplePlan(width, generator=config.generator, seed=config.seed,
                       skip=config.skip, panel2=config.panel2,
                       direction_file=config.direction_file)
    nrows = max(config.m, config.M)
    U1 = generate_panel(splan, nrows, which=1)
    U2 = generate_panel(splan, nrows, which=2)
    audit["sampling"] = splan.to_dict()
    audit["sampling"]["rows"] = nrows

    _banner("estimation")
    samples = [RepresentationSamples(rep, U1, U2, threads=config.threads)
               for rep in reps]
    pooled = None
    if config.sigma == "pooled":
        As = np.concatenate([s.A[:config.M] for s in samples], axis=0)
        Bs = np.concatenate([s.B[:config.M] for s in samples], axis=0)
        pooled = ((As, Bs), estimate_sigma(As, Bs))
        logger.info("Pooled output covariance over %d representations" %
                    len(samples))
    results = {}
    for pos, s in enumerate(samples):
        served = table.subsets_of(pos)
        logger.info("Representation %d/%d %s: %d subsets" %
                    (pos+1, len(samples), reps[pos].label, len(served)))
        if pooled is None:
            sigma_pairs = (s.A[:config.M], s.B[:config.M])
            sigma = None
        else:
            sigma_pairs, sigma = pooled
        head = s.head(config.m)
        for u in served:
            batch = pick_freeze_evaluate(head, u)
            cov = estimate_covariances(batch, sigma_pairs=sigma_pairs,
                                       sigma=sigma,
                                       total_only=config.total_only)
            entry = compute_indices(cov)
            # drop the per-row kernels once the indices are computed
            cov.K = cov.K_tot = cov.AD = cov.batch = None
            results[u] = (cov, entry)
        s.release()
    covs = [results[u][0] for u in config.subsets]
    entries = [results[u][1] for u in config.subsets]
    loewner = loewner_comparisons(covs, entries,
                                  max_subsets=config.loewner_max_subsets)

    meta = OrderedDict([
        ("model", config.model.name or "expression"),
        ("preset", config.preset or ""),
        ("m", config.m),
        ("M", config.M),
        ("generator", config.generator),
        ("seed", config.seed),
        ("R_min", plan.r_min),
        ("representations", len(table.labels)),
    ])
    report = IndexReport(entries, loewner=loewner, meta=meta)
    for line in report.summary():
        logger.info(line)

    analytic = analytic_indices(config.model, config.subsets)
    if analytic != NOT_AVAILABLE:
        audit["analytic"] = OrderedDict(
            (":".join(str(i) for i in u),
             None if v == NOT_AVAILABLE else list(v))
            for u, v in analytic.items())
    flags = sorted(set(f for e in entries for f in e.flags))
    audit["flags"] = flags
    if FLAG_HEURISTIC in flags:
        logger.info("M <= m: the CIs ignore the variability of Sigma "
                    "(%s)" % FLAG_HEURISTIC)

    files = []
    if write:
        _banner("output")
        if config.fmt in ("csv", "both"):
            outfile = config.outfile("indices", "csv")
            report.write_csv(outfile, clobber=config.clobber)
            files.append(outfile)
        if config.fmt in ("json", "both"):
            outfile = config.outfile("indices", "json")
            report.write_json(outfile, clobber=config.clobber)
            files.append(outfile)
    audit["files"] = files
    audit["wall_time"] = time.perf_counter() - t0
    if write:
        outfile = config.outfile("audit", "json")
        json_dump(audit, outfile, clobber=config.clobber)
        files.append(outfile)
    logger.info("Finished in %.1f seconds" % audit["wall_time"])
    return RunResult(report, table, audit, files)
