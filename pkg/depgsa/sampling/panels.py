# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Panels of U(0, 1) values feeding the representations.

The pick-freeze estimators need two independent panels of the same
width.  With the Sobol' generators the second panel takes the next
``W`` dimensions of the same sequence (``panel2 = "disjoint"``), or the
same dimensions with another scrambling key (``"rescramble"``); with
the pseudo-random generator every panel has its own Philox stream.
"""

import logging
import warnings
from collections import namedtuple

import numpy as np
from scipy.stats import qmc

from .sobol import DIRECTION_FILE, max_dimension, sobol_joe_kuo
from ..errors import ConfigError
from ..utils.stats import clip_open_unit


logger = logging.getLogger(__name__)

GENERATORS = ("sobol", "sobol-joe-kuo", "prng")
PANEL2_MODES = ("disjoint", "rescramble")
# Dimensions supported by ``scipy.stats.qmc.Sobol``
SCIPY_MAX_DIM = 21201


class SamplePlan:
    """
    Generator settings of the uniform panels.

    Parameters
    ----------
    width : int
        Number of columns ``W`` of each panel.
    generator : str, optional
        ``"sobol"`` (scrambled), ``"sobol-joe-kuo"`` (plain, Gray-code
        order) or ``"prng"`` (Philox).
    seed : int, optional
        Scrambling key / random seed.
    skip : int, optional
        Number of leading points dropped.
    panel2 : str, optional
        ``"disjoint"`` or ``"rescramble"``.
    direction_file : str, optional
        Direction numbers of the ``"sobol-joe-kuo"`` generator.
    columns : list[str], optional
        Names of the panel columns (for the reports).

    Raises
    ------
    ConfigError :
        Invalid settings, or more dimensions than the generator supports.
    """

    def __init__(self, width, generator="sobol", seed=20240521, skip=1,
                 panel2="disjoint", direction_file=None, columns=None):
        if generator not in GENERATORS:
            raise ConfigError("unknown generator: %s" % generator)
        if panel2 not in PANEL2_MODES:
            raise ConfigError("unknown panel2 mode: %s" % panel2)
        if width < 1:
            raise ConfigError("panel width must be >= 1")
        if generator == "sobol-joe-kuo" and panel2 == "rescramble":
            raise ConfigError("the unscrambled Sobol' sequence cannot be "
                              "rescrambled; use panel2 = disjoint")
        self.width = int(width)
        self.generator = generator
        self.seed = int(seed)
        self.skip = int(skip)
        self.panel2 = panel2
        self.direction_file = direction_file or DIRECTION_FILE
        self.columns = list(columns) if columns else None
        self._check_dimension()

    @property
    def total_dims(self):
        """Dimensions of the sequence drawn for both panels."""
        if self.generator != "prng" and self.panel2 == "disjoint":
            return 2 * self.width
        return self.width

    def _check_dimension(self):
        if self.generator == "sobol-joe-kuo":
            maxdim = max_dimension(self.direction_file)
        elif self.generator == "sobol":
            maxdim = SCIPY_MAX_DIM
        else:
            return
        if self.total_dims > maxdim:
            raise ConfigError("the panels need %d Sobol' dimensions; "
                              "at most %d are supported" %
                              (self.total_dims, maxdim))

    def to_dict(self):
        return {
            "generator": self.generator,
            "seed": self.seed,
            "skip": self.skip,
            "panel2": self.panel2,
            "width": self.width,
            "columns": self.columns,
        }


def _scipy_sobol(dim, seed, skip, m):
    engine = qmc.Sobol(d=dim, scramble=True, seed=seed)
    if skip > 0:
        engine.fast_forward(skip)
    with warnings.catch_warnings():
        # balance properties need powers of 2; any m is accepted
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(m)


def generate_panel(plan, m, which=1):
    """
    Generate the panel ``which`` (1 or 2) of ``m`` rows.

    Returns
    -------
    panel : 2D `~numpy.ndarray`, shape ``(m, plan.width)``
        Values strictly inside (0, 1).
    """
    if which not in (1, 2):
        raise ValueError("panel must be 1 or 2 (got %r)" % which)
    if m < 1:
        raise ConfigError("number of rows must be >= 1 (got %d)" % m)
    W = plan.width
    if plan.generator == "prng":
        ss = np.random.SeedSequence([plan.seed, which])
        rng = np.random.Generator(np.random.Philox(ss))
        panel = rng.random((plan.skip + m, W))[plan.skip:]
    elif plan.panel2 == "disjoint":
        if plan.generator == "sobol":
            points = _scipy_sobol(2 * W, plan.seed, plan.skip, m)
        else:
            points = sobol_joe_kuo(m, 2 * W, skip=plan.skip,
                                   filepath=plan.direction_file)
        panel = points[:, (which-1)*W:which*W]
    else:
        key = np.random.default_rng(
            np.random.SeedSequence([plan.seed, which]))
        panel = _scipy_sobol(W, key, plan.skip, m)
    logger.debug("Generated panel %d: %d x %d (%s)" %
                 (which, m, W, plan.generator))
    return clip_open_unit(panel)


InputTuple = namedtuple("InputTuple",
                        ["independent", "leads", "latents", "aux"])
InputTuple.__doc__ = """
Independent inputs of a representation.

independent : 2D array ``(n, |pi_1|)`` of the independent inputs
leads : 2D array ``(n, K-1)`` of the block leads
latents : list of 2D arrays ``(n, d_k - 1)``, the latents of every block
aux : list of 2D arrays ``(n, a_k)`` or ``None``, the auxiliary uniforms
"""


def map_to_inputs(panel, rep):
    """
    Push the uniforms of a panel through the laws of the representation
    inputs: the inverse CDFs of the independent margins and of the
    leads, the quantiles of the latent laws; the auxiliary uniforms are
    passed through.

    Parameters
    ----------
    panel : 2D `~numpy.ndarray`, shape ``(n, W)``
        ``W`` at least the width of ``rep``.  A 1D row is accepted.
    rep : `~depgsa.representations.representation.Representation`

    Returns
    -------
    inputs : `InputTuple`

    Raises
    ------
    ConfigError :
        The panel is narrower than the representation layout.
    """
    U = np.asarray(panel, dtype=np.float64)
    if U.ndim == 1:
        U = U[np.newaxis, :]
    if U.ndim != 2 or U.shape[1] < rep.width:
        raise ConfigError("panel of %d columns does not match the layout "
                          "of %d columns" % (U.shape[-1], rep.width))
    n = U.shape[0]
    independent = []
    block_cols = [dict(lead=None, latents=[], aux=[]) for _ in rep.dms]
    for c, col in enumerate(rep.columns):
        if col.kind == "independent":
            margin = rep.structure.independent[col.index]
            independent.append(margin.inverse_cdf(U[:, c]))
        elif col.kind == "lead":
            block_cols[col.block]["lead"] = c
        else:
            block_cols[col.block][
                "latents" if col.kind == "latent" else "aux"].append(c)
    leads = np.empty((n, len(rep.dms)))
    latents = []
    aux = []
    for k, (dm, cols) in enumerate(zip(rep.dms, block_cols)):
        leads[:, k] = dm.lead_ppf(U[:, cols["lead"]])
        latents.append(np.column_stack(
            [law.ppf(U[:, c])
             for law, c in zip(dm.latent_laws, cols["latents"])]))
        aux.append(U[:, cols["aux"]] if cols["aux"] else None)
    if independent:
        independent = np.column_stack(independent)
    else:
        independent = np.empty((n, 0))
    return InputTuple(independent, leads, latents, aux)
