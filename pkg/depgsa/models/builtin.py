# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Models analyzed by the sensitivity runs.

* LinearGaussian:
  ``M(x) = x1 + x2 + x3`` of a Gaussian vector.

* Portfolio:
  ``M(x) = x1 x2 + x3 x4`` with a Gaussian pair and an independent
  Student t pair.

* GSobol:
  four-output g-function of 10 inputs in three blocks: independent
  uniforms ``x4..x8``, a Gaussian copula of uniforms ``x1..x3`` and a
  uniform pair ``x9 + x10 <= 1``.

* ExpressionModel:
  user-defined outputs written in the expression language.

Every built-in model also provides the block structure of its inputs.
"""

import logging
from collections import OrderedDict

import numpy as np

from .expression import parse_expression, pretty
from ..depmodel.copulas import CopulaSpec
from ..margins import Normal, StudentT, Uniform
from ..representations.structure import BlockStructure, DependentBlock
from ..errors import ModelEvaluationError, ParameterError


logger = logging.getLogger(__name__)


class Model:
    """
    Base class of the models: ``d`` inputs to ``N`` outputs, evaluated
    vectorized over rows.

    Sub-classes implement ``_evaluate()``.
    """
    name = None

    def __init__(self, dim, n_outputs):
        self.dim = int(dim)
        self.n_outputs = int(n_outputs)

    def evaluate(self, x, offset=0):
        """
        Evaluate the model on the rows of ``x``.

        Parameters
        ----------
        x : 2D array_like, shape ``(n, d)``
        offset : int, optional
            Index of the first row, for the error reports.

        Returns
        -------
        y : 2D `~numpy.ndarray`, shape ``(n, N)``

        Raises
        ------
        ModelEvaluationError :
            A non-finite output; the error carries the (global) row.
        """
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.dim:
            raise ParameterError("model takes %d inputs, got %d" %
                                 (self.dim, x.shape[1]))
        try:
            y = self._evaluate(x)
        except ModelEvaluationError as e:
            row = None if e.row is None else e.row + offset
            raise ModelEvaluationError(
                "%s at row %s" % (str(e).split(" at row ")[0], row),
                row=row, position=e.position) from e
        y = np.asarray(y, dtype=np.float64).reshape(x.shape[0], -1)
        bad = ~np.all(np.isfinite(y), axis=1)
        if np.any(bad):
            row = int(np.argmax(bad)) + offset
            raise ModelEvaluationError("non-finite model output at row %d" %
                                       row, row=row)
        return y

    def __call__(self, x):
        return self.evaluate(x)

    def _evaluate(self, x):
        raise NotImplementedError

    def structure(self):
        """Block structure of the model inputs (built-in models)."""
        raise NotImplementedError("%s has no bundled input structure" %
                                  type(self).__name__)

    def to_dict(self):
        return OrderedDict([("name", self.name), ("dim", self.dim),
                            ("n_outputs", self.n_outputs)])


class LinearGaussian(Model):
    """
    ``M(x) = x1 + x2 + x3`` with ``X ~ N(0, Sigma)``.

    Parameters
    ----------
    sigma : (float, float, float), optional
        Standard deviations.
    rho : (float, float, float), optional
        Correlations ``(rho12, rho13, rho23)``.
    """
    name = "linear"

    def __init__(self, sigma=(1.0, 1.0, 1.0), rho=(0.5, 0.2, 0.3)):
        super().__init__(3, 1)
        self.sigma = tuple(float(s) for s in sigma)
        self.rho = tuple(float(r) for r in rho)
        if len(self.sigma) != 3 or len(self.rho) != 3:
            raise ParameterError("linear model needs 3 sigma and 3 rho")
        if min(self.sigma) <= 0:
            raise ParameterError("sigma must be > 0")

    @property
    def correlation(self):
        r12, r13, r23 = self.rho
        return np.array([[1.0, r12, r13],
                         [r12, 1.0, r23],
                         [r13, r23, 1.0]])

    @property
    def covariance(self):
        s = np.array(self.sigma)
        return self.correlation * np.outer(s, s)

    def _evaluate(self, x):
        return x.sum(axis=1)

    def structure(self):
        copula = CopulaSpec("gaussian", (1, 2, 3), self.correlation)
        margins = {i+1: Normal(0.0, s) for i, s in enumerate(self.sigma)}
        block = DependentBlock("gaussian", (1, 2, 3), margins=margins,
                               copula=copula)
        return BlockStructure(3, blocks=[block])

    def to_dict(self):
        data = super().to_dict()
        data["sigma"] = list(self.sigma)
        data["rho"] = list(self.rho)
        return data


class Portfolio(Model):
    """
    ``M(x) = x1 x2 + x3 x4``, with ``(X1, X2)`` Gaussian and ``(X3, X4)``
    Student t with ``nu > 4`` degrees of freedom, independent pairs.
    """
    name = "portfolio"

    def __init__(self, sigma=(1.0, 1.0, 1.0, 1.0), rho=(0.5, 0.3), nu=5.0):
        super().__init__(4, 1)
        self.sigma = tuple(float(s) for s in sigma)
        self.rho = tuple(float(r) for r in rho)
        self.nu = float(nu)
        if len(self.sigma) != 4 or len(self.rho) != 2:
            raise ParameterError("portfolio model needs 4 sigma and "
                                 "(rho12, rho34)")
        if min(self.sigma) <= 0:
            raise ParameterError("sigma must be > 0")
        if not self.nu > 4:
            raise ParameterError("portfolio model requires nu > 4 "
                                 "(finite fourth moments); got %g" %
                                 self.nu)

    def _evaluate(self, x):
        return x[:, 0] * x[:, 1] + x[:, 2] * x[:, 3]

    def structure(self):
        s1, s2, s3, s4 = self.sigma
        r12, r34 = self.rho
        gauss = DependentBlock(
            "gaussian", (1, 2),
            margins={1: Normal(0.0, s1), 2: Normal(0.0, s2)},
            copula=CopulaSpec("gaussian", (1, 2),
                              [[1.0, r12], [r12, 1.0]]))
        student = DependentBlock(
            "student", (3, 4),
            margins={3: StudentT(self.nu, 0.0, s3),
                     4: StudentT(self.nu, 0.0, s4)},
            copula=CopulaSpec("student", (3, 4),
                              [[1.0, r34], [r34, 1.0]], nu=self.nu))
        return BlockStructure(4, blocks=[gauss, student])

    def to_dict(self):
        data = super().to_dict()
        data.update(sigma=list(self.sigma), rho=list(self.rho), nu=self.nu)
        return data


GSOBOL_A = np.array([[10.0] * 10, [20.0] * 10, [50.0] * 10, [60.0] * 10])
GSOBOL_RHO = (0.0, 0.01, 0.85)


def gsobol_factor_bounds(A):
    """
    Bounds ``[A/(1+A), (2+A)/(1+A)]`` of the factors
    ``(|4x - 2| + A)/(1 + A)`` for ``x`` in [0, 1].
    """
    A = np.asarray(A, dtype=np.float64)
    return (A / (1.0 + A), (2.0 + A) / (1.0 + A))


class GSobol(Model):
    """
    Multivariate g-function

        M_i(x) = prod_j (|4 x_j - 2| + A[i, j]) / (1 + A[i, j])

    of 10 inputs.

    Parameters
    ----------
    A : 2D array_like, shape ``(N, 10)``, optional
    rho : (float, float, float), optional
        Copula correlations ``(rho12, rho13, rho23)`` of ``x1..x3``.
    """
    name = "gsobol"

    def __init__(self, A=None, rho=GSOBOL_RHO):
        A = GSOBOL_A if A is None else np.asarray(A, dtype=np.float64)
        if A.ndim == 1:
            if A.size % 10 != 0:
                raise ParameterError("A must have 10 columns")
            A = A.reshape(-1, 10)
        if A.ndim != 2 or A.shape[1] != 10:
            raise ParameterError("A must have shape (N, 10)")
        if np.any(A < 0):
            raise ParameterError("A must be >= 0")
        super().__init__(10, A.shape[0])
        self.A = A
        self.rho = tuple(float(r) for r in rho)

    def _evaluate(self, x):
        g = np.abs(4.0 * x - 2.0)
        factors = ((g[:, np.newaxis, :] + self.A[np.newaxis, :, :]) /
                   (1.0 + self.A[np.newaxis, :, :]))
        return np.prod(factors, axis=2)

    def structure(self):
        r12, r13, r23 = self.rho
        R = [[1.0, r12, r13], [r12, 1.0, r23], [r13, r23, 1.0]]
        gauss = DependentBlock(
            "gaussian", (1, 2, 3),
            margins={i: Uniform(0.0, 1.0) for i in (1, 2, 3)},
            copula=CopulaSpec("gaussian", (1, 2, 3), R))
        simplex = DependentBlock("simplex", (9, 10))
        independent = {i: Uniform(0.0, 1.0) for i in range(4, 9)}
        return BlockStructure(10, independent=independent,
                              blocks=[gauss, simplex])

    def to_dict(self):
        data = super().to_dict()
        data.update(A=self.A.tolist(), rho=list(self.rho))
        return data


class ExpressionModel(Model):
    """
    Model whose outputs are given as expressions over ``x1, ..., xd``.

    Parameters
    ----------
    expressions : list[str]
        One expression per output.
    dim : int, optional
        Number of inputs; default the largest referenced index.
    """
    name = "expression"

    def __init__(self, expressions, dim=None):
        if isinstance(expressions, str):
            expressions = [expressions]
        if not expressions:
            raise ParameterError("no model expressions")
        trees = [parse_expression(e, dim=dim or None) for e in expressions]
        used = set()
        for tree in trees:
            used |= tree.variables()
        if not dim:
            dim = max(used) if used else 1
        super().__init__(dim, len(trees))
        self.expressions = list(expressions)
        self.trees = trees
        logger.debug("Parsed %d model expressions over %d inputs" %
                     (len(trees), dim))

    def _evaluate(self, x):
        return np.column_stack([tree.evaluate(x) for tree in self.trees])

    def to_dict(self):
        data = super().to_dict()
        data["expressions"] = [pretty(t) for t in self.trees]
        return data


MODELS = OrderedDict([
    ("linear", LinearGaussian),
    ("portfolio", Portfolio),
    ("gsobol", GSobol),
])


def make_model(name, **params):
    """Create a built-in model by name."""
    try:
        cls = MODELS[name]
    except KeyError:
        raise ParameterError("unknown model: %s" % name)
    return cls(**params)
