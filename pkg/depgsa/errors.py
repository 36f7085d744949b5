# Copyright (c) 2023-2024 DepGSA developers
# MIT license

"""
Custom errors/exceptions.
"""


class ConfigError(Exception):
    """Could not parse or validate the run configurations"""
    pass


class ParameterError(ValueError):
    """Invalid parameters of a margin, copula or model"""
    pass


class DomainError(ValueError):
    """Argument outside the domain of the operation"""
    pass


class DependencyModelError(Exception):
    """Could not construct a dependency model"""
    pass


class InfeasibleError(Exception):
    """
    Rejection sampling exhausted its attempt budget.

    The measured acceptance rate is kept in the ``rate`` attribute.
    """
    def __init__(self, message, rate=None, attempts=None):
        super().__init__(message)
        self.rate = rate
        self.attempts = attempts


class FittingError(Exception):
    """
    Quantile regression failed to converge, or the fitted curves miss
    their levels on the fitted sample.

    The ``diagnostics`` attribute holds a dict: the level, the number of
    iterations and the last objective values, or the coverage of every
    level with its band.
    """
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InvariantError(RuntimeError):
    """Internal invariant violated"""
    pass


class DegenerateVarianceError(Exception):
    """The output covariance is (numerically) zero; indices are undefined"""
    pass


class ModelEvaluationError(Exception):
    """
    Model evaluation produced a non-finite value or hit a domain error.

    ``row`` is the index of the first offending sample row and
    ``position`` (expression models only) the column of the failing
    sub-expression in its source text.
    """
    def __init__(self, message, row=None, position=None):
        super().__init__(message)
        self.row = row
        self.position = position


class ExpressionError(Exception):
    """
    Syntax error, unknown identifier or arity error in a model expression.
    """
    def __init__(self, message, line=1, column=None):
        if column is not None:
            message = "%s (line %d, column %d)" % (message, line, column)
        super().__init__(message)
        self.line = line
        self.column = column
