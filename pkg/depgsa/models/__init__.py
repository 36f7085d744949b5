# Copyright (c) 2023-2024 DepGSA developers
# MIT License

from .expression import parse_expression, pretty  # noqa: F401
from .builtin import (Model, LinearGaussian, Portfolio,  # noqa: F401
                      GSobol, ExpressionModel, make_model)
from .analytic import analytic_indices, NOT_AVAILABLE  # noqa: F401
