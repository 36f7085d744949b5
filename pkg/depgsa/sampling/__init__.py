# Copyright (c) 2023-2024 DepGSA developers
# MIT License

from .panels import SamplePlan, generate_panel, map_to_inputs  # noqa: F401
from .sobol import sobol_joe_kuo  # noqa: F401
