# Copyright (c) 2023-2024 DepGSA developers
# MIT License

from .base import (LatentLaw, DependencyModel,  # noqa: F401
                   dm_condition_prefix)
from .copulas import CopulaSpec, gaussian_dm, student_dm  # noqa: F401
from .simplex import simplex_dm, simplex_pair_dms  # noqa: F401
from .transform import transform_dm, abs_symmetric_dm  # noqa: F401
