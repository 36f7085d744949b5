# Copyright (c) 2023-2024 DepGSA developers
# MIT License

from .permutations import (j0, select_permutations,  # noqa: F401
                           r_min, r_p, PermutationPlan)
from .structure import DependentBlock, BlockStructure  # noqa: F401
from .routing import route_subset, route_subsets  # noqa: F401
from .representation import (build_representation,  # noqa: F401
                             build_representations)
