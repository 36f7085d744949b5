# Copyright (c) 2023-2024 DepGSA developers
# MIT License

from .pickfreeze import (PickFreezeBatch,  # noqa: F401
                         RepresentationSamples, pick_freeze_evaluate)
from .estimators import (kernel_first_order, kernel_total,  # noqa: F401
                         estimate_sigma, total_only_estimator,
                         estimate_covariances, compute_indices,
                         estimate_indices, loewner_rank_check)
from .report import IndexReport  # noqa: F401
