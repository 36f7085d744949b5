# Copyright (c) 2023-2024 DepGSA developers
# MIT License

from .manager import ConfigManager, json_to_config, SCHEMA  # noqa: F401
from .checkers import check_configs  # noqa: F401
from .presets import load_preset, PRESET_SUBSETS  # noqa: F401
