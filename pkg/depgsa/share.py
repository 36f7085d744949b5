# Copyright (c) 2023-2024 DepGSA developers
# MIT license

"""
Process-wide objects of ``depgsa``.
"""

from .configs.manager import ConfigManager


# Configurations used by the command line when none are passed to
# ``depgsa.cli.main()``; the user file is read into it at start-up.
CONFIGS = ConfigManager()
