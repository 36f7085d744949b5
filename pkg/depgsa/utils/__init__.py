# Copyright (c) 2023-2024 DepGSA developers
# MIT License

from .logging import setup_logging  # noqa: F401
