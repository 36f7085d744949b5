__pkgname__ = "DepGSA"
__version__ = "0.3.0"
__date__ = "2024-05-21"
__author__ = "DepGSA developers"
__author_email__ = "depgsa@users.noreply.github.com"
__license__ = "MIT"
__copyright__ = "Copyright (c) 2023-2024 DepGSA developers"
__url__ = "https://github.com/depgsa/depgsa"
__description__ = ("Global Sensitivity Analysis for Models "
                   "with Dependent Inputs")


import logging


# Set a default logging handler to avoid the "No handler found" warning
logging.getLogger(__name__).addHandler(logging.NullHandler())
