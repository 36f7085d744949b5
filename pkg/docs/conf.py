# -*- coding: utf-8 -*-
#
# Sphinx configuration of the DepGSA documentation.
#

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

import depgsa  # noqa: E402


# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
]
napoleon_numpy_docstring = True
napoleon_google_docstring = False

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "guide"

project = depgsa.__pkgname__
copyright = depgsa.__copyright__.replace("Copyright (c) ", "")
version = depgsa.__version__
release = depgsa.__version__

exclude_patterns = ["_build", "examples"]
pygments_style = "sphinx"


# -- Options for HTML output -------------------------------------------------

html_theme = "default"
html_static_path = []
htmlhelp_basename = "depgsadoc"
