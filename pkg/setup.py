#!/usr/bin/env python3
#
# Copyright (c) 2023-2024 DepGSA developers
# MIT License
#
# Install with ``pip install .``; the tests run with ``pytest`` (see
# ``setup.cfg`` for the markers).
#

import os
import sys

from setuptools import setup, find_packages

import depgsa as pkg


HERE = os.path.dirname(os.path.abspath(__file__))

if sys.version_info < (3, 6):
    sys.exit("%s needs Python 3.6 or later" % pkg.__pkgname__)

with open(os.path.join(HERE, "README.rst")) as fh:
    long_description = fh.read()

with open(os.path.join(HERE, "requirements.txt")) as fh:
    requirements = [line.strip() for line in fh
                    if line.strip() and not line.startswith("#")]


setup(
    name=pkg.__pkgname__,
    version=pkg.__version__,
    description=pkg.__description__,
    long_description=long_description,
    author=pkg.__author__,
    author_email=pkg.__author_email__,
    url=pkg.__url__,
    license=pkg.__license__,
    classifiers=[
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: POSIX :: Linux",
        "Programming Language :: Python :: 3 :: Only",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    packages=find_packages(exclude=["docs", "tests"]),
    package_data={
        "depgsa.configs": ["config.spec"],
        "depgsa.sampling": ["data/*.txt"],
    },
    zip_safe=False,
    scripts=["bin/depgsa"],
    install_requires=requirements,
    tests_require=["pytest"],
)
