# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Reading and writing of the result files.

* dataframe_to_csv / csv_to_dataframe:
  CSV tables with ``#`` header comments; the floats keep 17 significant
  digits, so they are read back unchanged.
* json_dump / json_load:
  JSON documents, NumPy values included.
"""

import os
import json
import logging
from datetime import datetime

import numpy as np
import pandas as pd


logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def _prepare_output(outfile, clobber):
    """
    Make sure ``outfile`` can be written: create its directory, and
    delete the old file when ``clobber`` is set.

    Raises
    ------
    OSError :
        The file exists and ``clobber`` is ``False``.
    """
    outdir = os.path.dirname(outfile)
    if outdir and not os.path.isdir(outdir):
        os.makedirs(outdir, exist_ok=True)
        logger.info("Created output directory: %s" % outdir)
    if os.path.exists(outfile):
        if not clobber:
            raise OSError("Output file exists: %s" % outfile)
        os.remove(outfile)
        logger.warning("Removed existing file: %s" % outfile)


def dataframe_to_csv(df, outfile, comment=None, clobber=False,
                     float_format=CSV_FLOAT_FORMAT):
    """
    Write the table to a CSV file, under a header of ``#`` comments.

    Parameters
    ----------
    df : `~pandas.DataFrame`
    outfile : str
    comment : list[str], optional
        Header lines, without the leading ``#``; the default records the
        writer and the UTC time.
    clobber : bool, optional
        Replace an existing file.
    float_format : str, optional
    """
    if not isinstance(df, pd.DataFrame):
        raise TypeError("expected a pandas DataFrame, got %s" %
                        type(df).__name__)
    _prepare_output(outfile, clobber)
    if comment is None:
        comment = ["by %s" % __name__,
                   "at %sZ" % datetime.utcnow().isoformat()]
    with open(outfile, "w") as fh:
        for line in comment:
            fh.write("# %s\n" % line.strip())
        df.to_csv(fh, index=False, float_format=float_format)
    logger.info("Wrote CSV table (%d rows): %s" % (len(df), outfile))


def csv_to_dataframe(infile):
    """
    Read a file written by `dataframe_to_csv()`.

    Returns
    -------
    df : `~pandas.DataFrame`
    comments : list[str]
        The header comments, without the ``#``.
    """
    comments = []
    with open(infile) as fh:
        for line in map(str.strip, fh):
            if not line:
                continue
            if not line.startswith("#"):
                break
            comments.append(line.lstrip("# "))
    return (pd.read_csv(infile, comment="#"), comments)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError("Object of type %s is not JSON serializable" %
                    type(obj).__name__)


def json_dump(obj, outfile, clobber=False):
    """Write ``obj`` as indented JSON; NumPy arrays become lists."""
    _prepare_output(outfile, clobber)
    with open(outfile, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")
    logger.info("Wrote JSON data to file: %s" % outfile)


def json_load(infile):
    with open(infile) as fh:
        data = json.load(fh)
    logger.info("Loaded JSON data from file: %s" % infile)
    return data
