# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Report of the estimated indices, exported as a table (CSV) or JSON.
"""

import logging
from collections import OrderedDict

import numpy as np
import pandas as pd

from ..utils.io import dataframe_to_csv, json_dump


logger = logging.getLogger(__name__)

CSV_COLUMNS = ["subset", "index_family", "order", "estimate", "stderr",
               "ci_lo", "ci_hi", "display", "m", "M", "representation",
               "flags"]


def _nan_to_none(x):
    return None if (x is None or np.isnan(x)) else float(x)


def _label_name(label):
    if not label:
        return ""
    return "|".join("".join("%d," % i for i in p).rstrip(",")
                    for p in label)


class IndexReport:
    """
    Indices of all the subsets of a run.

    Parameters
    ----------
    entries : list[`~depgsa.sensitivity.estimators.IndexEntry`]
    loewner : list[OrderedDict], optional
        Results of the pairwise Loewner comparisons.
    meta : dict, optional
        Run information written in the headers.
    """

    def __init__(self, entries, loewner=None, meta=None):
        self.entries = list(entries)
        self.loewner = list(loewner or [])
        self.meta = OrderedDict(meta or {})

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, subset):
        subset = tuple(sorted(subset))
        for entry in self.entries:
            if entry.subset == subset:
                return entry
        raise KeyError(subset)

    def to_dataframe(self):
        rows = []
        for e in self.entries:
            for (family, order), value in e.values.items():
                lo, hi = e.ci(family, order)
                rows.append([
                    ":".join(str(i) for i in e.subset), family, order,
                    value, e.stderr[(family, order)], lo, hi,
                    e.display(family, order), e.m, e.M,
                    _label_name(e.label), ";".join(e.flags),
                ])
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_dict(self):
        data = OrderedDict(self.meta)
        data["indices"] = []
        for e in self.entries:
            values = []
            for (family, order), value in e.values.items():
                lo, hi = e.ci(family, order)
                values.append(OrderedDict([
                    ("index_family", family),
                    ("order", order),
                    ("estimate", value),
                    ("stderr", _nan_to_none(e.stderr[(family, order)])),
                    ("ci", [_nan_to_none(lo), _nan_to_none(hi)]),
                    ("display", e.display(family, order)),
                ]))
            data["indices"].append(OrderedDict([
                ("subset", list(e.subset)),
                ("m", e.m),
                ("M", e.M),
                ("N", e.N),
                ("representation", [list(p) for p in (e.label or ())]),
                ("flags", list(e.flags)),
                ("values", values),
            ]))
        data["loewner"] = self.loewner
        return data

    def write_csv(self, outfile, clobber=False):
        comment = ["%s: %s" % (k, v) for k, v in self.meta.items()
                   if not isinstance(v, (dict, list))]
        dataframe_to_csv(self.to_dataframe(), outfile, comment=comment,
                         clobber=clobber)

    def write_json(self, outfile, clobber=False):
        json_dump(self.to_dict(), outfile, clobber=clobber)

    def summary(self, family="dGSI1"):
        """Lines of ``subset  first  total`` for the log."""
        lines = []
        for e in self.entries:
            name = ":".join(str(i) for i in e.subset)
            if (family, "first") not in e.values:
                continue
            lines.append("%-10s %8.4f %8.4f" % (
                name, e.get(family, "first"), e.get(family, "total")))
        return lines
