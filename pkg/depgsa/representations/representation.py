# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Equivalent representations of a model.

For a label ``(w_2, ..., w_K)`` (one permutation per dependent block),
the representation

    g(X_pi1, X_lead_2, Z_2, ..., X_lead_K, Z_K)
        = M(X_pi1, X_lead_2, r_2(X_lead_2, Z_2), ..., )

only takes independent inputs.  Its inputs are laid out as the columns
of a panel of U(0, 1) values:

* ``x<i>`` for the independent inputs ``i`` in increasing order;
* per block, ``x<lead>`` and then ``z<w>`` for ``w = w_2, ..., w_d``;
* the auxiliary uniforms of all the blocks, at the end.
"""

import logging

import numpy as np

from ..errors import DomainError, ParameterError
from ..sampling.panels import map_to_inputs
from ..utils.stats import map_row_chunks


logger = logging.getLogger(__name__)


class Column:
    """
    A column of the uniform panel.

    Attributes
    ----------
    name : str
    kind : str
        ``"independent"``, ``"lead"``, ``"latent"`` or ``"aux"``.
    block : int or None
        Position of the dependent block (``None`` for independent inputs).
    index : int or None
        Input index driven by the column.
    position : int
        Position in the block permutation of the component the column
        drives (0 for the lead).
    """

    def __init__(self, name, kind, block=None, index=None, position=0):
        self.name = name
        self.kind = kind
        self.block = block
        self.index = index
        self.position = position

    def __repr__(self):
        return "Column(%s)" % self.name


def build_layout(structure, dms):
    """
    Lay out the panel columns of the representation built from the
    given block DMs.
    """
    columns = [Column("x%d" % i, "independent", index=i)
               for i in structure.independent_indices]
    for k, dm in enumerate(dms):
        columns.append(Column("x%d" % dm.lead, "lead", block=k,
                              index=dm.lead, position=0))
        for pos, w in enumerate(dm.order, start=1):
            columns.append(Column("z%d" % w, "latent", block=k, index=w,
                                  position=pos))
    for k, dm in enumerate(dms):
        for name, pos in dm.aux:
            columns.append(Column(name, "aux", block=k,
                                  index=dm.components[pos], position=pos))
    return columns


class Representation:
    """
    An equivalent representation of the model.

    Parameters
    ----------
    structure : `~depgsa.representations.structure.BlockStructure`
    model : `~depgsa.models.builtin.Model`
    label : tuple[tuple[int]]
        Permutation of every dependent block.
    dms : list[`~depgsa.depmodel.base.DependencyModel`]
        DMs of the blocks built for ``label``.
    """

    def __init__(self, structure, model, label, dms):
        self.structure = structure
        self.model = model
        self.label = tuple(tuple(p) for p in label)
        self.dms = list(dms)
        self.columns = build_layout(structure, self.dms)
        self._names = [c.name for c in self.columns]

    @property
    def width(self):
        """Number of independent uniforms consumed."""
        return len(self.columns)

    @property
    def names(self):
        return list(self._names)

    def column(self, name):
        return self._names.index(name)

    def frozen_mask(self, u, width=None):
        """
        Columns frozen when conditioning on the inputs ``u``.

        The inputs of ``u`` in every dependent block must form a prefix
        of the block permutation; the lead column, the latents of the
        prefix tail and the auxiliary uniforms of the prefix components
        are then frozen.

        Raises
        ------
        DomainError :
            ``u`` is not served by this representation.
        """
        width = self.width if width is None else width
        if width < self.width:
            raise ParameterError("panel of %d columns is narrower than "
                                 "the representation (%d)" %
                                 (width, self.width))
        u = set(int(i) for i in u)
        mask = np.zeros(width, dtype=bool)
        prefix_lengths = []
        for k, dm in enumerate(self.dms):
            part = u & set(dm.components)
            p = len(part)
            if set(dm.components[:p]) != part:
                raise DomainError("inputs %s are not a prefix of the "
                                  "permutation %s" %
                                  (sorted(part), dm.components))
            prefix_lengths.append(p)
        for c, col in enumerate(self.columns):
            if col.kind == "independent":
                mask[c] = col.index in u
            else:
                mask[c] = col.position < prefix_lengths[col.block]
        return mask

    def inputs(self, U):
        """
        Map a panel of uniforms to the model inputs.

        Parameters
        ----------
        U : 2D `~numpy.ndarray`, shape ``(n, width)``
            Values in (0, 1); extra trailing columns are ignored.

        Returns
        -------
        x : 2D `~numpy.ndarray`, shape ``(n, d)``
            Inputs in increasing index order.
        """
        t = map_to_inputs(U, self)
        n = t.leads.shape[0]
        x = np.empty((n, self.structure.d))
        for c, i in enumerate(self.structure.independent_indices):
            x[:, i-1] = t.independent[:, c]
        for k, dm in enumerate(self.dms):
            rest = dm.evaluate(t.leads[:, k], t.latents[k], t.aux[k])
            x[:, dm.lead-1] = t.leads[:, k]
            for i, w in enumerate(dm.order):
                x[:, w-1] = rest[:, i]
        return x

    def evaluate(self, U, threads=1):
        """
        Evaluate the representation on a panel of uniforms.

        Returns
        -------
        y : 2D `~numpy.ndarray`, shape ``(n, N)``
        """
        U = np.asarray(U, dtype=np.float64)

        def _rows(chunk, start):
            return self.model.evaluate(self.inputs(chunk), offset=start)

        return map_row_chunks(_rows, [U], threads=threads)

    def __repr__(self):
        return "Representation(%s)" % (self.label,)


def build_representation(structure, model, label):
    """
    Build the representation of ``model`` for the label ``label``.

    Parameters
    ----------
    structure : `~depgsa.representations.structure.BlockStructure`
    model : `~depgsa.models.builtin.Model`
    label : tuple[tuple[int]]
        One permutation per dependent block of ``structure``.
    """
    label = tuple(tuple(int(i) for i in p) for p in label)
    if len(label) != len(structure.blocks):
        raise ParameterError("label has %d permutations for %d blocks" %
                             (len(label), len(structure.blocks)))
    if model.dim != structure.d:
        raise ParameterError("model takes %d inputs, structure has %d" %
                             (model.dim, structure.d))
    dms = [block.make_dm(perm)
           for block, perm in zip(structure.blocks, label)]
    rep = Representation(structure, model, label, dms)
    logger.debug("Built representation %s (%d columns)" %
                 (label, rep.width))
    return rep


def build_representations(structure, model, labels):
    """
    Build the representations of the given labels.

    Returns
    -------
    reps : list[`Representation`]
    width : int
        Panel width shared by all of them.
    """
    reps = [build_representation(structure, model, label)
            for label in labels]
    width = max([r.width for r in reps] or [structure.d])
    logger.info("Built %d representations; panel width %d" %
                (len(reps), width))
    return (reps, width)
