# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Routing of the subsets of inputs to the representations.

A subset ``u`` is served by a representation whose permutation of every
dependent block ``k`` has ``u ∩ pi_k`` as a prefix; the inputs frozen
by the pick-freeze scheme are then the independent inputs of ``u``, and
per block the lead input together with the latents of the prefix tail.

Routing a list of subsets jointly reuses the representations across the
subsets: a block not touched by a subset is a wildcard that any already
chosen permutation satisfies.
"""

import logging
from collections import OrderedDict

from ..errors import DomainError


logger = logging.getLogger(__name__)


def normalize_subset(u):
    """Subset as a sorted tuple of distinct input indices."""
    u = tuple(sorted(set(int(i) for i in u)))
    if not u:
        raise DomainError("empty subset of inputs")
    return u


def subset_name(u):
    """Name of a subset as used in the reports, e.g., ``"1:2"``."""
    return ":".join(str(i) for i in u)


class Route:
    """
    Representation serving one subset.

    Attributes
    ----------
    subset : tuple[int]
    label : tuple[tuple[int]]
        The permutation of every dependent block.
    positions : tuple[int]
        Positions of the permutations in the selected family ``P_k``.
    prefix_lengths : tuple[int]
        ``p_k = |u ∩ pi_k|`` of every block.
    independent : tuple[int]
        ``u ∩ pi_1``.
    """

    def __init__(self, subset, label, positions, prefix_lengths,
                 independent):
        self.subset = subset
        self.label = tuple(label)
        self.positions = tuple(positions)
        self.prefix_lengths = tuple(prefix_lengths)
        self.independent = tuple(independent)

    @property
    def conditioning(self):
        """
        Inputs fixed in the representation: ``x<i>`` for the independent
        inputs and the block leads, ``z<w>`` for the latents.
        """
        names = ["x%d" % i for i in self.independent]
        for perm, p in zip(self.label, self.prefix_lengths):
            if p == 0:
                continue
            names.append("x%d" % perm[0])
            names.extend("z%d" % w for w in perm[1:p])
        return names

    def to_dict(self):
        return OrderedDict([
            ("subset", list(self.subset)),
            ("label", [list(p) for p in self.label]),
            ("prefix_lengths", list(self.prefix_lengths)),
            ("conditioning", self.conditioning),
        ])

    def __repr__(self):
        return "Route(%s -> %s)" % (subset_name(self.subset), self.label)


def _split(plan, u):
    in_blocks = set()
    parts = []
    for indices in plan.blocks:
        parts.append(frozenset(u) & frozenset(indices))
        in_blocks.update(indices)
    independent = tuple(i for i in u if i not in in_blocks)
    return (independent, parts)


def _candidates(plan, parts):
    """Matching positions in ``P_k`` per block; ``None`` is a wildcard."""
    cands = []
    for k, part in enumerate(parts):
        if not part:
            cands.append(None)
            continue
        matches = plan.matches(k, part)
        if not matches:
            raise DomainError("no selected permutation of block %s has "
                              "%s as a prefix" %
                              (plan.blocks[k], sorted(part)))
        cands.append(matches)
    return cands


def _make_route(plan, u, positions, independent, parts):
    label = tuple(plan.permutations[k][pos]
                  for k, pos in enumerate(positions))
    return Route(u, label, positions, [len(p) for p in parts],
                 independent)


def route_subset(plan, u):
    """
    Route one subset: per block the first permutation of ``P_k`` having
    ``u ∩ pi_k`` as a prefix, and the first one for untouched blocks.

    Parameters
    ----------
    plan : `~depgsa.representations.permutations.PermutationPlan`
    u : iterable of int

    Returns
    -------
    route : `Route`
    """
    u = normalize_subset(u)
    independent, parts = _split(plan, u)
    cands = _candidates(plan, parts)
    positions = [0 if c is None else c[0] for c in cands]
    return _make_route(plan, u, positions, independent, parts)


class RoutingTable:
    """
    Joint routing of a list of subsets.

    Attributes
    ----------
    labels : list[tuple[tuple[int]]]
        The representations to build, in the order they were opened.
    routes : OrderedDict{tuple[int]: `Route`}
    assignment : OrderedDict{tuple[int]: int}
        Position in ``labels`` of the representation serving each subset.
    replicated : OrderedDict{tuple[int]: list[int]}
        Subsets that more than one built representation could serve,
        with the positions of those representations.
    """

    def __init__(self, labels, routes, assignment, replicated):
        self.labels = labels
        self.routes = routes
        self.assignment = assignment
        self.replicated = replicated

    def subsets_of(self, position):
        """Subsets served by the representation at ``position``."""
        return [u for u, pos in self.assignment.items() if pos == position]

    def to_dict(self):
        return OrderedDict([
            ("labels", [[list(p) for p in label] for label in self.labels]),
            ("routes", OrderedDict(
                (subset_name(u), OrderedDict([
                    ("representation", self.assignment[u]),
                    ("conditioning", route.conditioning),
                ])) for u, route in self.routes.items())),
            ("replicated", OrderedDict(
                (subset_name(u), pos)
                for u, pos in self.replicated.items())),
        ])


def route_subsets(plan, subsets):
    """
    Route the subsets jointly, opening as few representations as the
    greedy first-fit allows.

    Every subset joins the first open label compatible with it: a label
    is compatible when, for each block touched by the subset, the label
    either holds one of the matching permutations or is still free in
    that block (then it takes the first match).  Blocks left free at the
    end take the first permutation of ``P_k``.

    Returns
    -------
    table : `RoutingTable`
    """
    nblocks = len(plan.blocks)
    open_labels = []
    pending = []
    for u in subsets:
        u = normalize_subset(u)
        if any(u == v for v, _, _, _ in pending):
            continue
        independent, parts = _split(plan, u)
        cands = _candidates(plan, parts)
        chosen = None
        for pos, label in enumerate(open_labels):
            if all(c is None or label[k] is None or label[k] in c
                   for k, c in enumerate(cands)):
                chosen = pos
                break
        if chosen is None:
            open_labels.append([None] * nblocks)
            chosen = len(open_labels) - 1
        label = open_labels[chosen]
        for k, c in enumerate(cands):
            if c is not None and label[k] is None:
                label[k] = c[0]
        pending.append((u, independent, parts, chosen))

    resolved = [tuple(0 if pos is None else pos for pos in label)
                for label in open_labels]
    labels = [tuple(plan.permutations[k][pos]
                    for k, pos in enumerate(positions))
              for positions in resolved]
    routes = OrderedDict()
    assignment = OrderedDict()
    replicated = OrderedDict()
    for u, independent, parts, chosen in pending:
        routes[u] = _make_route(plan, u, resolved[chosen], independent,
                                parts)
        assignment[u] = chosen
        serving = [pos for pos, label in enumerate(labels)
                   if all(frozenset(perm[:len(part)]) == part
                          for perm, part in zip(label, parts))]
        if len(serving) > 1:
            replicated[u] = serving
    logger.info("Routed %d subsets to %d representations "
                "(R_min = %d)" % (len(routes), len(labels), plan.r_min))
    if replicated:
        logger.debug("%d subsets have replicated representations" %
                     len(replicated))
    return RoutingTable(labels, routes, assignment, replicated)
