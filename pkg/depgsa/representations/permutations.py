# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Selection of the permutations of the dependent blocks.

For a block of ``d`` inputs, the selected permutations must contain every
nonempty subset of the block as a prefix ``{w_1, ..., w_p}``, so that the
sensitivity indices of any subset can be computed with one of them.  The
minimum number of such permutations is ``C(d, j0)`` with ``j0 = d/2``
(``d`` even) or ``(d+1)/2`` (``d`` odd).

The construction maintains the set ``A`` of the ``j0``-subsets not yet
used as a prefix, the family ``B`` of used prefixes and the family ``E``
of used suffixes, and repeatedly picks a permutation whose prefixes of
lengths ``e0..j0`` are not in ``B``, whose suffixes of lengths ``e0..j0``
are not in ``E``, and whose ``j0``-prefix is still in ``A``:

    A <- A - {w_1..w_j0}
    B <- B + {{w_1..w_j} : j = e0, ..., d-e0+1}
    E <- E + {{w_j..w_d} : j = j0+1, ..., d-e0+1}
    i <- i + 1;  e0 <- e0 + 1 if C(d, e0) < i <= C(d, e0+1)

The permutations are searched in lexicographic order, depth first, with
backtracking over the previous picks when no permutation qualifies.  When
that search runs out of nodes (from about d = 11 on), it is run again
with the chains of the symmetric chain decomposition, ordered by the size
of their smallest member, tried first at every pick: the i-th chain
always satisfies the three conditions at the i-th pick, so the guided
search never backtracks.
"""

import logging
import itertools
from collections import OrderedDict
from scipy import special

from ..errors import DomainError, InvariantError


logger = logging.getLogger(__name__)

# Budget of nodes of the lexicographic search
SEARCH_BUDGET = 200000


def comb(n, k):
    """Binomial coefficient as an exact integer."""
    return int(special.comb(n, k, exact=True))


def j0(d):
    """
    Prefix length of the minimal permutation family: ``d/2`` for even
    ``d`` and ``(d+1)/2`` for odd ``d``.
    """
    d = int(d)
    if d < 2:
        raise DomainError("block size must be >= 2 (got %d)" % d)
    return d // 2 if d % 2 == 0 else (d + 1) // 2


def prefix_family(perms):
    """All the prefixes (of lengths 1..d) of the given permutations."""
    family = set()
    for perm in perms:
        for p in range(1, len(perm) + 1):
            family.add(frozenset(perm[:p]))
    return family


def _all_subsets(d):
    items = range(1, d + 1)
    return {frozenset(c) for p in range(1, d + 1)
            for c in itertools.combinations(items, p)}


class _Search:
    """
    Depth-first search over the sequences of picks.

    Parameters
    ----------
    d : int
        Block size.
    guide : list[tuple[int]], optional
        Permutations tried first: ``guide[i-1]`` at the i-th pick.
    """

    def __init__(self, d, guide=None):
        self.d = d
        self.j0 = j0(d)
        self.target = comb(d, self.j0)
        self.guide = guide
        self.nodes = 0

    def admissible(self, perm, A, B, E, e0):
        """Whether ``perm`` satisfies the three conditions of a pick."""
        d, jz = self.d, self.j0
        if frozenset(perm[:jz]) not in A:
            return False
        for k in range(e0, jz + 1):
            if frozenset(perm[:k]) in B or frozenset(perm[d-k:]) in E:
                return False
        return True

    def guided(self, A, B, E, e0, i):
        """
        The guide permutation of the i-th pick when admissible, then the
        lexicographic candidates.
        """
        if self.guide and i <= len(self.guide):
            perm = self.guide[i-1]
            self.nodes += 1
            if self.admissible(perm, A, B, E, e0):
                yield perm
        for perm in self.candidates(A, B, E, e0):
            if not self.guide or i > len(self.guide) or \
                    perm != self.guide[i-1]:
                yield perm

    def candidates(self, A, B, E, e0):
        """
        Permutations satisfying the three conditions, in lexicographic
        order; built element by element with the prefix (and, through
        the complement, the suffix) tests done as early as possible.
        """
        d, jz = self.d, self.j0
        last_checked = max(jz, d - e0)
        items = tuple(range(1, d + 1))

        def extend(prefix, used):
            self.nodes += 1
            if self.guide is None and self.nodes > SEARCH_BUDGET:
                raise _BudgetExceeded()
            n = len(prefix)
            if n >= last_checked:
                rest = tuple(i for i in items if i not in used)
                yield prefix + rest
                return
            for i in items:
                if i in used:
                    continue
                new = prefix + (i,)
                s = used | {i}
                k = n + 1
                if e0 <= k <= jz and s in B:
                    continue
                if k == jz and s not in A:
                    continue
                # suffix of length d-k is the complement of the prefix
                if e0 <= d - k <= jz:
                    if frozenset(items) - s in E:
                        continue
                yield from extend(new, s)

        yield from extend((), frozenset())

    def _advance(self, state, perm):
        """Update ``(A, B, E, e0, i)`` after picking ``perm``."""
        d, jz = self.d, self.j0
        A, B, E, e0, i = state
        A = A - {frozenset(perm[:jz])}
        B = B | {frozenset(perm[:j]) for j in range(e0, d - e0 + 2)}
        E = E | {frozenset(perm[j-1:]) for j in range(jz + 1, d - e0 + 2)}
        i += 1
        if comb(d, e0) < i <= comb(d, e0 + 1):
            e0 += 1
        return (A, B, E, e0, i)

    def run(self):
        d, jz = self.d, self.j0
        A0 = {frozenset(c)
              for c in itertools.combinations(range(1, d + 1), jz)}
        everything = _all_subsets(d)
        states = [(A0, frozenset(), frozenset(), 1, 1)]
        pending = [self.guided(A0, frozenset(), frozenset(), 1, 1)]
        picked = []
        while pending:
            perm = next(pending[-1], None)
            if perm is None:
                # backtrack
                pending.pop()
                states.pop()
                if picked:
                    picked.pop()
                continue
            state = self._advance(states[-1], perm)
            picked.append(perm)
            if not state[0]:
                if prefix_family(picked) == everything:
                    return list(picked)
                picked.pop()
                continue
            states.append(state)
            pending.append(self.guided(*state))
        raise InvariantError("permutation search exhausted (d=%d)" % d)


class _BudgetExceeded(Exception):
    pass


def symmetric_chain_permutations(d, by_rank=False):
    """
    Permutations from the symmetric chain decomposition of the subsets
    of ``{1..d}`` (bracket matching): each chain ``S, S+u_1, S+u_1+u_2,
    ...`` becomes the permutation listing ``S``, then ``u_1, u_2, ...``,
    then the remaining items.  There are ``C(d, floor(d/2))`` chains and
    every subset lies on one of them.

    With ``by_rank=True`` the chains are ordered by the size of ``S``
    (then lexicographically), the order of the guided search.
    """
    perms = []
    for mask in range(1 << d):
        bits = [(mask >> k) & 1 for k in range(d)]
        # 0 opens, 1 closes; unmatched 1s mean ``mask`` is not a start
        stack = []
        unmatched_ones = False
        matched = set()
        for k, bit in enumerate(bits):
            if bit == 0:
                stack.append(k)
            elif stack:
                matched.add(stack.pop())
                matched.add(k)
            else:
                unmatched_ones = True
        if unmatched_ones:
            continue
        members = [k + 1 for k in range(d) if bits[k]]
        free = [k + 1 for k in range(d) if not bits[k] and k not in matched]
        rest = [k + 1 for k in range(d) if not bits[k] and k in matched]
        perms.append((len(members), tuple(members + free + rest)))
    if by_rank:
        return [perm for _, perm in sorted(perms)]
    return sorted(perm for _, perm in perms)


def select_permutations(d):
    """
    Select the permutations of ``{1..d}`` whose prefixes cover every
    nonempty subset.

    Returns
    -------
    perms : list[tuple[int]]
        ``C(d, j0(d))`` permutations.

    Raises
    ------
    DomainError :
        ``d < 2``.
    InvariantError :
        The selected permutations miss a subset.
    """
    search = _Search(d)
    try:
        perms = search.run()
    except (_BudgetExceeded, InvariantError):
        logger.info("Lexicographic permutation search for d=%d stopped "
                    "after %d nodes; searching along the symmetric chains" %
                    (d, search.nodes))
        search = _Search(d, guide=symmetric_chain_permutations(d, True))
        perms = search.run()
    logger.debug("Selected %d permutations of %d items (%d search nodes)" %
                 (len(perms), d, search.nodes))
    if (len(perms) != search.target or
            prefix_family(perms) != _all_subsets(d)):
        raise InvariantError("selected permutations of %d items do not "
                             "cover all the subsets" % d)
    return perms


def r_min(dims):
    """
    Minimum number of representations: the product of ``C(d_k, j0_k)``
    over the dependent blocks.
    """
    r = 1
    for d in dims:
        r *= comb(d, j0(d))
    return r


def r_p(dims, caps):
    """
    Minimum number of representations when at most ``p_k`` inputs of
    block ``k`` are conditioned upon: ``max_k C(d_k, p_k)``.

    Raises
    ------
    DomainError :
        ``p_k`` outside ``[0, j0_k]``.
    """
    dims, caps = list(dims), list(caps)
    if len(dims) != len(caps):
        raise DomainError("need one cap per block")
    r = 1
    for d, p in zip(dims, caps):
        if not 0 <= p <= j0(d):
            raise DomainError("cap %d outside [0, %d] for a block of %d" %
                              (p, j0(d), d))
        r = max(r, comb(d, p))
    return r


class PermutationPlan:
    """
    Selected permutations of every dependent block, on the global input
    indices.

    Parameters
    ----------
    blocks : list[list[int]]
        Input indices of the dependent blocks.

    Attributes
    ----------
    permutations : list[list[tuple[int]]]
        ``P_k`` of every block, mapped onto its sorted indices.
    """

    def __init__(self, blocks):
        self.blocks = [tuple(sorted(b)) for b in blocks]
        self.permutations = []
        cache = {}
        for indices in self.blocks:
            d = len(indices)
            if d not in cache:
                cache[d] = select_permutations(d)
            self.permutations.append([tuple(indices[k-1] for k in perm)
                                      for perm in cache[d]])

    @property
    def dims(self):
        return [len(b) for b in self.blocks]

    @property
    def j0s(self):
        return [j0(d) for d in self.dims]

    @property
    def r_min(self):
        return r_min(self.dims)

    def prefixes(self, k):
        """The realized prefix family of block ``k``."""
        return prefix_family(self.permutations[k])

    def suffixes(self, k):
        """All the suffixes of the selected permutations of block ``k``."""
        family = set()
        for perm in self.permutations[k]:
            for p in range(len(perm)):
                family.add(frozenset(perm[p:]))
        return family

    def matches(self, k, part):
        """
        Positions in ``P_k`` of the permutations having ``part`` as a
        prefix.
        """
        part = frozenset(part)
        p = len(part)
        return [i for i, perm in enumerate(self.permutations[k])
                if frozenset(perm[:p]) == part]

    def labels(self):
        """Iterate over all the ``R_min`` labels."""
        return itertools.product(*self.permutations)

    def to_dict(self):
        data = OrderedDict()
        for k, (indices, perms) in enumerate(zip(self.blocks,
                                                 self.permutations)):
            data["block%d" % (k + 2)] = OrderedDict([
                ("indices", list(indices)),
                ("j0", j0(len(indices))),
                ("permutations", [list(p) for p in perms]),
            ])
        return data
