# Copyright (c) 2023-2024 DepGSA developers
# MIT License

import itertools

import numpy as np
import pytest
from scipy import special

from depgsa.errors import DomainError, ParameterError
from depgsa.margins import Uniform
from depgsa.representations import (BlockStructure, DependentBlock,
                                    PermutationPlan, build_representation,
                                    build_representations, j0, r_min, r_p,
                                    route_subset, route_subsets,
                                    select_permutations)
from depgsa.representations.permutations import (
    _Search, prefix_family, symmetric_chain_permutations)
from depgsa.representations.routing import subset_name


def _all_subsets(d):
    return {frozenset(c) for p in range(1, d + 1)
            for c in itertools.combinations(range(1, d + 1), p)}


def test_j0():
    assert [j0(d) for d in range(2, 9)] == [1, 2, 2, 3, 3, 4, 4]
    with pytest.raises(DomainError):
        j0(1)


@pytest.mark.parametrize("d", range(2, 9))
def test_select_permutations_cover(d):
    perms = select_permutations(d)
    assert len(perms) == special.comb(d, j0(d), exact=True)
    assert len(set(perms)) == len(perms)
    for perm in perms:
        assert sorted(perm) == list(range(1, d + 1))
    assert prefix_family(perms) == _all_subsets(d)


@pytest.mark.parametrize("d", range(2, 9))
def test_symmetric_chain_permutations(d):
    perms = symmetric_chain_permutations(d)
    assert len(perms) == special.comb(d, d // 2, exact=True)
    assert prefix_family(perms) == _all_subsets(d)


def test_select_permutations_three():
    assert select_permutations(3) == [(1, 2, 3), (2, 3, 1), (3, 1, 2)]


@pytest.mark.parametrize("d", range(2, 11))
def test_guided_search_follows_chains(d):
    chains = symmetric_chain_permutations(d, by_rank=True)
    assert sorted(chains) == symmetric_chain_permutations(d)
    search = _Search(d, guide=chains)
    assert search.run() == chains
    # one admissibility check per pick, never a lexicographic node
    assert search.nodes == len(chains)


@pytest.mark.slow
@pytest.mark.parametrize("d", [11, 12])
def test_select_permutations_large_blocks(d):
    perms = select_permutations(d)
    assert len(perms) == special.comb(d, j0(d), exact=True)
    assert prefix_family(perms) == _all_subsets(d)
    # every middle-size subset is the prefix of exactly one permutation
    middle = {frozenset(p[:j0(d)]) for p in perms}
    assert len(middle) == len(perms)


def test_r_min_and_r_p():
    assert r_min([3, 2]) == 6
    assert r_min([2, 2]) == 4
    assert r_min([4]) == 6
    assert r_p([4, 3], [1, 1]) == 4
    assert r_p([4, 3], [2, 2]) == 6
    assert r_p([4], [0]) == 1
    with pytest.raises(DomainError):
        r_p([4], [3])
    with pytest.raises(DomainError):
        r_p([4, 3], [1])


def test_permutation_plan():
    plan = PermutationPlan([(7, 5, 6), (9, 10)])
    assert plan.blocks == [(5, 6, 7), (9, 10)]
    assert plan.dims == [3, 2]
    assert plan.j0s == [2, 1]
    assert plan.r_min == 6
    assert plan.permutations[0] == [(5, 6, 7), (6, 7, 5), (7, 5, 6)]
    assert plan.matches(0, {5, 6}) == [0]
    assert plan.matches(0, {6}) == [1]
    assert plan.prefixes(1) == {frozenset([9]), frozenset([10]),
                                frozenset([9, 10])}
    assert len(list(plan.labels())) == 6
    data = plan.to_dict()
    assert list(data) == ["block2", "block3"]
    assert data["block2"]["j0"] == 2


def test_route_subset(gsobol_model):
    structure = gsobol_model.structure()
    plan = PermutationPlan([b.indices for b in structure.blocks])
    route = route_subset(plan, [9, 2])
    assert route.label[0][0] == 2
    assert route.label[1][0] == 9
    assert route.prefix_lengths == (1, 1)
    assert route.conditioning == ["x2", "x9"]
    route = route_subset(plan, [1, 3, 5])
    assert route.label[0][:2] in [(1, 3), (3, 1)]
    assert route.independent == (5,)
    assert route.conditioning[0] == "x5"
    assert "x%d" % route.label[0][0] in route.conditioning
    assert "z%d" % route.label[0][1] in route.conditioning
    assert subset_name(route.subset) == "1:3:5"
    with pytest.raises(DomainError):
        route_subset(plan, [])


def test_route_subsets_gsobol(gsobol_model):
    structure = gsobol_model.structure()
    plan = PermutationPlan([b.indices for b in structure.blocks])
    singletons = [(i,) for i in range(1, 11)]
    table = route_subsets(plan, singletons)
    assert len(table.labels) == 3
    assert list(table.routes) == singletons
    pairs = [(1, 2), (1, 3), (1, 9), (1, 10), (2, 3), (2, 9), (2, 10),
             (3, 9), (3, 10), (9, 10)]
    table = route_subsets(plan, singletons + pairs)
    assert len(table.labels) == plan.r_min == 6
    # every route really has its parts as prefixes
    for u, route in table.routes.items():
        for perm, p in zip(route.label, route.prefix_lengths):
            assert set(perm[:p]) == set(u) & set(perm)
        assert route.label == table.labels[table.assignment[u]]
    # independent inputs can be served by any representation
    assert len(table.replicated[(5,)]) == 6
    served = sum(len(table.subsets_of(k)) for k in range(6))
    assert served == 20
    data = table.to_dict()
    assert data["routes"]["9:10"]["conditioning"] in (["x9", "z10"],
                                                      ["x10", "z9"])


def test_route_subsets_deduplicates(gsobol_model):
    structure = gsobol_model.structure()
    plan = PermutationPlan([b.indices for b in structure.blocks])
    table = route_subsets(plan, [(2, 1), (1, 2), (4,)])
    assert list(table.routes) == [(1, 2), (4,)]
    assert len(table.labels) == 1


def test_block_structure():
    block = DependentBlock("simplex", (3, 2))
    assert block.indices == (2, 3)
    structure = BlockStructure(3, independent={1: Uniform()},
                               blocks=[block])
    assert structure.independent_indices == (1,)
    assert structure.block_of(3) == 0
    assert structure.block_of(1) is None
    indep, parts = structure.split([1, 3])
    assert indep == (1,) and parts == [frozenset([3])]
    with pytest.raises(DomainError):
        structure.split([4])
    with pytest.raises(ParameterError):
        BlockStructure(4, independent={1: Uniform()}, blocks=[block])
    with pytest.raises(ParameterError):
        BlockStructure(3, independent={1: Uniform(), 2: Uniform()},
                       blocks=[block])
    with pytest.raises(DomainError):
        DependentBlock("simplex", (1,))


def test_block_sample_direct_matches_dm(uniform_gauss3, rng):
    copula, margins = uniform_gauss3
    block = DependentBlock("gaussian", (1, 2, 3), margins=margins,
                           copula=copula)
    direct = block.sample_direct(50000, rng=rng)
    via_dm = block.make_dm((2, 3, 1)).sample(50000, rng=rng)
    assert np.allclose(np.corrcoef(direct, rowvar=False),
                       np.corrcoef(via_dm, rowvar=False), atol=0.02)
    assert block.make_dm((2, 3, 1)) is block.make_dm((2, 3, 1))
    with pytest.raises(ParameterError):
        block.make_dm((1, 2))


@pytest.fixture
def gsobol_reps(gsobol_model):
    structure = gsobol_model.structure()
    plan = PermutationPlan([b.indices for b in structure.blocks])
    labels = list(plan.labels())
    return build_representations(structure, gsobol_model, labels)


def test_representation_layout(gsobol_reps):
    reps, width = gsobol_reps
    assert len(reps) == 6
    assert width == 10
    rep = reps[0]
    assert rep.label == ((1, 2, 3), (9, 10))
    assert rep.names == ["x4", "x5", "x6", "x7", "x8",
                         "x1", "z2", "z3", "x9", "z10"]
    assert rep.column("z10") == 9


def test_frozen_mask(gsobol_reps):
    reps, width = gsobol_reps
    rep = reps[0]
    mask = rep.frozen_mask([1, 2, 5])
    assert rep.names[5] == "x1"
    assert list(np.flatnonzero(mask)) == [1, 5, 6]
    mask = rep.frozen_mask([9], width=12)
    assert mask.shape == (12,)
    assert list(np.flatnonzero(mask)) == [8]
    assert rep.frozen_mask(range(1, 11)).all()
    with pytest.raises(DomainError):
        rep.frozen_mask([2])
    with pytest.raises(DomainError):
        rep.frozen_mask([10])
    with pytest.raises(ParameterError):
        rep.frozen_mask([1], width=5)


def test_representations_share_the_input_law(gsobol_model, gsobol_reps,
                                             rng):
    reps, width = gsobol_reps
    U = rng.random((40000, width))
    means = [rep.evaluate(U).mean(axis=0) for rep in reps]
    direct = gsobol_model.evaluate(
        gsobol_model.structure().sample_direct(40000, rng=rng))
    for mean in means:
        assert np.allclose(mean, direct.mean(axis=0), rtol=0.01)


def test_representation_inputs(gsobol_reps, rng):
    reps, width = gsobol_reps
    rep = reps[-1]
    x = rep.inputs(rng.random((1000, width)))
    assert x.shape == (1000, 10)
    assert np.all((x > 0) & (x < 1))
    assert np.all(x[:, 8] + x[:, 9] <= 1.0 + 1e-12)


def test_build_representation_mismatch(gsobol_model, linear_model):
    structure = gsobol_model.structure()
    with pytest.raises(ParameterError):
        build_representation(structure, gsobol_model, [(1, 2, 3)])
    with pytest.raises(ParameterError):
        build_representation(structure, linear_model,
                             [(1, 2, 3), (9, 10)])
