import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwig import adversarial as adv
from kwig import graph as gc
from kwig import kwise
from kwig.errors import DefianceImpossibleError, InfeasibleDesignError
from kwig.graph import ExplicitGraph
from kwig.kwise import DyadicProb
from kwig.rng import RngStream
from kwig.verify.connectivity import components
from kwig.verify.matching import has_perfect_matching


def _clique(n: int) -> ExplicitGraph:
    return ExplicitGraph.complete(n)


# ---- clique partition


def test_clique_partition_pairwise_independent_exhaustive_n7():
    N = 7
    odd = [m for m in itertools.product([False, True], repeat=N) if sum(m) % 2 == 1]
    assert len(odd) == 64
    M = gc.num_pairs(N)
    rows = np.array([adv.CliquePartitionGraph(m).edge_bits(np.arange(M)) for m in odd])
    assert (rows.sum(axis=0) == 32).all()
    for a, b in itertools.combinations(range(M), 2):
        counts = [int(((rows[:, a] == x) & (rows[:, b] == y)).sum()) for x in (0, 1) for y in (0, 1)]
        assert counts == [16, 16, 16, 16], (a, b)


def test_clique_partition_not_three_wise():
    # a triangle u,v,w with exactly two edges present is impossible
    N = 7
    odd = [m for m in itertools.product([False, True], repeat=N) if sum(m) % 2 == 1]
    tri = gc.edge_indices([0, 0, 1], [1, 2, 2])
    for m in odd:
        assert adv.CliquePartitionGraph(m).edge_bits(tri).sum() != 2


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 60), st.integers(0, 2**32))
def test_clique_partition_structure(N, seed):
    g = adv.sample_clique_partition(N, RngStream.from_seed(seed, "cp"))
    assert int(g.membership.sum()) % 2 == 1
    x = g.materialize()
    count, _ = components(x)
    assert count == (1 if g.membership.all() else 2)
    if N % 2 == 0:
        assert not has_perfect_matching(x)[0]


def test_clique_partition_rejects_even_side():
    with pytest.raises(ValueError):
        adv.CliquePartitionGraph([True, True, False, False, False])


def test_clique_partition_roundtrip():
    g = adv.sample_clique_partition(23, RngStream.from_seed(1, "cp"))
    back = gc.graph_from_bytes(g.to_bytes())
    assert isinstance(back, adv.CliquePartitionGraph)
    assert np.array_equal(back.membership, g.membership)


# ---- block design


@pytest.mark.parametrize("N,S,q", [(100, 3, 31), (100, 5, 19), (400, 7, 53), (10**4, 3, 3331), (2**20, 45, 23297)])
def test_block_design_modulus(N, S, q):
    d = adv.build_block_design(N, S)
    assert d.q == q
    assert d.block_count == q * q


@pytest.mark.parametrize("N,S", [(100, 3), (100, 5), (400, 7)])
def test_blocks_share_at_most_one_vertex(N, S):
    d = adv.build_block_design(N, S)
    sets = d.blocks_vertices(np.arange(d.block_count))
    assert sets.max() < N
    membership = np.zeros((d.block_count, N), dtype=np.int32)
    membership[np.arange(d.block_count)[:, None], sets] = 1
    assert (membership.sum(axis=1) == S).all()
    overlap = membership @ membership.T
    np.fill_diagonal(overlap, 0)
    assert overlap.max() <= 1


def test_owner_inverts_block_vertices():
    d = adv.build_block_design(400, 7)
    for b in (0, 1, 54, d.block_count - 1):
        vs = d.block_vertices(b)
        i, j = np.array(list(itertools.combinations(range(7), 2))).T
        block, iu, iv = d.owner(vs[i], vs[j])
        assert (block == b).all()
        assert (iu == i).all() and (iv == j).all()
    # same row or outside the covered grid
    block, _, _ = d.owner([0, 0], [1, d.covered])
    assert block.tolist() == [-1, -1]


@pytest.mark.parametrize("N,S", [(100, 2), (100, 11), (18, 4)])
def test_block_design_infeasible(N, S):
    with pytest.raises(InfeasibleDesignError):
        adv.build_block_design(N, S)


# ---- planted patterns


def test_planted_triangle_probability_frozen():
    g = adv.plant_pattern(10**4, _clique(3), 1, DyadicProb(1, 18), RngStream.from_seed(0, "p"))
    assert g.design.q == 3331 and g.design.block_count == 11_095_561
    delta, exact = g.pattern_probability()
    assert exact and delta == Fraction(1, 2**18)


def test_planted_empty_seven_set_probability_frozen():
    # M = 21 pairs, F = 32: only c1 = 0 and c0 < 16 realize the empty pattern
    g = adv.plant_pattern(64, ExplicitGraph.empty(7), 2, DyadicProb(1, 1), RngStream.from_seed(0, "p"))
    delta, exact = g.pattern_probability()
    assert exact and delta == Fraction(16, 1024)


def test_planted_empty_45_set_hitting_seeds():
    # M = 990 pairs, F = 1024.  For c1 != 0 the 990 values are distinct, so
    # they cannot all fall below 512; for c1 = 0 exactly c0 < 512 works.
    g = adv.plant_pattern(2**20, ExplicitGraph.empty(45), 2, DyadicProb(1, 1), RngStream.from_seed(0, "p"))
    t = g.template
    assert t.F == 1024 and t.M == 990
    pattern = kwise.ForcedPattern(990, 0)
    hits_c1_zero = [kwise.pattern_holds(t.with_seed([c0, 0]), pattern) for c0 in range(1024)]
    assert hits_c1_zero == [c0 < 512 for c0 in range(1024)]
    rng = np.random.default_rng(0)
    for c0, c1 in zip(rng.integers(0, 1024, 300), rng.integers(1, 1024, 300)):
        assert not kwise.pattern_holds(t.with_seed([int(c0), int(c1)]), pattern)
    delta, exact = g.pattern_probability()
    assert not exact and delta == Fraction(1, 1024**2)


def test_planted_triangle_found_and_induced():
    g = adv.plant_pattern(10**4, _clique(3), 1, DyadicProb(1, 18), RngStream.from_seed(3, "p"))
    b = g.find_planted_block()
    assert b is not None
    vs = g.design.block_vertices(b)
    assert g.induces(vs)
    assert g.has_edge(int(vs[0]), int(vs[1])) and g.has_edge(int(vs[1]), int(vs[2]))
    assert g.find_planted_block(0, b) is None


def test_planted_pattern_hits_agree_with_oracle():
    H = ExplicitGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    g = adv.plant_pattern(400, H, 2, DyadicProb(1, 1), RngStream.from_seed(4, "p"))
    blocks = np.arange(200)
    hits = g.pattern_hits(blocks)
    for b in blocks:
        assert bool(hits[b]) == g.induces(g.design.block_vertices(int(b)))


def test_planted_edges_outside_blocks_use_residual():
    g = adv.plant_pattern(400, _clique(3), 2, DyadicProb(1, 2), RngStream.from_seed(5, "p"))
    u, v = np.array([0, 1, 5]), np.array([1, 2, 390])
    block, _, _ = g.design.owner(u, v)
    outside = block < 0
    idx = gc.edge_indices(u[outside], v[outside])
    assert np.array_equal(g.edge_bits(idx), kwise.eval_vars(g.residual, idx))


def test_planted_roundtrip():
    H = ExplicitGraph.from_edges(5, [(0, 1), (3, 4)])
    g = adv.plant_pattern(300, H, 3, DyadicProb(3, 3), RngStream.from_seed(6, "p"))
    back = gc.graph_from_bytes(g.to_bytes())
    assert back.to_bytes() == g.to_bytes()
    assert back.materialize() == g.materialize()


def test_planted_density_matches_p():
    g = adv.plant_pattern(400, _clique(3), 3, DyadicProb(1, 2), RngStream.from_seed(7, "p"))
    e = g.materialize().edge_count
    assert abs(e / gc.num_pairs(400) - 0.25) < 0.02


# ---- defiance


@pytest.mark.parametrize("H,rho,k", [(_clique(3), Fraction(1), 1), (_clique(4), Fraction(2, 3), 2),
                                     (ExplicitGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), Fraction(4, 3), 1)])
def test_defiance_params(H, rho, k):
    d = adv.defiance_params(H, 10**4)
    assert d.rho == rho and d.k_defy == k
    assert d.p_star == pytest.approx(1e4 ** (-float(rho)))


def test_single_edge_cannot_be_defied():
    with pytest.raises(DefianceImpossibleError):
        adv.defiance_params(ExplicitGraph.from_edges(2, [(0, 1)]), 100)
    with pytest.raises(ValueError):
        adv.min_density_ratio(ExplicitGraph.empty(3))


def test_smallest_square_design():
    d = adv.build_block_design(9, 3)
    assert (d.q, d.block_count) == (3, 9)


def test_zero_block_seeds_induce_pattern_everywhere():
    H = ExplicitGraph.from_edges(3, [(0, 1)])
    g = adv.plant_pattern(100, H, 2, DyadicProb(1, 1), RngStream.from_seed(8, "p"))
    assert kwise.pattern_holds(g.template, kwise.ForcedPattern(g.e0, g.e1))
