import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwig import graph as gc
from kwig.kwise import DyadicProb
from kwig.rng import RngStream

HALF = DyadicProb.parse("1/2")


# ---- edge indexing


def test_edge_index_small_table():
    # column order: {0,1}, {0,2}, {1,2}, {0,3}, ...
    assert [gc.edge_index(u, v, 5) for u, v in [(0, 1), (0, 2), (1, 2), (0, 3), (3, 4)]] == [0, 1, 2, 3, 9]
    assert gc.edge_index(2, 1, 5) == 2


def test_edge_index_errors():
    with pytest.raises(ValueError):
        gc.edge_index(3, 3, 5)
    with pytest.raises(ValueError):
        gc.edge_index(0, 5, 5)


@pytest.mark.parametrize("N", [2, 3, 7, 50])
def test_edge_index_bijection_exhaustive(N):
    seen = sorted(gc.edge_index(u, v, N) for u, v in itertools.combinations(range(N), 2))
    assert seen == list(range(gc.num_pairs(N)))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 2), st.integers(1, 2**32 - 1))
def test_edge_pairs_inverts_edge_indices(u, gap):
    # any pair below N = 2^32 keeps the index inside int64
    v = min(u + gap, 2**32 - 1)
    idx = gc.edge_indices([v], [u])
    back_u, back_v = gc.edge_pairs(idx)
    assert (int(back_u[0]), int(back_v[0])) == (u, v)
    assert int(idx[0]) == v * (v - 1) // 2 + u


# ---- explicit graphs


def test_explicit_basics():
    g = gc.ExplicitGraph.from_edges(4, [(0, 1), (2, 1), (3, 0)])
    assert g.edge_count == 3
    assert g.degrees.tolist() == [2, 2, 1, 1]
    assert g.neighbors(0).tolist() == [1, 3]
    assert g.has_edge(1, 2) and not g.has_edge(2, 3)
    assert g.complement().edge_count == 3
    assert g.induced([0, 1, 3]).edge_count == 2
    assert np.array_equal(g.dense, g.dense.T)
    assert gc.ExplicitGraph.from_dense(g.dense) == g


def test_edge_list_roundtrip():
    g = gc.ExplicitGraph.from_edges(6, [(0, 5), (1, 2), (2, 4)])
    buf = io.StringIO()
    gc.write_edge_list(g, buf)
    assert buf.getvalue() == "1 2\n2 4\n0 5\n"
    assert gc.read_edge_list(buf.getvalue(), 6) == g
    assert gc.read_edge_list("# comment\n0 1\n\n1 2 extra\n").N == 3


def test_gnp_density_and_determinism():
    a = gc.gnp_graph(300, 0.3, RngStream.from_seed(4, "g"))
    b = gc.gnp_graph(300, 0.3, RngStream.from_seed(4, "g"))
    assert a == b
    M = gc.num_pairs(300)
    assert abs(a.edge_count - 0.3 * M) < 5 * np.sqrt(M * 0.21)


# ---- implicit graphs


def test_zero_seed_is_complete_graph():
    g = gc.generate(12, DyadicProb.parse("1/8"), 3, None)
    assert g.materialize() == gc.ExplicitGraph.complete(12)


def test_generated_density_close_to_p():
    N = 400
    g = gc.generate(N, DyadicProb.parse("3/8"), 4, RngStream.from_seed(1, "d"))
    e = g.materialize().edge_count
    M = gc.num_pairs(N)
    assert abs(e / M - 0.375) < 0.02


def test_implicit_queries_agree_with_materialized():
    g = gc.generate(60, HALF, 5, RngStream.from_seed(2, "q"))
    x = g.materialize()
    for v in (0, 17, 59):
        assert g.neighbors(v).tolist() == x.neighbors(v).tolist()
        assert g.degree(v) == int(x.degrees[v])
    for u, v in [(0, 1), (59, 3), (20, 21)]:
        assert g.has_edge(u, v) == x.has_edge(u, v)
    with pytest.raises(ValueError):
        g.has_edge(0, 60)


def test_materialize_chunking_is_invisible():
    g = gc.generate(90, HALF, 3, RngStream.from_seed(3, "c"))
    assert g.materialize(chunk=17) == g.materialize()
    with pytest.raises(ValueError):
        g.materialize(limit=100)


def test_intersection_is_edgewise_and():
    a = gc.generate(80, HALF, 3, RngStream.from_seed(5, "a"))
    b = gc.generate(80, DyadicProb.parse("3/4"), 4, RngStream.from_seed(5, "b"))
    h = gc.intersect(a, b)
    assert h.params.p.value == DyadicProb.parse("3/8").value
    assert h.params.k == 3
    ea, eb = set(a.materialize().edge_list()), set(b.materialize().edge_list())
    assert set(h.materialize().edge_list()) == ea & eb


def test_intersect_with_complete_is_identity():
    a = gc.generate(30, HALF, 2, RngStream.from_seed(6, "a"))
    full = gc.generate(30, HALF, 2, None)
    assert gc.intersect(a, full).materialize() == a.materialize()


def test_intersect_exhaustive_n4():
    # constant-seed leaves on 4 vertices with k=1 and F=8: a leaf is complete
    # iff its seed is below pF = 4, otherwise empty
    for s1, s2 in itertools.product(range(8), repeat=2):
        a = gc.SchemeGraph(4, gc.generate(4, HALF, 1, None).scheme.with_seed([s1]))
        b = gc.SchemeGraph(4, gc.generate(4, HALF, 1, None).scheme.with_seed([s2]))
        want = 6 if (s1 < 4 and s2 < 4) else 0
        assert gc.intersect(a, b).materialize().edge_count == want


def test_intersect_size_mismatch_and_depth():
    a = gc.generate(5, HALF, 1, None)
    with pytest.raises(ValueError):
        gc.intersect(a, gc.generate(6, HALF, 1, None))
    g = a
    with pytest.raises(ValueError):
        for _ in range(gc.MAX_TREE_DEPTH + 1):
            g = gc.intersect(g, a)


# ---- seed files


def test_seed_file_roundtrip(tmp_path):
    a = gc.generate(40, HALF, 3, RngStream.from_seed(7, "a"))
    b = gc.generate(40, DyadicProb.parse("1/4"), 2, RngStream.from_seed(7, "b"))
    for g in (a, gc.intersect(a, b)):
        path = tmp_path / "g.kwig"
        gc.save_graph(g, path)
        data = path.read_bytes()
        assert data[:5] == b"KWIG\x01"
        back = gc.load_graph(path)
        assert back.to_bytes() == data
        assert back.materialize() == g.materialize()


@pytest.mark.parametrize("mutate", [lambda d: b"XXXX" + d[4:], lambda d: d[:4] + b"\x09" + d[5:],
                                    lambda d: d + b"\x00", lambda d: d[:5] + b"\x7f" + d[6:]])
def test_seed_file_rejects_corruption(mutate):
    data = gc.generate(10, HALF, 2, RngStream.from_seed(8, "x")).to_bytes()
    with pytest.raises(ValueError):
        gc.graph_from_bytes(mutate(data))


def test_last_edge_index():
    assert gc.edge_index(98, 99, 100) == gc.num_pairs(100) - 1


def test_intersect_nested_enumeration_n4():
    # all 64 x 64 seed pairs for two k=2 families on C(4,2) = 6 edges (F = 8)
    leaf = gc.generate(4, HALF, 2, None).scheme
    seeds = list(itertools.product(range(8), repeat=2))
    bits = np.array([gc.SchemeGraph(4, leaf.with_seed(list(s))).edge_bits(np.arange(6)) for s in seeds])
    both = (bits[:, None, :] & bits[None, :, :]).reshape(-1, 6)
    assert both.shape[0] == 4096
    assert (both.sum(axis=0) == 1024).all()
    for a, b in itertools.combinations(range(6), 2):
        assert int((both[:, a] & both[:, b]).sum()) == 256
