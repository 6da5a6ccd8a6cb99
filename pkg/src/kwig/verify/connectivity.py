"""Connectivity and exact vertex connectivity.

Vertex connectivity follows Esfahanian and Hakimi: with v of minimum degree,
kappa is the minimum local connectivity over (v, w) for w not adjacent to v
and over non-adjacent pairs of neighbours of v.  Each local connectivity is
first bounded below by counting disjoint paths of length <= 3 (common
neighbours plus a bipartite matching between the private neighbourhoods);
only pairs whose bound falls short of the current best get a max-flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order, connected_components, maximum_bipartite_matching, maximum_flow

from ..errors import BudgetExceededError
from ..graph import ExplicitGraph

KAPPA_BUDGET = 4096


def components(g: ExplicitGraph) -> tuple[int, np.ndarray]:
    if g.N == 0:
        return 0, np.zeros(0, dtype=np.int32)
    return connected_components(g.csr, directed=False)


def connected(g: ExplicitGraph) -> bool:
    return components(g)[0] <= 1


@dataclass(frozen=True)
class ConnectivityResult:
    kappa: int
    separator: tuple[int, ...] | None  # None only for complete graphs
    flows: int  # max-flow computations actually run
    pairs: int  # pairs examined


class _SplitNetwork:
    """Vertex x becomes x_in = x and x_out = x + N joined by a unit arc."""

    def __init__(self, g: ExplicitGraph) -> None:
        N = g.N
        u, v = g.edges
        big = N + 1
        rows = np.concatenate([np.arange(N), u + N, v + N])
        cols = np.concatenate([np.arange(N) + N, v, u])
        caps = np.concatenate([np.ones(N, np.int32), np.full(2 * u.size, big, np.int32)])
        self.N = N
        self.capacity = sparse.csr_matrix((caps, (rows, cols)), shape=(2 * N, 2 * N))
        self.capacity.sort_indices()

    def local(self, s: int, t: int, want_cut: bool = False) -> tuple[int, tuple[int, ...] | None]:
        res = maximum_flow(self.capacity, s + self.N, t, method="dinic")
        if not want_cut:
            return int(res.flow_value), None
        residual = (self.capacity - res.flow).tocsr()
        residual.data = np.where(residual.data > 0, 1, 0).astype(np.int32)
        residual.eliminate_zeros()
        reach = np.zeros(2 * self.N, dtype=bool)
        reach[breadth_first_order(residual, s + self.N, directed=True, return_predecessors=False)] = True
        cut = np.nonzero(reach[: self.N] & ~reach[self.N :])[0]
        return int(res.flow_value), tuple(int(x) for x in cut)


def short_path_lower_bound(dense: np.ndarray, s: int, t: int) -> int:
    """Number of internally disjoint s-t paths of length 2 or 3 found by
    common neighbours plus a maximum matching between private neighbours."""
    ns, nt = dense[s].copy(), dense[t].copy()
    ns[t] = nt[s] = False
    common = ns & nt
    a = np.nonzero(ns & ~nt)[0]
    b = np.nonzero(nt & ~ns)[0]
    count = int(common.sum())
    if a.size and b.size:
        sub = sparse.csr_matrix(dense[np.ix_(a, b)])
        if sub.nnz:
            match = maximum_bipartite_matching(sub, perm_type="column")
            count += int((match >= 0).sum())
    return count


def local_connectivity(g: ExplicitGraph, s: int, t: int) -> int:
    """Maximum number of internally vertex-disjoint s-t paths (s, t non-adjacent)."""
    if g.has_edge(s, t):
        raise ValueError("local vertex connectivity is defined for non-adjacent pairs")
    return _SplitNetwork(g).local(s, t)[0]


def vertex_connectivity(g: ExplicitGraph, budget: int = KAPPA_BUDGET) -> ConnectivityResult:
    N = g.N
    if N > budget:
        raise BudgetExceededError(f"N={N} exceeds vertex-connectivity budget {budget}")
    if N <= 1:
        return ConnectivityResult(0, (), 0, 0)
    if g.edge_count == N * (N - 1) // 2:
        return ConnectivityResult(N - 1, None, 0, 0)
    if not connected(g):
        return ConnectivityResult(0, (), 0, 0)

    dense = g.dense
    deg = g.degrees
    v = int(np.argmin(deg))
    best = int(deg[v])
    separator = tuple(int(x) for x in g.neighbors(v))
    network = _SplitNetwork(g)

    nbrs = g.neighbors(v)
    pairs: list[tuple[int, int]] = []
    non = np.nonzero(~dense[v])[0]
    pairs.extend((v, int(w)) for w in non if w != v)
    sub = dense[np.ix_(nbrs, nbrs)]
    ii, jj = np.nonzero(np.triu(~sub, 1))
    pairs.extend((int(nbrs[i]), int(nbrs[j])) for i, j in zip(ii, jj))

    flows = 0
    for s, t in pairs:
        if best == 0:
            break
        if short_path_lower_bound(dense, s, t) >= best:
            continue
        flows += 1
        value, cut = network.local(s, t, want_cut=True)
        if value < best:
            best, separator = value, cut
    return ConnectivityResult(best, tuple(sorted(separator)), flows, len(pairs))


def is_separator(g: ExplicitGraph, vertices) -> bool:
    """Removing ``vertices`` leaves a disconnected graph (at least two
    vertices in different components)."""
    removed = set(int(x) for x in vertices)
    keep = np.array([x for x in range(g.N) if x not in removed], dtype=np.int64)
    if keep.size < 2:
        return False
    sub = g.csr[keep][:, keep]
    return connected_components(sub, directed=False)[0] > 1
