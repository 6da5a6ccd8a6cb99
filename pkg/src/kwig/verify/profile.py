"""Degree statistics, chromatic intervals, subgraph copies and the sampled
probe for the two expansion conditions behind Hamiltonicity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..graph import ExplicitGraph
from ..rng import RngStream
from .connectivity import components
from .independent import max_clique

PATTERN_LIMIT = 6


@dataclass(frozen=True)
class DegreeProfile:
    eps_obs: float  # max |deg / (p(N-1)) - 1|
    gamma_obs: float  # max over pairs |codeg / (p^2(N-2)) - 1|
    max_neighborhood_edges: int
    min_degree: int
    max_degree: int


def codegrees(g: ExplicitGraph) -> np.ndarray:
    """Matrix of common-neighbour counts (diagonal holds the degrees)."""
    a = g.dense.astype(np.float32)
    return np.rint(a @ a).astype(np.int64)


def degree_codegree_profile(g: ExplicitGraph, p: float) -> DegreeProfile:
    N = g.N
    deg = g.degrees.astype(np.int64)
    eps = float(np.max(np.abs(deg / (p * (N - 1)) - 1))) if N >= 2 else 0.0
    gamma = 0.0
    inside = 0
    if N >= 3:
        cod = codegrees(g)
        iu = np.triu_indices(N, 1)
        gamma = float(np.max(np.abs(cod[iu] / (p * p * (N - 2)) - 1)))
        # edges inside N(v): each (v,u) edge contributes codeg(v,u), counted twice
        inside = int(((cod * g.dense).sum(axis=1) // 2).max())
    return DegreeProfile(eps, gamma, inside, int(deg.min()) if N else 0, int(deg.max()) if N else 0)


def smallest_last_coloring(g: ExplicitGraph) -> list[int]:
    """Greedy colouring in degeneracy order; uses at most degeneracy + 1 colours."""
    N = g.N
    adj = g.adjacency_sets
    deg = [len(a) for a in adj]
    buckets: list[set[int]] = [set() for _ in range(max(deg, default=0) + 1)]
    for v, d in enumerate(deg):
        buckets[d].add(v)
    removed = [False] * N
    order: list[int] = []
    low = 0
    for _ in range(N):
        low = max(low - 1, 0)
        while not buckets[low]:
            low += 1
        v = min(buckets[low])
        buckets[low].discard(v)
        removed[v] = True
        order.append(v)
        for w in adj[v]:
            if not removed[w]:
                buckets[deg[w]].discard(w)
                deg[w] -= 1
                buckets[deg[w]].add(w)
    color = [-1] * N
    for v in reversed(order):
        used = {color[w] for w in adj[v] if color[w] >= 0}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    return color


def is_proper_coloring(g: ExplicitGraph, color) -> bool:
    u, v = g.edges
    c = np.asarray(color)
    return len(c) == g.N and not np.any(c[u] == c[v])


@dataclass(frozen=True)
class ChromaticBounds:
    lower: int
    upper: int
    coloring: tuple[int, ...]
    clique: tuple[int, ...]
    exact_inputs: bool  # clique and independence searches both finished


def chromatic_bounds(g: ExplicitGraph, time_limit: float | None = 10.0) -> ChromaticBounds:
    if g.N == 0:
        return ChromaticBounds(0, 0, (), (), True)
    omega = max_clique(g, time_limit)
    alpha = max_clique(g.complement(), time_limit)
    # N / alpha uses the proven upper end of the alpha interval
    lower = max(omega.size, math.ceil(g.N / alpha.upper))
    color = smallest_last_coloring(g)
    return ChromaticBounds(lower, max(color) + 1, tuple(color), omega.vertices, omega.exact and alpha.exact)


def _embeddings(g: ExplicitGraph, h: ExplicitGraph, induced: bool):
    """Injective maps of H into g (edge-preserving; also non-edge preserving
    when ``induced``).  H's vertices are placed in DFS order so each new one
    is usually adjacent to an already placed one."""
    hn = h.N
    hadj = h.adjacency_sets
    order = sorted(range(hn), key=lambda x: -len(hadj[x]))
    placed: list[int] = []
    seq: list[int] = []
    for x in order:
        if x in seq:
            continue
        stack = [x]
        while stack:
            y = stack.pop()
            if y in seq:
                continue
            seq.append(y)
            stack.extend(sorted(hadj[y] - set(seq), key=lambda z: len(hadj[z])))
    gadj = g.adjacency_sets
    image = [-1] * hn

    def extend(i: int):
        if i == hn:
            yield tuple(image)
            return
        x = seq[i]
        earlier = [seq[j] for j in range(i)]
        linked = [image[y] for y in earlier if y in hadj[x]]
        cand = set(gadj[linked[0]]) if linked else set(range(g.N))
        for w in linked[1:]:
            cand &= gadj[w]
        used = set(placed)
        for c in sorted(cand - used):
            if induced and any(c in gadj[image[y]] for y in earlier if y not in hadj[x]):
                continue
            image[x] = c
            placed.append(c)
            yield from extend(i + 1)
            placed.pop()
            image[x] = -1

    yield from extend(0)


def count_subgraph_copies(g: ExplicitGraph, h: ExplicitGraph) -> int:
    """Number of vertex subsets T with |T| = v(H) whose induced graph
    contains H as a (not necessarily induced) subgraph."""
    if h.N > PATTERN_LIMIT:
        raise ValueError(f"pattern has {h.N} vertices; counting is limited to {PATTERN_LIMIT}")
    if h.N > g.N:
        return 0
    if h.edge_count == 0:
        return math.comb(g.N, h.N)
    return len({frozenset(m) for m in _embeddings(g, h, False)})


def has_induced_copy(g: ExplicitGraph, h: ExplicitGraph) -> tuple[bool, tuple[int, ...] | None]:
    """Witness maps H-vertex i to the returned tuple's i-th graph vertex."""
    if h.N > g.N:
        return False, None
    for m in _embeddings(g, h, True):
        return True, m
    return False, None


def is_induced_copy(g: ExplicitGraph, h: ExplicitGraph, image) -> bool:
    image = list(image)
    if len(image) != h.N or len(set(image)) != h.N:
        return False
    return all(g.has_edge(image[a], image[b]) == h.has_edge(a, b) for a, b in combinations(range(h.N), 2))


@dataclass
class ExpansionProbe:
    small_limit: int  # sets up to b*N are tested for |outer boundary| >= 12|V|
    pair_size: int  # disjoint pairs of size c*N/log N must share an edge
    small_violation: tuple[int, ...] | None = None
    pair_violation: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    sets_tested: int = 0
    notes: list[str] = field(default_factory=list)


def outer_boundary(g: ExplicitGraph, vertices) -> set[int]:
    vs = set(vertices)
    adj = g.adjacency_sets
    out: set[int] = set()
    for v in vs:
        out |= adj[v]
    return out - vs


def _bfs_grown(g: ExplicitGraph, start: int, size: int) -> list[int]:
    adj = g.adjacency_sets
    seen = [start]
    mark = {start}
    i = 0
    while len(seen) < size and i < len(seen):
        for w in sorted(adj[seen[i]]):
            if w not in mark and len(seen) < size:
                mark.add(w)
                seen.append(w)
        i += 1
    return seen


def hks_conditions_probe(g: ExplicitGraph, sample_budget: int = 200, b: float = 1 / 170, c: float = 1.0,
                         rng: RngStream | None = None) -> ExpansionProbe:
    """One-sided search for sets violating (i) |outer boundary(V)| >= 12|V| for
    |V| <= bN or (ii) e(U, W) >= 1 for disjoint U, W of size cN/log N.  A
    reported violation is a checkable counterexample; none found proves
    nothing.  b and c are report parameters (b follows the expansion proof)."""
    N = g.N
    gen = (rng or RngStream.from_seed(0, "hks")).generator()
    small = max(1, int(b * N))
    pair = max(1, math.ceil(c * N / math.log(N))) if N >= 3 else 1
    probe = ExpansionProbe(small, pair)
    adj = g.adjacency_sets

    candidates: list[list[int]] = [[int(v)] for v in np.argsort(g.degrees, kind="stable")[: min(N, 16)]]
    for _ in range(sample_budget):
        size = int(gen.integers(1, small + 1))
        if gen.integers(2):
            candidates.append(gen.choice(N, size=size, replace=False).tolist())
        else:
            candidates.append(_bfs_grown(g, int(gen.integers(N)), size))
    for V in candidates:
        probe.sets_tested += 1
        if len(outer_boundary(g, V)) < 12 * len(V):
            probe.small_violation = tuple(sorted(V))
            break

    if 2 * pair <= N:
        count, labels = components(g)
        if count > 1:
            sizes = np.bincount(labels)
            big = np.nonzero(sizes >= pair)[0]
            # U inside one component, W anywhere outside it
            for comp in big:
                inside = np.nonzero(labels == comp)[0]
                outside = np.nonzero(labels != comp)[0]
                if outside.size >= pair:
                    probe.pair_violation = (tuple(inside[:pair].tolist()), tuple(outside[:pair].tolist()))
                    break
        for _ in range(max(1, sample_budget // 10) if probe.pair_violation is None else 0):
            # grow U greedily while the common non-neighbourhood stays large
            U: list[int] = []
            free = set(range(N))
            for v in gen.permutation(N):
                v = int(v)
                if v not in free:
                    continue
                rest = free - adj[v] - {v}
                if len(rest) < pair:
                    continue
                U.append(v)
                free = rest
                if len(U) == pair:
                    break
            if len(U) == pair:
                probe.pair_violation = (tuple(sorted(U)), tuple(sorted(free)[:pair]))
                break
    return probe


def check_pair_violation(g: ExplicitGraph, U, W) -> bool:
    U, W = set(U), set(W)
    if U & W:
        return False
    adj = g.adjacency_sets
    return all(not (adj[u] & W) for u in U)
