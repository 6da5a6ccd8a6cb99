"""Exact maximum clique / independent set by branch and bound.

Vertex sets are Python-int bitsets.  Each node greedily colours the
candidate set; a clique can take at most one vertex per colour class, so a
branch whose clique size plus colour number cannot beat the incumbent is cut
(Tomita-Seki style).  A time cap turns the answer into an interval.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from ..graph import ExplicitGraph


@dataclass(frozen=True)
class CliqueResult:
    size: int  # best found; the exact value when ``exact``
    upper: int  # proven upper bound (== size when exact)
    vertices: tuple[int, ...]
    exact: bool
    nodes: int

    @property
    def interval(self) -> tuple[int, int]:
        return self.size, self.upper


class _Timeout(Exception):
    pass


def _color_sort(P: int, adj: list[int]) -> tuple[list[int], list[int]]:
    """Greedy colouring of P in increasing vertex order; returns vertices and
    their colour numbers, sorted by colour."""
    order: list[int] = []
    colors: list[int] = []
    color = 0
    uncolored = P
    while uncolored:
        color += 1
        avail = uncolored
        while avail:
            low = avail & -avail
            v = low.bit_length() - 1
            avail &= ~adj[v] & ~low
            uncolored &= ~low
            order.append(v)
            colors.append(color)
    return order, colors


def max_clique(g: ExplicitGraph, time_limit: float | None = None) -> CliqueResult:
    n = g.N
    if n == 0:
        return CliqueResult(0, 0, (), True, 0)
    # relabel by non-increasing degree so the greedy colouring starts with
    # the most constrained vertices
    deg = g.degrees
    order = sorted(range(n), key=lambda v: (-int(deg[v]), v))
    label = {v: i for i, v in enumerate(order)}
    bits = g.adjacency_bits
    adj = []
    for v in order:
        mask = 0
        b = bits[v]
        while b:
            low = b & -b
            mask |= 1 << label[low.bit_length() - 1]
            b ^= low
        adj.append(mask)

    # any single vertex is a clique
    best_set: list[int] = [0]
    best_size = [1]
    nodes = [0]
    deadline = None if time_limit is None else time.monotonic() + time_limit

    def expand(R: list[int], P: int) -> None:
        nodes[0] += 1
        if deadline is not None and nodes[0] % 256 == 0 and time.monotonic() > deadline:
            raise _Timeout
        verts, colors = _color_sort(P, adj)
        for i in range(len(verts) - 1, -1, -1):
            if len(R) + colors[i] <= best_size[0]:
                return
            v = verts[i]
            R.append(v)
            NP = P & adj[v]
            if NP:
                expand(R, NP)
            elif len(R) > best_size[0]:
                best_size[0] = len(R)
                best_set[:] = R
            R.pop()
            P &= ~(1 << v)

    full = (1 << n) - 1
    root_bound = max(_color_sort(full, adj)[1], default=0)
    exact = True
    try:
        expand([], full)
    except _Timeout:
        exact = False
    vertices = tuple(sorted(order[i] for i in best_set))
    size = len(vertices)
    return CliqueResult(size, size if exact else max(size, root_bound), vertices, exact, nodes[0])


def independence_number(g: ExplicitGraph, time_limit: float | None = None) -> CliqueResult:
    return max_clique(g.complement(), time_limit)


def clique_number(g: ExplicitGraph, time_limit: float | None = None) -> CliqueResult:
    return max_clique(g, time_limit)


def is_independent_set(g: ExplicitGraph, vertices) -> bool:
    vs = list(vertices)
    if len(set(vs)) != len(vs):
        return False
    return all(not g.has_edge(a, b) for i, a in enumerate(vs) for b in vs[i + 1 :])


def is_clique(g: ExplicitGraph, vertices) -> bool:
    vs = list(vertices)
    if len(set(vs)) != len(vs):
        return False
    return all(g.has_edge(a, b) for i, a in enumerate(vs) for b in vs[i + 1 :])
