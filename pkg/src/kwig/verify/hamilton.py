"""Hamiltonian cycles: exact subset DP for small graphs, Posa rotation-extension
with restarts for large ones.  Any cycle returned has been validated."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import require
from ..graph import ExplicitGraph
from ..rng import RngStream
from .connectivity import connected

EXACT_LIMIT = 22


@dataclass(frozen=True)
class HamiltonResult:
    cycle: tuple[int, ...] | None
    exact: bool  # True when "no cycle" is a proof rather than a give-up
    method: str

    @property
    def found(self) -> bool:
        return self.cycle is not None


def is_hamiltonian_cycle(g: ExplicitGraph, cycle) -> bool:
    cycle = list(cycle)
    if g.N < 3 or len(cycle) != g.N or sorted(cycle) != list(range(g.N)):
        return False
    return all(g.has_edge(cycle[i], cycle[(i + 1) % g.N]) for i in range(g.N))


def exact_hamiltonian(g: ExplicitGraph) -> HamiltonResult:
    """Held-Karp style DP over subsets of {1..N-1}, vectorized over subsets.

    reach[S] is the bitset of endpoints e in S such that some path starting
    at vertex 0 covers exactly {0} + S and ends at e (vertex i -> bit i-1).
    """
    n = g.N
    if n > EXACT_LIMIT:
        raise ValueError(f"exact Hamiltonicity limited to N <= {EXACT_LIMIT}")
    if n < 3:
        return HamiltonResult(None, True, "dp")
    dense = g.dense
    bits = n - 1
    adj = np.array([sum(1 << (j - 1) for j in range(1, n) if dense[i, j]) for i in range(n)], dtype=np.uint32)
    masks = np.arange(1 << bits, dtype=np.uint32)
    reach = np.zeros(1 << bits, dtype=np.uint32)
    for j in range(1, n):
        if dense[0, j]:
            reach[1 << (j - 1)] = 1 << (j - 1)
    popcount = np.zeros(1 << bits, dtype=np.int64)
    for j in range(bits):
        popcount += (masks >> np.uint32(j)) & np.uint32(1)
    layers = np.split(masks[np.argsort(popcount, kind="stable")],
                      np.cumsum(np.bincount(popcount, minlength=bits + 1))[:-1])
    # subsets in order of size, so every predecessor is final before use
    for size in range(2, bits + 1):
        layer = layers[size]
        for j in range(1, n):
            bit = np.uint32(1 << (j - 1))
            idx = layer[(layer & bit) != 0]
            ok = (reach[idx ^ bit] & adj[j]) != 0
            reach[idx[ok]] |= bit
    full = (1 << bits) - 1
    closing = int(reach[full]) & int(adj[0])
    if not closing:
        return HamiltonResult(None, True, "dp")
    # walk back from an endpoint adjacent to vertex 0
    path = []
    S = full
    e = (closing & -closing).bit_length()
    while True:
        path.append(e)
        S_prev = S & ~(1 << (e - 1))
        if S_prev == 0:
            break
        cand = int(reach[S_prev]) & int(adj[e])
        e = (cand & -cand).bit_length()
        S = S_prev
    cycle = tuple([0] + path[::-1])
    require(is_hamiltonian_cycle(g, cycle), "Hamiltonian cycle certificate failed its check")
    return HamiltonResult(cycle, True, "dp")


def rotation_extension(g: ExplicitGraph, rng: RngStream, restarts: int = 20,
                       steps_per_vertex: int = 50) -> HamiltonResult:
    """Grow a path by extension; when stuck, rotate at a random neighbour of
    the endpoint on the path.  A full path whose ends are adjacent closes the
    cycle; otherwise rotations continue until the step budget runs out."""
    n = g.N
    if n < 3 or g.degrees.min() < 2:
        return HamiltonResult(None, False, "rotation-extension")
    gen = rng.generator()
    nbrs = [g.neighbors(v) for v in range(n)]
    for _ in range(restarts):
        start = int(gen.integers(n))
        path = [start]
        pos = np.full(n, -1, dtype=np.int64)
        pos[start] = 0
        for _ in range(steps_per_vertex * n):
            end = path[-1]
            cand = nbrs[end]
            free = cand[pos[cand] < 0]
            if free.size:
                w = int(free[gen.integers(free.size)])
                pos[w] = len(path)
                path.append(w)
                continue
            if len(path) == n and g.dense[end, path[0]]:
                cycle = tuple(path)
                if is_hamiltonian_cycle(g, cycle):
                    return HamiltonResult(cycle, False, "rotation-extension")
            on_path = cand[(pos[cand] >= 0) & (pos[cand] < len(path) - 2)]
            if not on_path.size:
                break
            w = int(on_path[gen.integers(on_path.size)])
            i = int(pos[w])
            path[i + 1 :] = path[i + 1 :][::-1]
            for t in range(i + 1, len(path)):
                pos[path[t]] = t
    return HamiltonResult(None, False, "rotation-extension")


def hamiltonian_certificate(g: ExplicitGraph, rng: RngStream | None = None, effort: int = 20) -> HamiltonResult:
    if g.N >= 3 and (g.degrees.min() < 2 or not connected(g)):
        return HamiltonResult(None, True, "degree/connectivity")
    if g.N <= EXACT_LIMIT:
        return exact_hamiltonian(g)
    return rotation_extension(g, rng or RngStream.from_seed(0, "hamilton"), restarts=effort)
