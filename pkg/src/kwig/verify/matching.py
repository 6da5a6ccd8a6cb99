"""Maximum cardinality matching in general graphs (Edmonds' blossom algorithm)."""

from __future__ import annotations

from collections import deque

from ..graph import ExplicitGraph


def _greedy(adj: list[list[int]], order: list[int]) -> list[int]:
    match = [-1] * len(adj)
    for v in order:
        if match[v] == -1:
            for w in adj[v]:
                if match[w] == -1:
                    match[v], match[w] = w, v
                    break
    return match


def maximum_matching(g: ExplicitGraph, greedy: bool = True) -> list[tuple[int, int]]:
    """A maximum matching as a list of (u, v) pairs with u < v.

    Starts from a greedy matching (low degree first) and grows it by one
    augmenting path search per exposed vertex, contracting odd cycles found
    along the way.
    """
    n = g.N
    adj = [g.neighbors(v).tolist() for v in range(n)]
    order = sorted(range(n), key=lambda v: len(adj[v]))
    match = _greedy(adj, order) if greedy else [-1] * n

    for root in range(n):
        if match[root] != -1 or not adj[root]:
            continue
        _find_augmenting(adj, match, root)
    return sorted((v, match[v]) for v in range(n) if match[v] > v)


def _find_augmenting(adj: list[list[int]], match: list[int], root: int) -> int:
    """BFS from ``root`` over alternating paths; augments and returns the
    exposed endpoint reached, or -1."""
    n = len(adj)
    parent = [-1] * n
    base = list(range(n))
    used = [False] * n
    used[root] = True
    queue = deque([root])

    def lca(a: int, b: int) -> int:
        seen = [False] * n
        while True:
            a = base[a]
            seen[a] = True
            if match[a] == -1:
                break
            a = parent[match[a]]
        while True:
            b = base[b]
            if seen[b]:
                return b
            b = parent[match[b]]

    def mark_path(v: int, b: int, child: int, in_blossom: list[bool]) -> None:
        while base[v] != b:
            in_blossom[base[v]] = in_blossom[base[match[v]]] = True
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if base[v] == base[w] or match[v] == w:
                continue
            if w == root or (match[w] != -1 and parent[match[w]] != -1):
                # odd cycle: contract the blossom through its base
                cur = lca(v, w)
                in_blossom = [False] * n
                mark_path(v, cur, w, in_blossom)
                mark_path(w, cur, v, in_blossom)
                for x in range(n):
                    if in_blossom[base[x]]:
                        base[x] = cur
                        if not used[x]:
                            used[x] = True
                            queue.append(x)
            elif parent[w] == -1:
                parent[w] = v
                if match[w] == -1:
                    _augment(match, parent, w)
                    return w
                used[match[w]] = True
                queue.append(match[w])
    return -1


def _augment(match: list[int], parent: list[int], v: int) -> None:
    while v != -1:
        pv = parent[v]
        nxt = match[pv]
        match[v], match[pv] = pv, v
        v = nxt


def matching_size(g: ExplicitGraph) -> int:
    return len(maximum_matching(g))


def has_perfect_matching(g: ExplicitGraph) -> tuple[bool, list[tuple[int, int]]]:
    if g.N % 2:
        return False, maximum_matching(g)
    m = maximum_matching(g)
    return len(m) * 2 == g.N, m


def is_matching(g: ExplicitGraph, pairs) -> bool:
    seen: set[int] = set()
    for u, v in pairs:
        if u in seen or v in seen or u == v or not g.has_edge(u, v):
            return False
        seen.update((u, v))
    return True
