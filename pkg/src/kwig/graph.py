"""Implicit k-wise independent graphs and their explicit materializations.

Vertices are 0-based.  Edge {u, v} with u < v has index v(v-1)/2 + u, which
enumerates all C(N, 2) pairs column by column.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import sparse

from . import kwise
from .kwise import DyadicProb, VariableScheme
from .rng import RngStream

MATERIALIZE_LIMIT = 1 << 31
CHUNK = 1 << 22
MAX_TREE_DEPTH = 8

GRAPH_MAGIC = b"KWIG"
GRAPH_VERSION = 1
TAG_LEAF, TAG_AND, TAG_PLANT, TAG_CLIQUE_PARTITION = 0, 1, 2, 3


def num_pairs(N: int) -> int:
    return N * (N - 1) // 2


def edge_index(u: int, v: int, N: int) -> int:
    if u == v:
        raise ValueError("self-loops have no edge index")
    if u > v:
        u, v = v, u
    if u < 0 or v >= N:
        raise ValueError(f"vertex out of range 0..{N - 1}")
    return v * (v - 1) // 2 + u


def _triangular(v: np.ndarray) -> np.ndarray:
    """v(v-1)/2 without the int64 overflow of forming v(v-1) first."""
    return np.where(v % 2 == 0, (v // 2) * (v - 1), v * ((v - 1) // 2))


def edge_indices(u, v) -> np.ndarray:
    """Vectorized edge index; the pairs may come in either order."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    return _triangular(hi) + lo


def edge_pairs(indices) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`edge_indices`: (u, v) arrays with u < v."""
    idx = np.asarray(indices, dtype=np.int64)
    v = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) / 2).astype(np.int64)
    # float rounding can land one off in either direction
    v -= (_triangular(v) > idx).astype(np.int64)
    v += (_triangular(v + 1) <= idx).astype(np.int64)
    return idx - _triangular(v), v


# ------------------------------------------------------------ explicit graphs


class ExplicitGraph:
    """An undirected simple graph stored as a sorted edge-index array."""

    def __init__(self, N: int, edge_idx) -> None:
        idx = np.unique(np.asarray(edge_idx, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= num_pairs(N)):
            raise ValueError("edge index out of range")
        self.N = N
        self.edge_idx = idx

    @classmethod
    def from_edges(cls, N: int, edges) -> "ExplicitGraph":
        edges = list(edges)
        if not edges:
            return cls(N, [])
        u, v = np.asarray(edges, dtype=np.int64).T
        if np.any(u == v):
            raise ValueError("self-loops are not allowed")
        if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= N:
            raise ValueError("vertex out of range")
        return cls(N, edge_indices(u, v))

    @classmethod
    def from_dense(cls, adjacency) -> "ExplicitGraph":
        a = np.asarray(adjacency, dtype=bool)
        u, v = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], edge_indices(u, v))

    @classmethod
    def complete(cls, N: int) -> "ExplicitGraph":
        return cls(N, np.arange(num_pairs(N)))

    @classmethod
    def empty(cls, N: int) -> "ExplicitGraph":
        return cls(N, [])

    @property
    def edge_count(self) -> int:
        return int(self.edge_idx.size)

    @cached_property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return edge_pairs(self.edge_idx)

    def edge_list(self) -> list[tuple[int, int]]:
        u, v = self.edges
        return list(zip(u.tolist(), v.tolist()))

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        u, v = self.edges
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.ones(rows.size, dtype=np.int8)
        m = sparse.csr_matrix((data, (rows, cols)), shape=(self.N, self.N))
        m.sort_indices()
        return m

    @cached_property
    def dense(self) -> np.ndarray:
        a = np.zeros((self.N, self.N), dtype=bool)
        u, v = self.edges
        a[u, v] = True
        a[v, u] = True
        return a

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr.indptr).astype(np.int64)

    def neighbors(self, v: int) -> np.ndarray:
        c = self.csr
        return c.indices[c.indptr[v] : c.indptr[v + 1]]

    @cached_property
    def adjacency_sets(self) -> list[frozenset[int]]:
        return [frozenset(self.neighbors(v).tolist()) for v in range(self.N)]

    @cached_property
    def adjacency_bits(self) -> list[int]:
        """Neighbourhoods as Python-int bitsets."""
        out = []
        for v in range(self.N):
            mask = 0
            for w in self.neighbors(v).tolist():
                mask |= 1 << w
            out.append(mask)
        return out

    def has_edge(self, u: int, v: int) -> bool:
        i = edge_index(u, v, self.N)
        pos = np.searchsorted(self.edge_idx, i)
        return bool(pos < self.edge_idx.size and self.edge_idx[pos] == i)

    def complement(self) -> "ExplicitGraph":
        mask = np.ones(num_pairs(self.N), dtype=bool)
        mask[self.edge_idx] = False
        return ExplicitGraph(self.N, np.nonzero(mask)[0])

    def induced(self, vertices) -> "ExplicitGraph":
        vs = list(vertices)
        sub = self.dense[np.ix_(vs, vs)]
        return ExplicitGraph.from_dense(sub)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExplicitGraph):
            return NotImplemented
        return self.N == other.N and np.array_equal(self.edge_idx, other.edge_idx)

    def __repr__(self) -> str:
        return f"ExplicitGraph(N={self.N}, edges={self.edge_count})"


def write_edge_list(g: ExplicitGraph, out: io.TextIOBase) -> None:
    """One ``u v`` line per edge, 0-based, in edge-index order."""
    u, v = g.edges
    for a, b in zip(u.tolist(), v.tolist()):
        out.write(f"{a} {b}\n")


def read_edge_list(text: str, N: int | None = None) -> ExplicitGraph:
    edges = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            a, b = line.split()[:2]
            edges.append((int(a), int(b)))
    if N is None:
        N = 1 + max((max(e) for e in edges), default=-1)
    return ExplicitGraph.from_edges(N, edges)


def gnp_graph(N: int, p: float, rng: RngStream) -> ExplicitGraph:
    """A fully independent G(N, p) sample, for baselines."""
    M = num_pairs(N)
    gen = rng.generator()
    if M <= 1 << 24:
        return ExplicitGraph(N, np.nonzero(gen.random(M) < p)[0])
    count = int(gen.binomial(M, p))
    chosen: set[int] = set()
    while len(chosen) < count:
        chosen.update(gen.integers(0, M, size=count - len(chosen)).tolist())
    return ExplicitGraph(N, sorted(chosen))


# ------------------------------------------------------------ implicit graphs


@dataclass(frozen=True)
class GraphParams:
    N: int
    p: DyadicProb
    k: int

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError("need N >= 2")
        if self.k < 1:
            raise ValueError("need k >= 1")


class ImplicitGraph:
    """Edge oracle over the C(N, 2) potential edges.

    Subclasses implement :meth:`edge_bits`; everything else is derived.
    """

    params: GraphParams

    @property
    def N(self) -> int:
        return self.params.N

    def edge_bits(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.N:
            raise ValueError(f"vertex {v} out of range 0..{self.N - 1}")

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return bool(self.edge_bits(np.array([edge_index(u, v, self.N)]))[0])

    def has_edges(self, u, v) -> np.ndarray:
        return self.edge_bits(edge_indices(u, v))

    def neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        others = np.delete(np.arange(self.N), v)
        return others[self.has_edges(np.full(others.size, v), others)]

    def degree(self, v: int) -> int:
        return int(self.neighbors(v).size)

    def materialize(self, limit: int = MATERIALIZE_LIMIT, chunk: int = CHUNK) -> ExplicitGraph:
        M = num_pairs(self.N)
        if M > limit:
            raise ValueError(f"C(N,2) = {M} exceeds materialization limit {limit}")
        found = []
        for start in range(0, M, chunk):
            idx = np.arange(start, min(M, start + chunk), dtype=np.int64)
            found.append(idx[self.edge_bits(idx)])
        return ExplicitGraph(self.N, np.concatenate(found) if found else [])

    def to_bytes(self) -> bytes:
        return GRAPH_MAGIC + struct.pack("<B", GRAPH_VERSION) + self._encode()

    def _encode(self) -> bytes:
        raise NotImplementedError

    def depth(self) -> int:
        return 1


class SchemeGraph(ImplicitGraph):
    """A single polynomial family covering every potential edge."""

    def __init__(self, N: int, scheme: VariableScheme) -> None:
        if scheme.M != num_pairs(N):
            raise ValueError("scheme must have one variable per potential edge")
        self.scheme = scheme
        self.params = GraphParams(N, scheme.p, scheme.k)

    def edge_bits(self, idx: np.ndarray) -> np.ndarray:
        return kwise.eval_vars(self.scheme, idx)

    def _encode(self) -> bytes:
        return struct.pack("<B", TAG_LEAF) + kwise.scheme_to_bytes(self.scheme)


class AndGraph(ImplicitGraph):
    """Edge present iff present in both children (density multiplies)."""

    def __init__(self, left: ImplicitGraph, right: ImplicitGraph) -> None:
        if left.N != right.N:
            raise ValueError(f"cannot intersect graphs on {left.N} and {right.N} vertices")
        if 1 + max(left.depth(), right.depth()) > MAX_TREE_DEPTH:
            raise ValueError(f"combinator tree deeper than {MAX_TREE_DEPTH}")
        self.left, self.right = left, right
        p = left.params.p.times(right.params.p)
        self.params = GraphParams(left.N, p, min(left.params.k, right.params.k))

    def edge_bits(self, idx: np.ndarray) -> np.ndarray:
        return self.left.edge_bits(idx) & self.right.edge_bits(idx)

    def depth(self) -> int:
        return 1 + max(self.left.depth(), self.right.depth())

    def _encode(self) -> bytes:
        return struct.pack("<B", TAG_AND) + self.left._encode() + self.right._encode()


def generate(N: int, p: DyadicProb, k: int, rng: RngStream | None) -> SchemeGraph:
    """Sample a k-wise independent graph; ``rng=None`` gives the zero seed
    (the complete graph)."""
    return SchemeGraph(N, kwise.scheme_new(num_pairs(N), k, p, None, rng))


def intersect(g1: ImplicitGraph, g2: ImplicitGraph) -> AndGraph:
    return AndGraph(g1, g2)


# ------------------------------------------------------------ seed files

# tag -> decoder(data, offset) -> (graph, new offset); other modules register
# their node types here.
DECODERS: dict[int, Callable[[bytes, int], tuple[ImplicitGraph, int]]] = {}


def _decode_leaf(data: bytes, offset: int) -> tuple[ImplicitGraph, int]:
    scheme, offset = kwise.scheme_from_bytes(data, offset)
    disc = 1 + 8 * scheme.M
    N = (1 + math.isqrt(disc)) // 2
    if num_pairs(N) != scheme.M:
        raise ValueError("leaf scheme size is not C(N,2)")
    return SchemeGraph(N, scheme), offset


def _decode_and(data: bytes, offset: int) -> tuple[ImplicitGraph, int]:
    left, offset = decode_node(data, offset)
    right, offset = decode_node(data, offset)
    return AndGraph(left, right), offset


DECODERS[TAG_LEAF] = _decode_leaf
DECODERS[TAG_AND] = _decode_and


def decode_node(data: bytes, offset: int) -> tuple[ImplicitGraph, int]:
    tag = data[offset]
    if tag not in DECODERS:
        from . import adversarial  # noqa: F401  registers tags 2 and 3

    if tag not in DECODERS:
        raise ValueError(f"unknown graph node tag {tag}")
    return DECODERS[tag](data, offset + 1)


def graph_from_bytes(data: bytes) -> ImplicitGraph:
    if data[:4] != GRAPH_MAGIC:
        raise ValueError("not a KWIG seed file")
    if data[4] != GRAPH_VERSION:
        raise ValueError(f"unsupported KWIG version {data[4]}")
    g, offset = decode_node(data, 5)
    if offset != len(data):
        raise ValueError("trailing bytes in seed file")
    return g


def save_graph(g: ImplicitGraph, path) -> None:
    with open(path, "wb") as fh:
        fh.write(g.to_bytes())


def load_graph(path) -> ImplicitGraph:
    with open(path, "rb") as fh:
        return graph_from_bytes(fh.read())
