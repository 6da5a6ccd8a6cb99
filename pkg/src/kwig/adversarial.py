"""Constructions that are k-wise independent yet behave unlike G(N, p).

* :class:`CliquePartitionGraph` - pairwise independent at p = 1/2, but two
  disjoint cliques (never connected unless one side is empty, never a
  perfect matching because one side is odd).
* :class:`BlockDesign` / :class:`PlantedGraph` - edge-disjoint S-sets, each
  decided by its own forced-pattern family, so a prescribed graph H appears
  induced on some block far below H's G(N, p) threshold.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import field as gf
from . import kwise
from .errors import DefianceImpossibleError, EnumerationTooLargeError, InfeasibleDesignError
from .graph import (
    DECODERS,
    TAG_CLIQUE_PARTITION,
    TAG_PLANT,
    ExplicitGraph,
    GraphParams,
    ImplicitGraph,
    edge_indices,
    edge_pairs,
    num_pairs,
)
from .kwise import DyadicProb, ForcedPattern, VariableScheme
from .rng import RngStream

HALF = DyadicProb(1, 1)


# ------------------------------------------------------------ clique partition


class CliquePartitionGraph(ImplicitGraph):
    """Cliques on V0 and V1 with no edges between; |V1| odd."""

    def __init__(self, membership) -> None:
        m = np.asarray(membership, dtype=bool).copy()
        if m.size < 2:
            raise ValueError("need N >= 2")
        if int(m.sum()) % 2 != 1:
            raise ValueError("V1 must have odd cardinality")
        m.setflags(write=False)
        self.membership = m
        self.params = GraphParams(m.size, HALF, 2)

    def edge_bits(self, idx: np.ndarray) -> np.ndarray:
        u, v = edge_pairs(idx)
        return self.membership[u] == self.membership[v]

    def _encode(self) -> bytes:
        bitmap = np.packbits(self.membership, bitorder="little").tobytes()
        return struct.pack("<BQ", TAG_CLIQUE_PARTITION, self.N) + bitmap


def sample_clique_partition(N: int, rng: RngStream) -> CliquePartitionGraph:
    """Vertices 0..N-2 pick sides by fair coins; vertex N-1 fixes the parity,
    which makes V1 uniform over odd-cardinality subsets."""
    if N < 5:
        raise ValueError("clique partition needs N >= 5")
    bits = np.empty(N, dtype=bool)
    bits[:-1] = rng.bits(0, N - 1)
    bits[-1] = int(bits[:-1].sum()) % 2 == 0
    return CliquePartitionGraph(bits)


def _decode_clique_partition(data: bytes, offset: int):
    (N,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    nbytes = (N + 7) // 8
    bits = np.unpackbits(np.frombuffer(data, np.uint8, nbytes, offset), count=N, bitorder="little")
    return CliquePartitionGraph(bits.astype(bool)), offset + nbytes


# ------------------------------------------------------------ block design


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def largest_prime_at_most(n: int) -> int | None:
    while n >= 2:
        if is_prime(n):
            return n
        n -= 1
    return None


@dataclass(frozen=True)
class BlockDesign:
    """Lines of the grid Z_S x Z_q: block (a, b) = {(i, a*i + b mod q)}.

    Vertex (i, c) is i*q + c; block index is a*q + b.  Two distinct lines
    meet in at most one row, so blocks pairwise share at most one vertex.
    """

    N: int
    S: int
    q: int

    @property
    def block_count(self) -> int:
        return self.q * self.q

    @property
    def covered(self) -> int:
        return self.S * self.q

    def block_vertices(self, b: int) -> np.ndarray:
        a, c = divmod(b, self.q)
        i = np.arange(self.S, dtype=np.int64)
        return i * self.q + (a * i + c) % self.q

    def blocks_vertices(self, blocks) -> np.ndarray:
        """(len(blocks), S) vertex array, row position order."""
        b = np.asarray(blocks, dtype=np.int64)
        a, c = np.divmod(b, self.q)
        i = np.arange(self.S, dtype=np.int64)
        return i[None, :] * self.q + (a[:, None] * i[None, :] + c[:, None]) % self.q

    def owner(self, u, v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Owning block of each pair and the row positions of u and v in it;
        block is -1 for pairs inside no block."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        q = self.q
        iu, cu = np.divmod(u, q)
        iv, cv = np.divmod(v, q)
        ok = (u < self.covered) & (v < self.covered) & (iu != iv)
        diff = np.where(ok, iu - iv, 1)
        inverses = np.array([pow(int(d) % q, q - 2, q) if d % q else 0 for d in range(-self.S, self.S + 1)], dtype=np.int64)
        slope = ((cu - cv) % q) * inverses[diff + self.S] % q
        intercept = (cu - slope * iu) % q
        block = np.where(ok, slope * q + intercept, -1)
        return block, iu, iv


def build_block_design(N: int, S: int) -> BlockDesign:
    if S < 3:
        raise InfeasibleDesignError("block size must be at least 3")
    if S * S > N:
        raise InfeasibleDesignError(f"block size {S} exceeds sqrt(N) for N={N}")
    q = largest_prime_at_most(N // S)
    if q is None or q < S:
        raise InfeasibleDesignError(f"no prime q with {S} <= q <= {N // S}")
    return BlockDesign(N, S, q)


# ------------------------------------------------------------ pattern planting


def pattern_order(H: ExplicitGraph) -> tuple[np.ndarray, int, int]:
    """Variable number of each within-block edge index: H's non-edges first,
    then H's edges, each in edge-index order.  Returns (map, e0, e1)."""
    M = num_pairs(H.N)
    is_edge = np.zeros(M, dtype=bool)
    is_edge[H.edge_idx] = True
    order = np.concatenate([np.nonzero(~is_edge)[0], np.nonzero(is_edge)[0]])
    var_of_local = np.empty(M, dtype=np.int64)
    var_of_local[order] = np.arange(M)
    return var_of_local, int((~is_edge).sum()), int(is_edge.sum())


class PlantedGraph(ImplicitGraph):
    """Edges inside a design block are decided by that block's forced-pattern
    family (seed = words [b*k, (b+1)*k) of the block stream); every other
    edge by the residual family indexed by global edge index."""

    def __init__(self, design: BlockDesign, H: ExplicitGraph, k: int, p: DyadicProb,
                 block_key: bytes, residual: VariableScheme) -> None:
        if H.N != design.S:
            raise ValueError("pattern must have exactly S vertices")
        if residual.M != num_pairs(design.N) or residual.k != k or residual.p != p:
            raise ValueError("residual family must cover C(N,2) edges with the same k and p")
        self.design = design
        self.H = H
        self.block_stream = RngStream(block_key)
        self.residual = residual
        self.var_of_local, self.e0, self.e1 = pattern_order(H)
        self.template = kwise.forced_scheme(num_pairs(design.S), k, p, ForcedPattern(self.e0, self.e1))
        self.params = GraphParams(design.N, p, k)

    @property
    def block_field(self) -> gf.FieldSpec:
        return self.template.field

    def block_seeds(self, blocks) -> np.ndarray:
        """(k, len(blocks)) seed coefficients."""
        b = np.asarray(blocks, dtype=np.int64)
        k, m = self.params.k, self.block_field.m
        starts = (b * k)[:, None] + np.arange(k)[None, :]
        words = self.block_stream.words_at(starts.ravel())
        return (words >> np.uint64(64 - m)).reshape(b.size, k).T.copy()

    def block_scheme(self, b: int) -> VariableScheme:
        return self.template.with_seed(self.block_seeds([b])[:, 0].tolist())

    def _block_bits(self, blocks: np.ndarray, var: np.ndarray) -> np.ndarray:
        seeds = self.block_seeds(blocks)
        z = gf.eval_poly_array(seeds, var.astype(np.uint64), self.block_field)
        return kwise.threshold_bits(z, var < self.e0, self.template.F, self.template.threshold)

    def edge_bits(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        u, v = edge_pairs(idx)
        block, iu, iv = self.design.owner(u, v)
        out = np.empty(idx.size, dtype=bool)
        inside = block >= 0
        if inside.any():
            local = edge_indices(iu[inside], iv[inside])
            out[inside] = self._block_bits(block[inside], self.var_of_local[local])
        if (~inside).any():
            out[~inside] = kwise.eval_vars(self.residual, idx[~inside])
        return out

    def pattern_hits(self, blocks) -> np.ndarray:
        """Whether each block's family realizes the forced pattern, i.e. the
        block induces H."""
        b = np.asarray(blocks, dtype=np.int64)
        M = self.template.M
        seeds = np.repeat(self.block_seeds(b), M, axis=1)
        var = np.tile(np.arange(M, dtype=np.uint64), b.size)
        z = gf.eval_poly_array(seeds, var, self.block_field)
        bits = kwise.threshold_bits(z, var < np.uint64(self.e0), self.template.F, self.template.threshold)
        bits = bits.reshape(b.size, M)
        return ~bits[:, : self.e0].any(axis=1) & bits[:, self.e0 :].all(axis=1)

    def find_planted_block(self, start: int = 0, stop: int | None = None, batch: int | None = None) -> int | None:
        """Lowest block index in [start, stop) that induces H, or None."""
        stop = self.design.block_count if stop is None else min(stop, self.design.block_count)
        if batch is None:
            batch = max(1, (1 << 22) // self.template.M)
        for lo in range(start, stop, batch):
            blocks = np.arange(lo, min(stop, lo + batch), dtype=np.int64)
            hits = np.nonzero(self.pattern_hits(blocks))[0]
            if hits.size:
                return int(blocks[hits[0]])
        return None

    def induces(self, vertices, H: ExplicitGraph | None = None) -> bool:
        """Check through the edge oracle that ``vertices`` (in H's vertex
        order) induce exactly H."""
        H = self.H if H is None else H
        vs = np.asarray(vertices, dtype=np.int64)
        a, b = edge_pairs(np.arange(num_pairs(H.N)))
        got = self.has_edges(vs[a], vs[b])
        want = np.zeros(got.size, dtype=bool)
        want[H.edge_idx] = True
        return bool(np.array_equal(got, want))

    def pattern_probability(self, budget: int = kwise.ENUMERATION_BUDGET) -> tuple[Fraction, bool]:
        """Per-block probability of the pattern: exact (by enumeration of the
        block seed space) when affordable, else the F^-k lower bound.
        Returns (value, exact)."""
        F, k, M = self.template.F, self.params.k, self.template.M
        try:
            if F**k * M > budget:
                raise EnumerationTooLargeError("pattern enumeration too large")
            table = kwise.seed_space_table(M, k, self.params.p, self.template.orientations, budget=budget)
        except EnumerationTooLargeError:
            return Fraction(1, F**k), False
        hits = ~table[:, : self.e0].any(axis=1) & table[:, self.e0 :].all(axis=1)
        return Fraction(int(hits.sum()), table.shape[0]), True

    def _encode(self) -> bytes:
        d = self.design
        head = struct.pack("<BQHQHQBH", TAG_PLANT, d.N, d.S, d.q, self.params.k,
                           self.params.p.numerator, self.params.p.ell, self.H.edge_count)
        edges = b"".join(struct.pack("<HH", a, b) for a, b in self.H.edge_list())
        return head + edges + self.block_stream.key + kwise.scheme_to_bytes(self.residual)


def _decode_plant(data: bytes, offset: int):
    fmt = "<QHQHQBH"
    N, S, q, k, num, ell, ecount = struct.unpack_from(fmt, data, offset)
    offset += struct.calcsize(fmt)
    edges = [struct.unpack_from("<HH", data, offset + 4 * i) for i in range(ecount)]
    offset += 4 * ecount
    key = data[offset : offset + 16]
    offset += 16
    residual, offset = kwise.scheme_from_bytes(data, offset)
    design = build_block_design(N, S)
    if design.q != q:
        raise ValueError("stored design modulus disagrees with (N, S)")
    H = ExplicitGraph.from_edges(S, edges)
    return PlantedGraph(design, H, k, DyadicProb(num, ell), key, residual), offset


DECODERS[TAG_PLANT] = _decode_plant
DECODERS[TAG_CLIQUE_PARTITION] = _decode_clique_partition


def plant_pattern(N: int, H: ExplicitGraph, k: int, p: DyadicProb, rng: RngStream) -> PlantedGraph:
    design = build_block_design(N, H.N)
    residual = kwise.scheme_new(num_pairs(N), k, p, None, rng.child("residual"))
    return PlantedGraph(design, H, k, p, rng.child("blocks").key, residual)


# ------------------------------------------------------------ defiance


def min_density_ratio(H: ExplicitGraph) -> Fraction:
    """rho(H): minimum of |U| / e(U) over vertex subsets spanning an edge."""
    if H.edge_count == 0:
        raise ValueError("H has no edges")
    adj = H.adjacency_bits
    n = H.N
    best: Fraction | None = None
    for size in range(2, n + 1):
        for U in itertools.combinations(range(n), size):
            mask = sum(1 << u for u in U)
            e = sum(bin(adj[u] & mask).count("1") for u in U) // 2
            if e and (best is None or Fraction(size, e) < best):
                best = Fraction(size, e)
    return best


@dataclass(frozen=True)
class DefianceParams:
    rho: Fraction
    p_star: float
    k_defy: int


def defiance_params(H: ExplicitGraph, N: int) -> DefianceParams:
    rho = min_density_ratio(H)
    if rho >= 2:
        raise DefianceImpossibleError("rho(H) = 2: a union of disjoint edges cannot be defied")
    k_defy = math.ceil(2 / rho - 1)
    return DefianceParams(rho, float(N) ** (-float(rho)), k_defy)
