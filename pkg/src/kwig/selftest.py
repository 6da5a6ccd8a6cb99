"""Exhaustive small-instance self checks.

Each check enumerates a whole space (all field elements, all seeds, all
odd subsets, all block pairs) and stops at the first violated invariant.
``KWIG_SELFTEST_BUDGET`` caps the enumeration size; checks above the cap
are skipped with a warning, never sampled.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import field as gf
from . import kwise
from .adversarial import CliquePartitionGraph, build_block_design
from .graph import edge_pairs, num_pairs
from .kwise import DyadicProb, ForcedPattern
from .verify.connectivity import connected
from .verify.matching import has_perfect_matching

DEFAULT_BUDGET = 1 << 22


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass", "fail" or "skip"
    detail: str = ""


class _Skip(Exception):
    pass


class InvariantError(Exception):
    pass


def _ensure(condition, message: str) -> None:
    # explicit raise so the checks survive python -O
    if not condition:
        raise InvariantError(message)


def _budget() -> int:
    try:
        return int(os.environ.get("KWIG_SELFTEST_BUDGET", DEFAULT_BUDGET))
    except ValueError:
        return DEFAULT_BUDGET


def _need(size: int, budget: int) -> None:
    if size > budget:
        raise _Skip(f"needs {size} evaluations, budget {budget}")


def check_field_table(table: Mapping[int, int], budget: int) -> None:
    for m, poly in sorted(table.items()):
        _ensure(poly >> m == 1, f"field axiom: degree of reduction polynomial for m={m}")
        _ensure(gf.is_irreducible(poly), f"field axiom: reduction polynomial for m={m} is reducible")


def check_field_axioms(table: Mapping[int, int], budget: int) -> None:
    """Exhaustive over GF(2^m) for m <= 8: inverses exist, multiplication is
    associative and distributes over addition, array and scalar paths agree."""
    for m in range(1, 9):
        _need((1 << m) ** 2, budget)
        spec = gf.FieldSpec(m, table[m])
        q = spec.order
        a = np.repeat(np.arange(q, dtype=np.uint64), q)
        b = np.tile(np.arange(q, dtype=np.uint64), q)
        prod = gf.mul_array_bitwise(a, b, spec).reshape(q, q)
        _ensure(np.array_equal(prod, prod.T), f"field axiom: commutativity fails in GF(2^{m})")
        for x in range(1, q):
            _ensure(np.count_nonzero(prod[x] == 1) == 1, f"field axiom: {x} has no unique inverse in GF(2^{m})")
        for x, y in itertools.product(range(q), repeat=2):
            row = prod[x, y]
            _ensure(prod[row, 3 % q] == prod[x, prod[y, 3 % q]], f"field axiom: associativity in GF(2^{m})")
            _ensure(prod[x, y ^ 1] == row ^ prod[x, 1], f"field axiom: distributivity in GF(2^{m})")
        _ensure(np.array_equal(gf.mul_array(a, b, spec).reshape(q, q), prod), f"field axiom: log tables disagree in GF(2^{m})")


def check_kwise_exact(table: Mapping[int, int], budget: int) -> None:
    """Every k-subset of variables is exactly independent over all seeds."""
    for M, k, p in [(10, 2, "1/2"), (10, 3, "1/2"), (6, 2, "1/4"), (6, 3, "3/8")]:
        prob = DyadicProb.parse(p)
        F = kwise.field_for_family(M, prob).order
        _need(F**k * M, budget)
        tab = kwise.seed_space_table(M, k, prob)
        for subset in itertools.combinations(range(M), k):
            counts = kwise.pattern_counts(tab, subset)
            joint = kwise.JointDistribution(subset, counts, tab.shape[0])
            _ensure(joint.is_product(prob), f"k-wise exactness: M={M} k={k} p={p} subset {subset}")
        # the zero seed realizes a forced pattern
        for e0 in range(M + 1):
            s = kwise.forced_scheme(M, k, prob, ForcedPattern(e0, M - e0))
            _ensure(kwise.pattern_holds(s, ForcedPattern(e0, M - e0)), f"forced pattern: M={M} e0={e0}")


def check_clique_partition(table: Mapping[int, int], budget: int) -> None:
    """N=7: over all 64 odd subsets, edges are 1/2, pairs 1/4, no perfect
    matching, and connected only when V1 is everything."""
    N = 7
    M = num_pairs(N)
    graphs = []
    for mask in range(1 << N):
        if bin(mask).count("1") % 2:
            graphs.append(CliquePartitionGraph([(mask >> i) & 1 for i in range(N)]))
    _ensure(len(graphs) == 64, "clique partition: expected 64 odd subsets")
    bits = np.array([g.edge_bits(np.arange(M)) for g in graphs])
    _ensure(np.all(bits.sum(axis=0) == 32), "clique partition: edge probability is not 1/2")
    for i, j in itertools.combinations(range(M), 2):
        _ensure(np.sum(bits[:, i] & bits[:, j]) == 16, "clique partition: edge pair probability is not 1/4")
    _ensure(sum(has_perfect_matching(g.materialize())[0] for g in graphs) == 0, "clique partition: perfect matching found")
    _ensure(sum(connected(g.materialize()) for g in graphs) == 1, "clique partition: connected count is not 1")


def check_block_designs(table: Mapping[int, int], budget: int) -> None:
    for N, S in [(100, 3), (100, 5), (400, 7), (1000, 30)]:
        d = build_block_design(N, S)
        _need(d.block_count**2 // 2, budget)
        verts = d.blocks_vertices(np.arange(d.block_count))
        member = np.zeros((d.block_count, N), dtype=np.int32)
        np.put_along_axis(member, verts, 1, axis=1)
        overlap = member @ member.T
        np.fill_diagonal(overlap, 0)
        _ensure(overlap.max() <= 1, f"block design: N={N} S={S} blocks share an edge")
        # owner() inverts block membership for every covered pair
        u, v = edge_pairs(np.arange(num_pairs(d.covered)))
        block, iu, iv = d.owner(u, v)
        inside = block >= 0
        _ensure(np.all(verts[block[inside], iu[inside]] == u[inside]), f"block design: owner mismatch N={N} S={S}")
        _ensure(np.all(verts[block[inside], iv[inside]] == v[inside]), f"block design: owner mismatch N={N} S={S}")
        _ensure(inside.sum() == d.block_count * num_pairs(S), f"block design: pair coverage N={N} S={S}")


def check_tail_reference(table: Mapping[int, int], budget: int) -> None:
    value = kwise.tail_bound(100, 4, DyadicProb.parse("1/2"), DyadicProb.parse("1/2"))
    _ensure(abs(float(value) - 0.1024) < 1e-15, "tail bound: reference value 0.1024")


CHECKS: list[tuple[str, Callable[[Mapping[int, int], int], None]]] = [
    ("field-table", check_field_table),
    ("field-axioms", check_field_axioms),
    ("kwise-exactness", check_kwise_exact),
    ("clique-partition", check_clique_partition),
    ("block-design", check_block_designs),
    ("tail-reference", check_tail_reference),
]

FAULTS = ("field-table",)


def corrupted_table() -> dict[int, int]:
    """The reduction table with GF(2^8)'s polynomial replaced by the reducible
    x^8 + 1 (fault injection)."""
    table = dict(gf.IRREDUCIBLE)
    table[8] = 0x101
    return table


def run_selftest(inject: str | None = None, budget: int | None = None) -> list[CheckResult]:
    """Run every check in order; stops at the first failure."""
    if inject is not None and inject not in FAULTS:
        raise ValueError(f"unknown fault {inject!r}; choose from {FAULTS}")
    table = corrupted_table() if inject == "field-table" else dict(gf.IRREDUCIBLE)
    budget = _budget() if budget is None else budget
    results = []
    for name, check in CHECKS:
        try:
            check(table, budget)
        except _Skip as skip:
            results.append(CheckResult(name, "skip", str(skip)))
        except InvariantError as exc:
            results.append(CheckResult(name, "fail", str(exc)))
            break
        else:
            results.append(CheckResult(name, "pass"))
    return results
