"""Arithmetic in the binary fields GF(2^m), 1 <= m <= 63.

Elements are plain integers whose bit i is the coefficient of x^i.  Scalar
helpers work on Python ints; the ``*_array`` helpers work on numpy uint64
arrays and are what the graph code uses for bulk edge evaluation.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UnsupportedSizeError

MAX_DEGREE = 63

# Lowest-weight irreducible polynomial for every degree, full mask including
# the x^m and constant terms.  Trinomial x^m + x^a + 1 with the smallest a when
# one exists, otherwise the lexicographically smallest pentanomial
# x^m + x^c + x^b + x^a + 1 (c, then b, then a smallest).  Seeds are only
# portable while this table is unchanged.
IRREDUCIBLE: dict[int, int] = {
    1: 0x3, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83,
    8: 0x11B, 9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201B,
    14: 0x4021, 15: 0x8003, 16: 0x1002B, 17: 0x20009, 18: 0x40009,
    19: 0x80027, 20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021,
    24: 0x100001B, 25: 0x2000009, 26: 0x400001B, 27: 0x8000027,
    28: 0x10000003, 29: 0x20000005, 30: 0x40000003, 31: 0x80000009,
    32: 0x10000008D, 33: 0x200000401, 34: 0x400000081, 35: 0x800000005,
    36: 0x1000000201, 37: 0x2000000053, 38: 0x4000000063,
    39: 0x8000000011, 40: 0x10000000039, 41: 0x20000000009,
    42: 0x40000000081, 43: 0x80000000059, 44: 0x100000000021,
    45: 0x20000000001B, 46: 0x400000000003, 47: 0x800000000021,
    48: 0x100000000002D, 49: 0x2000000000201, 50: 0x400000000001D,
    51: 0x800000000004B, 52: 0x10000000000009, 53: 0x20000000000047,
    54: 0x40000000000201, 55: 0x80000000000081, 56: 0x100000000000095,
    57: 0x200000000000011, 58: 0x400000000080001, 59: 0x800000000000095,
    60: 0x1000000000000003, 61: 0x2000000000000027, 62: 0x4000000020000001,
    63: 0x8000000000000003,
}

# Log/antilog tables are built for fields up to this degree (about 200 MB at
# m = 24); larger fields fall back to shift-and-reduce on arrays.
LOG_TABLE_MAX_DEGREE = 24


@dataclass(frozen=True)
class FieldSpec:
    m: int
    reduction_polynomial: int

    def __post_init__(self) -> None:
        if not 1 <= self.m <= MAX_DEGREE:
            raise UnsupportedSizeError(f"field degree {self.m} outside 1..{MAX_DEGREE}")
        if self.reduction_polynomial.bit_length() != self.m + 1:
            raise ValueError("reduction polynomial must have degree m")

    @property
    def order(self) -> int:
        return 1 << self.m

    def check(self, value: int) -> int:
        if not 0 <= value < self.order:
            raise ValueError(f"{value} is not an element of GF(2^{self.m})")
        return value


def field_for_degree(m: int) -> FieldSpec:
    if m not in IRREDUCIBLE:
        raise UnsupportedSizeError(f"no field of degree {m}")
    return FieldSpec(m, IRREDUCIBLE[m])


def field_for_size(min_elements: int) -> FieldSpec:
    """Smallest tabulated field with at least ``min_elements`` elements."""
    if min_elements < 1:
        raise ValueError("min_elements must be positive")
    if min_elements > 1 << MAX_DEGREE:
        raise UnsupportedSizeError(f"{min_elements} exceeds 2^{MAX_DEGREE}")
    m = max(1, (min_elements - 1).bit_length())
    return field_for_degree(m)


def add(a: int, b: int) -> int:
    return a ^ b


def mul(a: int, b: int, spec: FieldSpec) -> int:
    return _mulmod(a, b, spec.reduction_polynomial, spec.m)


def _mulmod(a: int, b: int, poly: int, m: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return result


def power(a: int, e: int, spec: FieldSpec) -> int:
    result = 1
    while e:
        if e & 1:
            result = mul(result, a, spec)
        a = mul(a, a, spec)
        e >>= 1
    return result


def inv(a: int, spec: FieldSpec) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    # a^(2^m - 2) = a^-1 in the multiplicative group of order 2^m - 1
    return power(a, spec.order - 2, spec)


def eval_poly(coefficients: Sequence[int], point: int, spec: FieldSpec) -> int:
    """Horner evaluation; ``coefficients`` is constant-term first."""
    acc = 0
    for c in reversed(coefficients):
        acc = mul(acc, point, spec) ^ c
    return acc


def interpolate(points: Sequence[int], values: Sequence[int], spec: FieldSpec) -> list[int]:
    """Coefficients (constant first) of the unique polynomial of length
    ``len(points)`` through the given points, by Lagrange's formula."""
    n = len(points)
    if len(set(points)) != n or len(values) != n:
        raise ValueError("need distinct points and matching values")
    coeffs = [0] * n
    for i, (xi, yi) in enumerate(zip(points, values)):
        basis = [1]
        denom = 1
        for j, xj in enumerate(points):
            if j == i:
                continue
            # basis *= (x - xj); subtraction is xor in characteristic 2
            shifted = [0] + basis
            for t, b in enumerate(basis):
                shifted[t] ^= mul(b, xj, spec)
            basis = shifted
            denom = mul(denom, xi ^ xj, spec)
        scale = mul(yi, inv(denom, spec), spec)
        for t, b in enumerate(basis):
            coeffs[t] ^= mul(b, scale, spec)
    return coeffs


def is_irreducible(poly: int) -> bool:
    """Ben-Or test over GF(2) for a polynomial given as a bit mask."""
    m = poly.bit_length() - 1
    if m < 1:
        return False
    if m == 1:
        return True
    t = 2
    for _ in range(m // 2):
        t = _mulmod(t, t, poly, m)
        if _poly_gcd(poly, t ^ 2) != 1:
            return False
    return True


def _poly_mod(a: int, f: int) -> int:
    df = f.bit_length() - 1
    while a and a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def _poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _poly_mod(a, b)
    return a


def _prime_factors(n: int) -> list[int]:
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return factors


def primitive_element(spec: FieldSpec) -> int:
    """Smallest generator of the multiplicative group."""
    order = spec.order - 1
    if order == 1:
        return 1
    cofactors = [order // q for q in _prime_factors(order)]
    for g in range(2, spec.order):
        if all(power(g, c, spec) != 1 for c in cofactors):
            return g
    raise AssertionError("multiplicative group has no generator")


# ---------------------------------------------------------------- arrays


def _u64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint64)


def mul_array_bitwise(a, b, spec: FieldSpec) -> np.ndarray:
    """Elementwise product by shift-and-reduce, MSB of ``b`` first."""
    a = _u64(a)
    b = _u64(b)
    a, b = np.broadcast_arrays(a, b)
    poly = np.uint64(spec.reduction_polynomial)
    top = np.uint64(spec.m)
    one = np.uint64(1)
    result = np.zeros(a.shape, dtype=np.uint64)
    for i in range(spec.m - 1, -1, -1):
        result <<= one
        result ^= poly * ((result >> top) & one)
        result ^= a * ((b >> np.uint64(i)) & one)
    return result


@dataclass(frozen=True)
class _LogTables:
    log: np.ndarray  # log[0] is unused
    exp: np.ndarray  # length 2 * (F - 1) so log sums need no reduction


@functools.lru_cache(maxsize=4)
def _log_tables(spec: FieldSpec) -> _LogTables:
    size = spec.order - 1
    g = primitive_element(spec)
    dtype = np.uint32 if spec.m <= 32 else np.uint64
    powers = np.empty(size, dtype=np.uint64)
    powers[0] = 1
    filled = 1
    while filled < size:
        step = min(filled, size - filled)
        factor = power(g, filled, spec)
        powers[filled:filled + step] = mul_array_bitwise(powers[:step], factor, spec)
        filled += step
    log = np.zeros(spec.order, dtype=np.int64)
    log[powers.astype(np.int64)] = np.arange(size, dtype=np.int64)
    exp = np.concatenate([powers, powers]).astype(dtype)
    return _LogTables(log=log, exp=exp)


def log_array(a, spec: FieldSpec) -> np.ndarray:
    """Discrete logs (zero maps to 0; callers mask zeros themselves)."""
    return _log_tables(spec).log[_u64(a).astype(np.int64)]


def mul_array(a, b, spec: FieldSpec) -> np.ndarray:
    a = _u64(a)
    b = _u64(b)
    if spec.m > LOG_TABLE_MAX_DEGREE:
        return mul_array_bitwise(a, b, spec)
    tables = _log_tables(spec)
    a, b = np.broadcast_arrays(a, b)
    out = tables.exp[tables.log[a.astype(np.int64)] + tables.log[b.astype(np.int64)]].astype(np.uint64)
    out[(a == 0) | (b == 0)] = 0
    return out


def eval_poly_array(coefficients, points, spec: FieldSpec) -> np.ndarray:
    """Evaluate polynomials at many points.

    ``coefficients`` has shape (k,) for one shared polynomial or (k, n) for a
    separate polynomial per point; ``points`` has shape (n,).
    """
    coeffs = _u64(coefficients)
    points = _u64(points)
    k = coeffs.shape[0]
    acc = np.broadcast_to(coeffs[k - 1], points.shape).copy()
    if k == 1:
        return acc
    if spec.m > LOG_TABLE_MAX_DEGREE:
        for i in range(k - 2, -1, -1):
            acc = mul_array_bitwise(acc, points, spec)
            acc ^= coeffs[i]
        return acc
    tables = _log_tables(spec)
    log_points = tables.log[points.astype(np.int64)]
    zero_points = points == 0
    for i in range(k - 2, -1, -1):
        zero = (acc == 0) | zero_points
        acc = tables.exp[tables.log[acc.astype(np.int64)] + log_points].astype(np.uint64)
        acc[zero] = 0
        acc ^= coeffs[i]
    return acc


def table_lines() -> list[str]:
    return [f"{m} {IRREDUCIBLE[m]:#x}" for m in sorted(IRREDUCIBLE)]
