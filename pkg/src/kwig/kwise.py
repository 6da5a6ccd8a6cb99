"""(M, k, p)-variable families built from random polynomials over GF(2^m).

A family is fixed by a field, a seed polynomial with k coefficients and a
threshold orientation per variable.  Variable j evaluates the seed at the
field element with binary value j and thresholds the result:

* STANDARD: X_j = 1 iff Z_j <  pF
* FLIPPED:  X_j = 1 iff Z_j >= F - pF

Both sets hold exactly pF field elements, so each X_j is 1 with probability
exactly p, and any k of the Z_j are independent and uniform.  The all-zero
seed drives every FLIPPED variable to 0 and every STANDARD one to 1, which is
how a prescribed pattern is forced with probability at least F^-k.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import field as gf
from .errors import EnumerationTooLargeError, PreconditionError, UnsupportedSizeError
from .rng import RngStream

STANDARD = False
FLIPPED = True

MAX_ELL = 62
ENUMERATION_BUDGET = 1 << 26
# Serialized schemes larger than this store a flipped-prefix count instead of
# a full orientation bitmap.
BITMAP_LIMIT = 1 << 24


@dataclass(frozen=True)
class DyadicProb:
    """p = numerator / 2^ell, kept with ell minimal."""

    numerator: int
    ell: int

    def __post_init__(self) -> None:
        if not 0 <= self.ell <= MAX_ELL:
            raise ValueError(f"ell must be in 0..{MAX_ELL}")
        if not 0 < self.numerator < (1 << self.ell):
            raise ValueError("need 0 < p < 1")
        if self.numerator % 2 == 0:
            raise ValueError("dyadic numerator must be odd (ell minimal)")

    @classmethod
    def of(cls, numerator: int, ell: int) -> "DyadicProb":
        if numerator <= 0:
            raise ValueError("need 0 < p < 1")
        while numerator % 2 == 0 and ell > 0:
            numerator //= 2
            ell -= 1
        return cls(numerator, ell)

    @classmethod
    def parse(cls, text: str, ell: int | None = None) -> "DyadicProb":
        """Accept ``a/2^b``, ``a/b`` with b a power of two, or a decimal.

        Decimals that are not dyadic are rounded to ``ell`` bits (default 30).
        """
        text = text.strip()
        if "^" in text:
            num, den = text.split("/")
            base, exp = den.split("^")
            if int(base) != 2:
                raise ValueError(f"{text!r} is not dyadic")
            return cls.of(int(num), int(exp))
        frac = Fraction(text)
        den = frac.denominator
        if den & (den - 1) == 0:
            return cls.of(frac.numerator, den.bit_length() - 1)
        return cls.approx(float(frac), 30 if ell is None else ell)

    @classmethod
    def approx(cls, x: float, ell: int) -> "DyadicProb":
        """Nearest multiple of 2^-ell to x."""
        num = round(x * (1 << ell))
        if not 0 < num < (1 << ell):
            raise ValueError(f"{x} rounds outside (0, 1) at {ell} bits")
        return cls.of(num, ell)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.ell)

    def __float__(self) -> float:
        return self.numerator / (1 << self.ell)

    def times(self, other: "DyadicProb") -> "DyadicProb":
        return DyadicProb.of(self.numerator * other.numerator, self.ell + other.ell)

    def __str__(self) -> str:
        return f"{self.numerator}/2^{self.ell}"


@dataclass(frozen=True)
class ForcedPattern:
    e0: int
    e1: int

    def __post_init__(self) -> None:
        if self.e0 < 0 or self.e1 < 0:
            raise ValueError("pattern counts must be non-negative")


def field_for_family(M: int, p: DyadicProb) -> gf.FieldSpec:
    """F = max(2^ceil(log2 M), 2^ell)."""
    m = max((M - 1).bit_length(), p.ell, 1)
    if m > gf.MAX_DEGREE:
        raise UnsupportedSizeError(f"family of {M} variables at ell={p.ell} needs GF(2^{m})")
    return gf.field_for_degree(m)


@dataclass(frozen=True, eq=False)
class VariableScheme:
    M: int
    k: int
    p: DyadicProb
    field: gf.FieldSpec
    seed: tuple[int, ...]
    # None means all STANDARD; otherwise a read-only bool array, True = FLIPPED.
    orientations: np.ndarray | None = dc_field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.M < 1 or self.k < 1:
            raise ValueError("need M >= 1 and k >= 1")
        if self.field.order < self.M or self.field.m < self.p.ell:
            raise ValueError("field too small for this family")
        if len(self.seed) != self.k:
            raise ValueError("seed must have exactly k coefficients")
        for c in self.seed:
            self.field.check(c)
        if self.orientations is not None:
            arr = np.asarray(self.orientations, dtype=bool).copy()
            if arr.shape != (self.M,):
                raise ValueError("need one orientation per variable")
            arr.setflags(write=False)
            object.__setattr__(self, "orientations", arr)

    @property
    def F(self) -> int:
        return self.field.order

    @property
    def threshold(self) -> int:
        """pF, the size of both threshold sets."""
        return self.p.numerator << (self.field.m - self.p.ell)

    def flipped_prefix(self) -> int | None:
        """Number of leading FLIPPED variables when the orientation is a
        flipped prefix followed by STANDARD, else None."""
        if self.orientations is None:
            return 0
        n = int(np.argmin(self.orientations)) if not self.orientations.all() else self.M
        return n if not self.orientations[n:].any() else None

    def with_seed(self, seed: Sequence[int]) -> "VariableScheme":
        return VariableScheme(self.M, self.k, self.p, self.field, tuple(int(c) for c in seed), self.orientations)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VariableScheme):
            return NotImplemented
        return scheme_to_bytes(self) == scheme_to_bytes(other)

    def __hash__(self) -> int:
        return hash(scheme_to_bytes(self))


def _orientation_array(M: int, orientations) -> np.ndarray | None:
    if orientations is None:
        return None
    arr = np.asarray(orientations, dtype=bool)
    if arr.shape != (M,):
        raise ValueError("need one orientation per variable")
    return None if not arr.any() else arr


def scheme_new(M: int, k: int, p: DyadicProb, orientations=None, rng: RngStream | None = None) -> VariableScheme:
    """A family with k seed coefficients drawn uniformly from ``rng``.

    With ``rng=None`` the seed is the zero polynomial.
    """
    spec = field_for_family(M, p)
    if rng is None:
        seed = (0,) * k
    else:
        seed = tuple(int(c) for c in rng.field_elements(0, k, spec.m))
    return VariableScheme(M, k, p, spec, seed, _orientation_array(M, orientations))


def forced_scheme(M: int, k: int, p: DyadicProb, pattern: ForcedPattern, rng: RngStream | None = None) -> VariableScheme:
    """Family whose first e0 variables are FLIPPED, so the zero seed yields
    e0 zeros followed by ones everywhere else (in particular the next e1)."""
    if pattern.e0 + pattern.e1 > M:
        raise ValueError(f"pattern of length {pattern.e0 + pattern.e1} exceeds M={M}")
    spec = field_for_family(M, p)
    pf = p.numerator << (spec.m - p.ell)
    if pattern.e1 and pf < 1:
        raise PreconditionError("p < 1/F cannot force ones")
    if pattern.e0 and pf > spec.order - 1:
        raise PreconditionError("p > 1 - 1/F cannot force zeros")
    orient = np.zeros(M, dtype=bool)
    orient[: pattern.e0] = FLIPPED
    return scheme_new(M, k, p, orient, rng)


def pattern_holds(scheme: VariableScheme, pattern: ForcedPattern) -> bool:
    n = pattern.e0 + pattern.e1
    bits = eval_vars(scheme, np.arange(n))
    return not bits[: pattern.e0].any() and bool(bits[pattern.e0 : n].all())


def _check_indices(scheme: VariableScheme, indices: np.ndarray) -> None:
    if indices.size and (indices.min() < 0 or indices.max() >= scheme.M):
        raise IndexError(f"variable index out of range 0..{scheme.M - 1}")


def threshold_bits(z: np.ndarray, flipped, F: int, pf: int) -> np.ndarray:
    standard = z < np.uint64(pf)
    if flipped is None:
        return standard
    return np.where(flipped, z >= np.uint64(F - pf), standard)


def eval_vars(scheme: VariableScheme, indices) -> np.ndarray:
    """Bits X_j for an array of variable indices."""
    idx = np.asarray(indices, dtype=np.int64)
    _check_indices(scheme, idx)
    z = gf.eval_poly_array(scheme.seed, idx.astype(np.uint64), scheme.field)
    flipped = None if scheme.orientations is None else scheme.orientations[idx]
    return threshold_bits(z, flipped, scheme.F, scheme.threshold)


def eval_var(scheme: VariableScheme, j: int) -> int:
    if not 0 <= j < scheme.M:
        raise IndexError(f"variable index {j} out of range 0..{scheme.M - 1}")
    z = gf.eval_poly(scheme.seed, j, scheme.field)
    flipped = scheme.orientations is not None and bool(scheme.orientations[j])
    if flipped:
        return int(z >= scheme.F - scheme.threshold)
    return int(z < scheme.threshold)


def eval_seeds(scheme: VariableScheme, seeds: np.ndarray, indices) -> np.ndarray:
    """Bits of the selected variables under many seeds: ``seeds`` is (k, S),
    the result is (S, len(indices))."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    idx = np.asarray(indices, dtype=np.int64)
    _check_indices(scheme, idx)
    S = seeds.shape[1]
    coeffs = np.repeat(seeds, idx.size, axis=1)
    points = np.tile(idx.astype(np.uint64), S)
    z = gf.eval_poly_array(coeffs, points, scheme.field)
    flipped = None if scheme.orientations is None else np.tile(scheme.orientations[idx], S)
    return threshold_bits(z, flipped, scheme.F, scheme.threshold).reshape(S, idx.size)


def random_seeds(spec: gf.FieldSpec, k: int, count: int, rng: RngStream) -> np.ndarray:
    """``count`` independent uniform seeds as a (k, count) array."""
    return rng.field_elements(0, k * count, spec.m).reshape(count, k).T.copy()


# ------------------------------------------------------------ enumeration


def all_seeds(spec: gf.FieldSpec, k: int, budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """Every seed as a (k, F^k) array; seed s has coefficient i = digit i of s in base F."""
    total = spec.order**k
    if total > budget:
        raise EnumerationTooLargeError(f"F^k = {total} exceeds budget {budget}")
    s = np.arange(total, dtype=np.uint64)
    coeffs = np.empty((k, total), dtype=np.uint64)
    for i in range(k):
        coeffs[i] = (s >> np.uint64(spec.m * i)) & np.uint64(spec.order - 1)
    return coeffs


def seed_space_table(M: int, k: int, p: DyadicProb, orientations=None, indices=None,
                     budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """Bool matrix (F^k, len(indices)): variable values under every seed."""
    spec = field_for_family(M, p)
    idx = np.arange(M) if indices is None else np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= M):
        raise IndexError("variable index out of range")
    coeffs = all_seeds(spec, k, budget)
    orient = _orientation_array(M, orientations)
    pf = p.numerator << (spec.m - p.ell)
    out = np.empty((coeffs.shape[1], idx.size), dtype=bool)
    for col, j in enumerate(idx):
        z = gf.eval_poly_array(coeffs, np.full(coeffs.shape[1], j, dtype=np.uint64), spec)
        flipped = None if orient is None else bool(orient[j])
        out[:, col] = threshold_bits(z, flipped, spec.order, pf)
    return out


@dataclass(frozen=True)
class JointDistribution:
    """Seed counts per bit pattern; pattern code has bit i = value of indices[i]."""

    indices: tuple[int, ...]
    counts: np.ndarray
    total: int

    def count(self, bits: Sequence[int]) -> int:
        code = sum(int(b) << i for i, b in enumerate(bits))
        return int(self.counts[code])

    def product_counts(self, p: DyadicProb) -> np.ndarray:
        """Counts an exactly independent family would have, as exact integers."""
        n = len(self.indices)
        out = np.empty(1 << n, dtype=object)
        for code in range(1 << n):
            ones = bin(code).count("1")
            prob = p.value**ones * (1 - p.value) ** (n - ones)
            out[code] = prob * self.total
        return out

    def is_product(self, p: DyadicProb) -> bool:
        expected = self.product_counts(p)
        return all(Fraction(int(c)) == e for c, e in zip(self.counts, expected))


def pattern_counts(table: np.ndarray, columns: Sequence[int]) -> np.ndarray:
    codes = np.zeros(table.shape[0], dtype=np.int64)
    for i, c in enumerate(columns):
        codes |= table[:, c].astype(np.int64) << i
    return np.bincount(codes, minlength=1 << len(columns))


def enumerate_joint(M: int, k: int, p: DyadicProb, orientations, indices: Sequence[int],
                    budget: int = ENUMERATION_BUDGET) -> JointDistribution:
    """Exact distribution of the selected variables over all F^k seeds."""
    indices = tuple(int(i) for i in indices)
    if len(indices) > k:
        raise ValueError("at most k indices may be enumerated jointly")
    table = seed_space_table(M, k, p, orientations, indices, budget)
    counts = pattern_counts(table, range(len(indices)))
    return JointDistribution(indices, counts, table.shape[0])


# ------------------------------------------------------------ tail bound


def to_mpf(x) -> mpmath.mpf:
    """Exact conversion of ints, floats, Fractions and DyadicProbs."""
    if isinstance(x, mpmath.mpf):
        return x
    if isinstance(x, DyadicProb):
        x = x.value
    f = Fraction(x)
    return mpmath.mpf(f.numerator) / f.denominator


def tail_bound(M: int, k: int, mu, delta) -> mpmath.mpf:
    """[2k(1-mu) / (delta^2 mu M)]^floor(k/2) for a sum of M k-wise
    independent Bernoulli(mu) variables deviating by delta * mu * M."""
    if k <= 0 or k % 2:
        raise PreconditionError(f"k must be a positive even integer, got {k}")
    with mpmath.workdps(50):
        mu, delta = to_mpf(mu), to_mpf(delta)
        if delta <= 0:
            raise PreconditionError("delta must be positive")
        if not 0 < mu < 1:
            raise PreconditionError("mu must lie in (0, 1)")
        lhs = mpmath.mpf(M - k) / k * mu * (1 - mu)
        if lhs < 1:
            raise PreconditionError(f"(M-k)/k * mu(1-mu) = {mpmath.nstr(lhs, 6)} < 1")
        base = 2 * k * (1 - mu) / (delta**2 * mu * M)
        return +(base ** (k // 2))


# ------------------------------------------------------------ serialization

SCHEME_MAGIC = b"KWIV"


def scheme_to_bytes(scheme: VariableScheme) -> bytes:
    """KWIV record.  Version 1 carries a full orientation bitmap (LSB-first);
    version 2, used above BITMAP_LIMIT variables, stores the flipped-prefix
    length as 8 bytes instead."""
    prefix = scheme.flipped_prefix()
    version = 1 if scheme.M <= BITMAP_LIMIT else 2
    if version == 2 and prefix is None:
        raise UnsupportedSizeError("large scheme must have prefix orientation to serialize")
    head = SCHEME_MAGIC + struct.pack(
        "<BQHQBB", version, scheme.M, scheme.k, scheme.p.numerator, scheme.p.ell, scheme.field.m
    )
    coeffs = struct.pack(f"<{scheme.k}Q", *scheme.seed)
    if version == 1:
        orient = scheme.orientations if scheme.orientations is not None else np.zeros(scheme.M, dtype=bool)
        tail = np.packbits(orient, bitorder="little").tobytes()
    else:
        tail = struct.pack("<Q", prefix)
    return head + coeffs + tail


def scheme_from_bytes(data: bytes, offset: int = 0) -> tuple[VariableScheme, int]:
    """Parse a KWIV record; returns the scheme and the offset just past it."""
    if data[offset : offset + 4] != SCHEME_MAGIC:
        raise ValueError("not a KWIV record")
    offset += 4
    version, M, k, num, ell, m = struct.unpack_from("<BQHQBB", data, offset)
    offset += struct.calcsize("<BQHQBB")
    seed = struct.unpack_from(f"<{k}Q", data, offset)
    offset += 8 * k
    if version == 1:
        nbytes = (M + 7) // 8
        orient = np.unpackbits(np.frombuffer(data, np.uint8, nbytes, offset), count=M, bitorder="little").astype(bool)
        offset += nbytes
    elif version == 2:
        (prefix,) = struct.unpack_from("<Q", data, offset)
        offset += 8
        orient = None
        if prefix:
            orient = np.zeros(M, dtype=bool)
            orient[:prefix] = True
    else:
        raise ValueError(f"unknown KWIV version {version}")
    p = DyadicProb(num, ell)
    spec = field_for_family(M, p)
    if spec.m != m:
        raise ValueError("field degree disagrees with M and p")
    return VariableScheme(M, k, p, spec, tuple(seed), _orientation_array(M, orient)), offset
