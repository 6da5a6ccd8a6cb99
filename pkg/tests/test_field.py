import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwig import field as gf
from kwig.errors import UnsupportedSizeError


def _clmul_reduce(a: int, b: int, poly: int, m: int) -> int:
    """Schoolbook carry-less product then long division, written
    independently of the library routine."""
    prod = 0
    for i in range(m):
        if (b >> i) & 1:
            prod ^= a << i
    for bit in range(2 * m - 2, m - 1, -1):
        if (prod >> bit) & 1:
            prod ^= poly << (bit - m)
    return prod


# ---- frozen oracles


def test_gf8_hand_reduction():
    # x * x^2 = x^3 = x + 1 modulo x^3 + x + 1
    spec = gf.field_for_degree(3)
    assert spec.reduction_polynomial == 0b1011
    assert gf.mul(0b010, 0b100, spec) == 0b011


def test_aes_field_reference_products():
    # GF(2^8) with x^8+x^4+x^3+x+1: the published worked example {57}.{83} = {c1}
    spec = gf.field_for_degree(8)
    assert spec.reduction_polynomial == 0x11B
    assert gf.mul(0x57, 0x83, spec) == 0xC1
    assert gf.mul(0x57, 0x13, spec) == 0xFE
    assert gf.inv(0x53, spec) == 0xCA


def test_eval_poly_hand_examples():
    spec = gf.field_for_degree(3)
    assert gf.eval_poly([1, 1], 0b010, spec) == 0b011
    assert gf.eval_poly([0, 0, 0], 5, spec) == 0
    assert gf.eval_poly([6], 3, spec) == 6


@pytest.mark.parametrize("size,m", [(28, 5), (1, 1), (2, 1), (2**40, 40), (2**40 + 1, 41), (2**63, 63)])
def test_field_for_size(size, m):
    assert gf.field_for_size(size).m == m


def test_field_for_size_too_large():
    with pytest.raises(UnsupportedSizeError):
        gf.field_for_size(2**63 + 1)


# ---- table


def test_every_table_entry_is_irreducible():
    assert sorted(gf.IRREDUCIBLE) == list(range(1, 64))
    for m, poly in gf.IRREDUCIBLE.items():
        assert poly.bit_length() == m + 1
        assert gf.is_irreducible(poly), m


def test_irreducibility_test_against_known_reducibles():
    assert not gf.is_irreducible(0b101)  # x^2 + 1 = (x + 1)^2
    assert not gf.is_irreducible(0x101)  # x^8 + 1
    assert not gf.is_irreducible(0b1111)  # x^3+x^2+x+1 = (x+1)^3
    assert gf.is_irreducible(0b111)


def test_table_lines_format():
    lines = gf.table_lines()
    assert len(lines) == 63
    assert lines[2] == "3 0xb"
    assert lines[7] == "8 0x11b"


# ---- axioms


@pytest.mark.parametrize("m", range(1, 9))
def test_axioms_exhaustive_small_fields(m):
    spec = gf.field_for_degree(m)
    q = spec.order
    a = np.repeat(np.arange(q, dtype=np.uint64), q)
    b = np.tile(np.arange(q, dtype=np.uint64), q)
    table = gf.mul_array(a, b, spec).reshape(q, q)
    ref = np.array([[_clmul_reduce(x, y, spec.reduction_polynomial, m) for y in range(q)] for x in range(q)])
    assert np.array_equal(table, ref)
    assert np.array_equal(table, table.T)
    for x in range(1, q):
        assert table[x, gf.inv(x, spec)] == 1
    # associativity and distributivity over all triples
    for x, y, z in itertools.product(range(q), repeat=3) if m <= 5 else []:
        assert table[table[x, y], z] == table[x, table[y, z]]
        assert table[x, y ^ z] == table[x, y] ^ table[x, z]


@settings(max_examples=300, deadline=None)
@given(st.integers(9, 63), st.data())
def test_axioms_random_large_fields(m, data):
    spec = gf.field_for_degree(m)
    a, b, c = (data.draw(st.integers(0, spec.order - 1)) for _ in range(3))
    assert gf.mul(gf.mul(a, b, spec), c, spec) == gf.mul(a, gf.mul(b, c, spec), spec)
    assert gf.mul(a, b ^ c, spec) == gf.mul(a, b, spec) ^ gf.mul(a, c, spec)
    assert gf.mul(a, b, spec) == _clmul_reduce(a, b, spec.reduction_polynomial, m)
    if a:
        assert gf.mul(a, gf.inv(a, spec), spec) == 1


@pytest.mark.parametrize("m", [5, 12, 24, 25, 40, 63])
def test_array_paths_agree_with_scalar(m):
    spec = gf.field_for_degree(m)
    rng = np.random.default_rng(m)
    a = rng.integers(0, spec.order, 2000, dtype=np.uint64)
    b = rng.integers(0, spec.order, 2000, dtype=np.uint64)
    want = [gf.mul(int(x), int(y), spec) for x, y in zip(a, b)]
    assert gf.mul_array(a, b, spec).tolist() == want
    assert gf.mul_array_bitwise(a, b, spec).tolist() == want


@pytest.mark.parametrize("m", [3, 10, 30])
def test_eval_poly_array_matches_scalar(m):
    spec = gf.field_for_degree(m)
    rng = np.random.default_rng(m)
    coeffs = [int(c) for c in rng.integers(0, spec.order, 5)]
    pts = rng.integers(0, spec.order, 500, dtype=np.uint64)
    got = gf.eval_poly_array(np.array(coeffs, dtype=np.uint64), pts, spec)
    assert got.tolist() == [gf.eval_poly(coeffs, int(x), spec) for x in pts]


# ---- interpolation


def test_interpolation_unique_exhaustive_gf8_k2():
    spec = gf.field_for_degree(3)
    for x0, x1 in itertools.permutations(range(8), 2):
        for y0, y1 in itertools.product(range(8), repeat=2):
            agreeing = [c for c in itertools.product(range(8), repeat=2)
                        if gf.eval_poly(c, x0, spec) == y0 and gf.eval_poly(c, x1, spec) == y1]
            assert len(agreeing) == 1
            assert list(agreeing[0]) == gf.interpolate([x0, x1], [y0, y1], spec)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 20), st.integers(1, 6), st.data())
def test_interpolation_roundtrip(m, k, data):
    spec = gf.field_for_degree(m)
    k = min(k, spec.order)
    pts = data.draw(st.lists(st.integers(0, spec.order - 1), min_size=k, max_size=k, unique=True))
    vals = data.draw(st.lists(st.integers(0, spec.order - 1), min_size=k, max_size=k))
    coeffs = gf.interpolate(pts, vals, spec)
    assert [gf.eval_poly(coeffs, x, spec) for x in pts] == vals


def test_primitive_element_generates_group():
    spec = gf.field_for_degree(8)
    g = gf.primitive_element(spec)
    seen = {gf.power(g, e, spec) for e in range(255)}
    assert len(seen) == 255
