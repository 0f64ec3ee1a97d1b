import random

import pytest
from hypothesis import given, strategies as st

from hetcast.errors import UsageError
from hetcast.galois import BitVector, GF2Row, ge_solve, gf2_xor_into, gf256_inv, gf256_mul


def slow_mul(a, b):
    # shift-and-add multiply with reduction by x^8+x^4+x^3+x^2+1
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11D
        b >>= 1
    return r


def test_mul_matches_polynomial_arithmetic():
    for a in range(256):
        for b in range(0, 256, 7):
            assert gf256_mul(a, b) == slow_mul(a, b)


def test_mul_identity_and_reduction():
    assert all(gf256_mul(a, 1) == a for a in range(256))
    assert gf256_mul(0x02, 0x80) == 0x1D


def test_inverse_exhaustive():
    for a in range(1, 256):
        assert gf256_mul(a, gf256_inv(a)) == 1
    with pytest.raises(ZeroDivisionError):
        gf256_inv(0)


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_field_axioms(a, b, c):
    assert gf256_mul(a, gf256_mul(b, c)) == gf256_mul(gf256_mul(a, b), c)
    assert gf256_mul(a, b ^ c) == gf256_mul(a, b) ^ gf256_mul(a, c)
    assert gf256_mul(a, b) == gf256_mul(b, a)


@given(st.integers(1, 70).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1),
                                                       st.integers(0, (1 << n) - 1))))
def test_bitvector_xor_laws(args):
    n, x, y = args
    X, Y, Z = BitVector(n, x), BitVector(n, y), BitVector(n, 0)
    assert (X ^ X) == Z
    assert (X ^ Z) == X
    assert ((X ^ Y) ^ Y) == X


def test_bitvector_indices_roundtrip():
    v = BitVector.from_indices(10, [0, 3, 9])
    assert v.indices() == [0, 3, 9] and v.weight() == 3 and v[3] and not v[4]
    with pytest.raises(UsageError):
        BitVector(3, 0) ^ BitVector(4, 0)


def test_gf2_xor_into_payloads():
    a = GF2Row(BitVector.from_indices(4, [0, 1]), b"\x0f\xf0")
    b = GF2Row(BitVector.from_indices(4, [1, 2]), b"\xff\x00")
    c = gf2_xor_into(a, b)
    assert c.vector.indices() == [0, 2] and c.payload == b"\xf0\xf0"
    assert gf2_xor_into(c, b) == a
    with pytest.raises(UsageError):
        gf2_xor_into(a, GF2Row(BitVector(5, 0), b"\0\0"))


def test_ge_small_cases():
    sol = ge_solve([(BitVector.from_indices(2, [0]), b"a"), (BitVector.from_indices(2, [1]), b"b")])
    assert sol.decodable_set() == {0, 1} and sol.payloads == {0: b"a", 1: b"b"}
    sol = ge_solve([(BitVector.from_indices(2, [0, 1]), b"x")])
    assert sol.rank == 1 and sol.decodable_set() == set()
    assert ge_solve([], width=3).decodable_set() == set()


def _encode256(coeffs, truth):
    out = bytearray(len(truth[0]))
    for c, p in zip(coeffs, truth):
        for k, byte in enumerate(p):
            out[k] ^= gf256_mul(c, byte)
    return bytes(out)


def test_ge_gf256_full_rank_recovers_payloads():
    rng = random.Random(1)
    truth = [bytes(rng.randrange(256) for _ in range(5)) for _ in range(8)]
    rows = []
    while True:
        coeffs = bytes(rng.randrange(256) for _ in range(8))
        rows.append((coeffs, _encode256(coeffs, truth)))
        sol = ge_solve(rows, field=256)
        if sol.rank == 8:
            break
    assert sol.decodable_set() == set(range(8))
    assert [sol.payloads[j] for j in range(8)] == truth


def test_ge_monotone_and_rank_bound():
    rng = random.Random(2)
    for field in (2, 256):
        rows, prev = [], set()
        for _ in range(12):
            c = [rng.randrange(field) if rng.random() < 0.4 else 0 for _ in range(6)]
            rows.append((bytes(c), b""))
            sol = ge_solve(rows, field=field)
            assert prev <= sol.decodable_set()
            assert sol.rank <= min(len(rows), 6)
            prev = sol.decodable_set()


def test_ge_decodable_means_unit_vector_in_span():
    # brute-force span enumeration over GF(2) as the oracle
    rng = random.Random(4)
    for _ in range(200):
        w = 5
        rows = [rng.randrange(1, 1 << w) for _ in range(rng.randrange(1, 6))]
        span = {0}
        for r in rows:
            span |= {s ^ r for s in span}
        sol = ge_solve([(r, b"") for r in rows], field=2, width=w)
        assert sol.decodable_set() == {j for j in range(w) if (1 << j) in span}
