import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reramkey.bch import (
    DecodeFailure, bch_decode, bch_encode, build_bch_spec, spec_from_params, syndromes,
)
from reramkey.gf import GF2m, is_primitive, smallest_primitive_poly


def slow_mul(a, b, poly, m):
    # shift-and-add multiplication, independent of the log tables
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return r


@pytest.mark.parametrize("m,poly", [(3, 0b1011), (4, 0b10011), (5, 0b100101), (8, 0x11D)])
def test_smallest_primitive_polys(m, poly):
    # x^3+x+1, x^4+x+1, x^5+x^2+1, x^8+x^4+x^3+x^2+1
    assert smallest_primitive_poly(m) == poly
    assert is_primitive(poly)


def test_non_primitive_rejected():
    assert not is_primitive(0b11111)  # x^4+x^3+x^2+x+1 has order 5


def test_field_tables_match_shift_and_add():
    gf = GF2m(8)
    rng = np.random.default_rng(1)
    for a, b in rng.integers(0, 256, (500, 2)):
        assert gf.mul(int(a), int(b)) == slow_mul(int(a), int(b), 0x11D, 8)


@given(st.integers(1, 255), st.integers(1, 255))
def test_field_inverse_and_division(a, b):
    gf = GF2m(8)
    assert gf.mul(a, gf.inv(a)) == 1
    assert gf.mul(gf.div(a, b), b) == a


def test_known_generators():
    assert build_bch_spec(3, 1).generator_poly == 0b1011
    # textbook (15,7) double-error-correcting generator x^8+x^7+x^6+x^4+1
    s = build_bch_spec(4, 2)
    assert (s.n, s.k, s.t, s.generator_poly) == (15, 7, 2, 0x1D1)


def test_full_size_code_parameters():
    s = build_bch_spec(8, 18)
    assert (s.m, s.n, s.k, s.t, s.primitive_poly) == (8, 255, 131, 18, 0x11D)
    assert build_bch_spec(8, 19).k == 123
    gf = GF2m(8)
    # generator has alpha^1..alpha^36 as roots (evaluated with the slow multiplier)
    g = s.generator_poly
    for j in range(1, 37):
        x = gf.alpha_pow(j)
        acc, p = 0, 1
        for i in range(g.bit_length()):
            if g >> i & 1:
                acc ^= p
            p = slow_mul(p, x, 0x11D, 8)
        assert acc == 0


def test_systematic_message_first():
    s = build_bch_spec(8, 18)
    msg = np.random.default_rng(0).integers(0, 2, 131, dtype=np.uint8)
    cw = bch_encode(msg, s)
    assert cw.shape == (255,)
    assert np.array_equal(cw[:131], msg)
    assert not syndromes(cw, s).any()


def test_encode_is_linear():
    s = build_bch_spec(8, 18)
    rng = np.random.default_rng(3)
    a, b = rng.integers(0, 2, (2, 131), dtype=np.uint8)
    assert np.array_equal(bch_encode(a ^ b, s), bch_encode(a, s) ^ bch_encode(b, s))


@pytest.mark.parametrize("m,t", [(3, 1), (4, 2)])
def test_exhaustive_small_codes(m, t):
    s = build_bch_spec(m, t)
    for msg in itertools.product((0, 1), repeat=s.k):
        msg = np.array(msg, dtype=np.uint8)
        cw = bch_encode(msg, s)
        for w in range(t + 1):
            for pos in itertools.combinations(range(s.n), w):
                r = cw.copy()
                r[list(pos)] ^= 1
                out, nc = bch_decode(r, s)
                assert np.array_equal(out, msg) and nc == w


def test_full_size_code_corrects_up_to_t_randomized():
    s = build_bch_spec(8, 18)
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        msg = rng.integers(0, 2, s.k, dtype=np.uint8)
        r = bch_encode(msg, s)
        w = int(rng.integers(0, s.t + 1))
        r[rng.choice(s.n, w, replace=False)] ^= 1
        out, nc = bch_decode(r, s)
        assert nc == w and np.array_equal(out, msg)


def test_beyond_t_never_silently_wrong_on_weight():
    s = build_bch_spec(4, 2)
    rng = np.random.default_rng(5)
    for _ in range(300):
        msg = rng.integers(0, 2, s.k, dtype=np.uint8)
        r = bch_encode(msg, s)
        r[rng.choice(s.n, 3, replace=False)] ^= 1
        try:
            out, nc = bch_decode(r, s)
        except DecodeFailure:
            continue
        # a miscorrection lands on another codeword at distance <= t
        assert nc <= s.t and not syndromes(bch_encode(out, s), s).any()


def test_spec_round_trip_and_validation():
    s = build_bch_spec(8, 18)
    assert spec_from_params(8, 255, 131, 18, 0x11D).generator_poly == s.generator_poly
    with pytest.raises(ValueError):
        spec_from_params(8, 255, 130, 18, 0x11D)
    with pytest.raises(ValueError):
        build_bch_spec(2, 1)
    with pytest.raises(ValueError):
        bch_encode(np.zeros(5, np.uint8), s)
