"""Arithmetic in GF(2^m) with log/antilog tables and GF(2) polynomial helpers.

Binary polynomials are stored as Python ints, bit ``i`` holding the
coefficient of ``x**i``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def poly_degree(p: int) -> int:
    return p.bit_length() - 1


def poly_mulmod2(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly_mod2(a: int, m: int) -> int:
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        a ^= m << (poly_degree(a) - dm)
    return a


def poly_divmod2(a: int, m: int) -> tuple[int, int]:
    q = 0
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        s = poly_degree(a) - dm
        q ^= 1 << s
        a ^= m << s
    return q, a


def is_primitive(poly: int) -> bool:
    """True if ``poly`` (degree m) generates the full multiplicative group of GF(2^m)."""
    m = poly_degree(poly)
    if m < 1 or not poly & 1:
        return False
    order = (1 << m) - 1
    x, e = 1, 0
    # walk powers of x until we return to 1
    while True:
        x <<= 1
        if x >> m:
            x ^= poly
        e += 1
        if x == 1:
            return e == order
        if e > order:
            return False


@lru_cache(maxsize=None)
def smallest_primitive_poly(m: int) -> int:
    for cand in range(1 << m, 1 << (m + 1)):
        if is_primitive(cand):
            return cand
    raise ValueError(f"no primitive polynomial of degree {m}")


class GF2m:
    """GF(2^m) with elements as ints in ``[0, 2^m)``."""

    def __init__(self, m: int, primitive_poly: int | None = None):
        if not 2 <= m <= 16:
            raise ValueError("m must be in [2, 16]")
        self.m = m
        self.order = (1 << m) - 1
        self.primitive_poly = primitive_poly or smallest_primitive_poly(m)
        if not is_primitive(self.primitive_poly) or poly_degree(self.primitive_poly) != m:
            raise ValueError(f"{self.primitive_poly:#x} is not a primitive polynomial of degree {m}")
        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.full(1 << m, -1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> m:
                x ^= self.primitive_poly
        exp[self.order:] = exp[: self.order]
        self.exp = exp
        self.log = log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^m)")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return int(self.exp[(self.log[a] * e) % self.order])

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % self.order])

    def minimal_poly(self, e: int) -> int:
        """Minimal polynomial over GF(2) of ``alpha**e``, as a bit-packed int."""
        coset = cyclotomic_coset(e, self.order)
        # product of (x - alpha^j) over the coset, coefficients in GF(2^m)
        coeffs = [1]
        for j in coset:
            root = self.alpha_pow(j)
            nxt = [0] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i + 1] ^= c
                nxt[i] ^= self.mul(c, root)
            coeffs = nxt
        out = 0
        for i, c in enumerate(coeffs):
            if c not in (0, 1):
                raise ArithmeticError("minimal polynomial has non-binary coefficient")
            out |= c << i
        return out


def cyclotomic_coset(e: int, order: int) -> list[int]:
    e %= order
    coset = [e]
    j = (2 * e) % order
    while j != e:
        coset.append(j)
        j = (2 * j) % order
    return sorted(coset)
