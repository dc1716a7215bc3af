"""Binary primitive BCH codes: construction, systematic encoding and hard decoding.

Codewords are laid out message-first: ``bits[:k]`` is the message and
``bits[k:]`` the parity. Bit ``i`` is the coefficient of ``x**i``, so the
codeword polynomial is ``m(x) + x**k * p(x)`` with
``p(x) = m(x) * x**(n-k) mod g(x)``; this is divisible by ``g`` because
``x**n == 1`` modulo ``g``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf import GF2m, poly_degree, poly_mod2, poly_mulmod2, smallest_primitive_poly


class DecodeFailure(Exception):
    """Raised when a received word lies outside every decoding sphere we can certify."""


@dataclass(frozen=True)
class BchCodeSpec:
    m: int
    n: int
    k: int
    t: int
    primitive_poly: int
    generator_poly: int
    _parity: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def field(self) -> GF2m:
        return _field(self.m, self.primitive_poly)

    @property
    def parity_matrix(self) -> np.ndarray:
        """``k x (n-k)`` uint8 matrix; row ``i`` is ``x**(i+n-k) mod g``."""
        return self._parity


@lru_cache(maxsize=None)
def _field(m: int, primitive_poly: int) -> GF2m:
    return GF2m(m, primitive_poly)


def _generator_for(gf: GF2m, t: int) -> int:
    g = 1
    seen: set[int] = set()
    for e in range(1, 2 * t + 1):
        mp = gf.minimal_poly(e)
        if mp not in seen:
            seen.add(mp)
            g = poly_mulmod2(g, mp)
    return g


def _parity_matrix(n: int, k: int, g: int) -> np.ndarray:
    r = n - k
    rows = np.zeros((k, r), dtype=np.uint8)
    rem = poly_mod2(1 << r, g)
    for i in range(k):
        for j in range(r):
            rows[i, j] = (rem >> j) & 1
        rem <<= 1
        if rem >> r:
            rem ^= g
    return rows


@lru_cache(maxsize=None)
def build_bch_spec(m: int, t_target: int, primitive_poly: int | None = None) -> BchCodeSpec:
    """Narrow-sense primitive BCH code of length ``2**m - 1`` correcting ``t_target`` errors.

    The reported ``t`` is the largest designed distance that still yields the
    same generator, so it can exceed ``t_target``.
    """
    if not 3 <= m <= 12:
        raise ValueError("m must be in [3, 12]")
    if t_target < 1:
        raise ValueError("t_target must be >= 1")
    prim = primitive_poly or smallest_primitive_poly(m)
    gf = _field(m, prim)
    n = gf.order
    g = _generator_for(gf, t_target)
    k = n - poly_degree(g)
    if k <= 0:
        raise ValueError(f"no BCH code with m={m}, t={t_target}: k would be {k}")
    t = t_target
    while 2 * (t + 1) < n and _generator_for(gf, t + 1) == g:
        t += 1
    return BchCodeSpec(m, n, k, t, prim, g, _parity_matrix(n, k, g))


def spec_from_params(m: int, n: int, k: int, t: int, primitive_poly: int) -> BchCodeSpec:
    """Rebuild a spec from serialized parameters, checking they are self-consistent."""
    spec = build_bch_spec(m, t, primitive_poly)
    if (spec.n, spec.k, spec.t) != (n, k, t):
        raise ValueError(f"inconsistent BCH parameters n={n} k={k} t={t} for m={m}")
    return spec


def bch_encode(msg, spec: BchCodeSpec) -> np.ndarray:
    msg = np.asarray(msg, dtype=np.uint8)
    if msg.shape[-1] != spec.k:
        raise ValueError(f"message length {msg.shape[-1]} != k={spec.k}")
    parity = (msg.astype(np.int64) @ spec.parity_matrix) & 1
    return np.concatenate([msg, parity.astype(np.uint8)], axis=-1)


def syndromes(word: np.ndarray, spec: BchCodeSpec) -> np.ndarray:
    """``S_j = r(alpha**j)`` for ``j = 1..2t`` (index ``j-1``)."""
    gf = spec.field
    pos = np.flatnonzero(word)
    js = np.arange(1, 2 * spec.t + 1)
    if pos.size == 0:
        return np.zeros(js.size, dtype=np.int64)
    terms = gf.exp[np.outer(js, pos) % gf.order]
    return np.bitwise_xor.reduce(terms, axis=1)


def berlekamp_massey(synd: np.ndarray, gf: GF2m) -> list[int]:
    """Error-locator polynomial (coefficient list, constant term first)."""
    lam = [1]
    prev = [1]
    L = 0
    shift = 1
    b = 1
    for r, s in enumerate(synd):
        d = int(s)
        for i in range(1, L + 1):
            if i < len(lam) and lam[i]:
                d ^= gf.mul(lam[i], int(synd[r - i]))
        if d == 0:
            shift += 1
            continue
        coef = gf.div(d, b)
        upd = [0] * shift + [gf.mul(coef, c) for c in prev]
        new = lam + [0] * max(0, len(upd) - len(lam))
        for i, c in enumerate(upd):
            new[i] ^= c
        if 2 * L <= r:
            prev, lam = lam, new
            L = r + 1 - L
            b = d
            shift = 1
        else:
            lam = new
            shift += 1
    while len(lam) > 1 and lam[-1] == 0:
        lam.pop()
    return lam


def chien_search(lam: list[int], gf: GF2m, n: int) -> np.ndarray:
    """Positions ``i`` with ``Lambda(alpha**-i) == 0``."""
    i = np.arange(n)
    acc = np.zeros(n, dtype=np.int64)
    for d, c in enumerate(lam):
        if c:
            acc ^= gf.exp[(gf.log[c] - i * d) % gf.order]
    return np.flatnonzero(acc == 0)


def bch_decode(word, spec: BchCodeSpec) -> tuple[np.ndarray, int]:
    """Correct up to ``t`` errors; returns ``(message, corrections)``.

    Raises :class:`DecodeFailure` when the locator degree disagrees with the
    number of roots found, or the corrected word is still not a codeword.
    """
    word = np.asarray(word, dtype=np.uint8)
    if word.shape != (spec.n,):
        raise ValueError(f"word length {word.shape} != n={spec.n}")
    synd = syndromes(word, spec)
    if not synd.any():
        return word[: spec.k].copy(), 0
    gf = spec.field
    lam = berlekamp_massey(synd, gf)
    deg = len(lam) - 1
    if deg > spec.t:
        raise DecodeFailure(f"locator degree {deg} exceeds t={spec.t}")
    roots = chien_search(lam, gf, spec.n)
    if roots.size != deg:
        raise DecodeFailure(f"locator degree {deg} but {roots.size} roots")
    fixed = word.copy()
    fixed[roots] ^= 1
    if syndromes(fixed, spec).any():
        raise DecodeFailure("corrected word is not a codeword")
    return fixed[: spec.k], int(deg)
