"""Placement of BCH codeword bits inside the length-N polar input.

A padding scheme maps the ``n`` BCH bits (message first, parity last) to ``n``
distinct positions of the pre-transform vector; every other position holds a
known zero. The id is stored in enrollment records.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

TAIL_ZERO = 0
INTERLEAVED = 1


@dataclass(frozen=True)
class PaddingScheme:
    id: int
    name: str
    positions: tuple[int, ...]
    N: int

    @property
    def n(self) -> int:
        return len(self.positions)

    def embed(self, codewords: np.ndarray) -> np.ndarray:
        """Scatter ``(..., n)`` codewords into zero vectors of length ``N``."""
        cw = np.asarray(codewords, dtype=np.uint8)
        out = np.zeros(cw.shape[:-1] + (self.N,), dtype=np.uint8)
        out[..., list(self.positions)] = cw
        return out

    def extract(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(w)[..., list(self.positions)]

    @property
    def pad_mask(self) -> np.ndarray:
        m = np.ones(self.N, dtype=bool)
        m[list(self.positions)] = False
        return m


@lru_cache(maxsize=None)
def _interleaved_table() -> tuple[int, ...]:
    raw = resources.files("reramkey.data").joinpath("layout_255_512.txt").read_text()
    pos = tuple(int(tok) for tok in raw.split())
    if len(pos) != 255 or len(set(pos)) != 255 or not all(0 <= p < 512 for p in pos):
        raise RuntimeError("corrupt layout table")
    return pos


SCHEME_NAMES = {TAIL_ZERO: "tail-zero", INTERLEAVED: "interleaved"}


def padding_scheme(scheme_id: int, n: int, N: int) -> PaddingScheme:
    if n > N:
        raise ValueError(f"BCH length {n} exceeds polar length {N}")
    if scheme_id == TAIL_ZERO:
        return PaddingScheme(TAIL_ZERO, "tail-zero", tuple(range(n)), N)
    if scheme_id == INTERLEAVED:
        if (n, N) != (255, 512):
            raise ValueError("the interleaved scheme is tabulated for n=255, N=512 only")
        return PaddingScheme(INTERLEAVED, "interleaved", _interleaved_table(), N)
    raise ValueError(f"unknown padding scheme {scheme_id}")


def default_scheme_id(n: int, N: int) -> int:
    return INTERLEAVED if (n, N) == (255, 512) else TAIL_ZERO


def scheme_id_from_name(name: str) -> int:
    for k, v in SCHEME_NAMES.items():
        if v == name:
            return k
    raise ValueError(f"unknown padding scheme {name!r}")
