"""Polar transform, Bhattacharyya frozen-set construction and SC / SCL / BP decoding.

The transform is ``F^{(x)n}`` in natural index order (no bit reversal), which is
its own inverse over GF(2). Decoders take channel LLRs
``ln P(x_i = 0) / P(x_i = 1)`` and the values of the frozen inputs, and return
the full decoded input vector ``u``.
"""
from __future__ import annotations

import os
import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import _polar_py

if os.environ.get("RERAMKEY_PURE_PYTHON"):
    _kernels = _polar_py
    BACKEND = "python"
else:
    try:
        from . import _polar_ext as _kernels

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _kernels = _polar_py
        BACKEND = "python"

LLR_MAX = 40.0


def _check_pow2(N: int) -> int:
    if N < 1 or N & (N - 1):
        raise ValueError(f"length {N} is not a power of two")
    return N.bit_length() - 1


@dataclass(frozen=True)
class PolarCodeSpec:
    N: int
    n: int
    frozen: tuple[int, ...]
    unfrozen: tuple[int, ...]
    reliability_order: tuple[int, ...]
    design_param: float
    frozen_mask: np.ndarray = field(repr=False, compare=False)

    @property
    def num_frozen(self) -> int:
        return len(self.frozen)

    @property
    def K(self) -> int:
        return len(self.unfrozen)

    def frozen_checksum(self) -> int:
        """CRC-32 over the frozen indices written as little-endian u16."""
        return zlib.crc32(np.asarray(self.frozen, dtype="<u2").tobytes()) & 0xFFFFFFFF


def bhattacharyya(N: int, design_param: float) -> np.ndarray:
    """Erasure-channel Bhattacharyya parameters of the ``N`` synthetic channels.

    The most significant bit of an index selects the first (outermost)
    minus/plus step.
    """
    n = _check_pow2(N)
    z = np.array([design_param], dtype=np.float64)
    for _ in range(n):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


@lru_cache(maxsize=64)
def construct_frozen_set(N: int, num_frozen: int, design_param: float = 0.5) -> PolarCodeSpec:
    n = _check_pow2(N)
    if not 0 <= num_frozen <= N:
        raise ValueError("num_frozen must be within [0, N]")
    if not 0.0 < design_param < 1.0:
        raise ValueError("design_param must lie in (0, 1)")
    z = bhattacharyya(N, design_param)
    # least reliable first; ties by ascending index
    order = tuple(int(i) for i in np.lexsort((np.arange(N), -z)))
    frozen = tuple(sorted(order[:num_frozen]))
    unfrozen = tuple(sorted(order[num_frozen:]))
    mask = np.zeros(N, dtype=np.uint8)
    mask[list(frozen)] = 1
    mask.setflags(write=False)
    return PolarCodeSpec(N, n, frozen, unfrozen, order, float(design_param), mask)


def polar_transform(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.uint8)
    _check_pow2(u.shape[-1])
    if u.ndim == 1:
        return _kernels.polar_transform(np.ascontiguousarray(u))
    return _polar_py.polar_transform(u)


@dataclass(frozen=True)
class DecoderConfig:
    algorithm: str = "sc"
    list_size: int = 1
    max_iterations: int = 500
    hash_aided: bool = False
    outer_check: bool = True

    def __post_init__(self):
        if self.algorithm not in ("sc", "scl", "bp"):
            raise ValueError(f"unknown decoder {self.algorithm!r}")
        if self.list_size < 1 or self.list_size & (self.list_size - 1):
            raise ValueError("list_size must be a power of two")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "DecoderConfig":
        """Parse ``sc``, ``scl:<L>``, ``scl:<L>:hash``, ``bp:<iters>`` or ``bp:<iters>:plain``."""
        parts = text.lower().split(":")
        name = parts[0]
        if name == "sc" and len(parts) == 1:
            return cls("sc")
        if name == "scl" and len(parts) in (2, 3):
            hashed = len(parts) == 3
            if hashed and parts[2] != "hash":
                raise ValueError(f"bad decoder spec {text!r}")
            return cls("scl", list_size=int(parts[1]), hash_aided=hashed)
        if name == "bp" and len(parts) <= 3:
            if len(parts) == 3 and parts[2] != "plain":
                raise ValueError(f"bad decoder spec {text!r}")
            return cls("bp", max_iterations=int(parts[1]) if len(parts) >= 2 else 500,
                       outer_check=len(parts) < 3)
        raise ValueError(f"bad decoder spec {text!r}")

    @property
    def label(self) -> str:
        if self.algorithm == "scl":
            return f"scl:{self.list_size}" + (":hash" if self.hash_aided else "")
        if self.algorithm == "bp":
            return f"bp:{self.max_iterations}" + ("" if self.outer_check else ":plain")
        return "sc"


@dataclass
class DecodeResult:
    u: np.ndarray
    iterations: int = 0
    converged: bool = True
    predicate_failed: bool = False


def _prepare(llr, frozen_values, spec: PolarCodeSpec):
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    if llr.shape != (spec.N,):
        raise ValueError(f"expected {spec.N} LLRs, got {llr.shape}")
    if not np.all(np.isfinite(llr)):
        raise ValueError("LLRs must be finite")
    llr = np.clip(llr, -LLR_MAX, LLR_MAX)
    fv = np.asarray(frozen_values, dtype=np.uint8)
    if fv.shape != (spec.num_frozen,):
        raise ValueError(f"expected {spec.num_frozen} frozen values, got {fv.shape}")
    full = np.zeros(spec.N, dtype=np.uint8)
    full[list(spec.frozen)] = fv
    return llr, np.ascontiguousarray(spec.frozen_mask), full


def sc_decode(llr, frozen_values, spec: PolarCodeSpec) -> np.ndarray:
    llr, mask, full = _prepare(llr, frozen_values, spec)
    return _kernels.sc_decode(llr, mask, full)


def scl_candidates(llr, frozen_values, spec: PolarCodeSpec, list_size: int):
    """All surviving list paths, best metric first, with their metrics."""
    llr, mask, full = _prepare(llr, frozen_values, spec)
    return _kernels.scl_decode(llr, mask, full, int(list_size))


def scl_decode(
    llr,
    frozen_values,
    spec: PolarCodeSpec,
    config: DecoderConfig,
    validity: Callable[[np.ndarray], bool] | None = None,
) -> DecodeResult:
    paths, _ = scl_candidates(llr, frozen_values, spec, config.list_size)
    if config.hash_aided and validity is not None:
        for p in paths:
            if validity(p):
                return DecodeResult(p.copy())
        return DecodeResult(paths[0].copy(), predicate_failed=True)
    return DecodeResult(paths[0].copy())


def bp_decode(llr, frozen_values, spec: PolarCodeSpec, config: DecoderConfig,
              stop: Callable[[np.ndarray], bool] | None = None) -> DecodeResult:
    """Min-sum BP; ``stop`` is an optional per-iteration check on the decisions
    (e.g. an outer-code test) that ends decoding early when it passes."""
    llr, mask, full = _prepare(llr, frozen_values, spec)
    u, iters, stable = _kernels.bp_decode(llr, mask, full, int(config.max_iterations), LLR_MAX,
                                          stop if config.outer_check else None)
    return DecodeResult(u, iterations=int(iters), converged=bool(stable))


def decode(llr, frozen_values, spec: PolarCodeSpec, config: DecoderConfig,
           validity: Callable[[np.ndarray], bool] | None = None,
           stop: Callable[[np.ndarray], bool] | None = None) -> DecodeResult:
    if config.algorithm == "sc":
        return DecodeResult(sc_decode(llr, frozen_values, spec))
    if config.algorithm == "scl":
        return scl_decode(llr, frozen_values, spec, config, validity)
    return bp_decode(llr, frozen_values, spec, config, stop)


def bsc_llr(bits, p: float) -> np.ndarray:
    """Hard bits seen through BSC(p) as capped LLRs."""
    bits = np.asarray(bits, dtype=np.uint8)
    if p <= 0.0:
        mag = LLR_MAX
    elif p >= 0.5:
        mag = 0.0
    else:
        mag = min(LLR_MAX, float(np.log((1 - p) / p)))
    return (1.0 - 2.0 * bits) * mag
