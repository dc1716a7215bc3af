"""BCH + polar fuzzy extractor: registration, regeneration and record files.

Registration embeds the BCH codeword of the PUF bits into a length-N vector
``w`` (known zeros elsewhere), computes ``c = T(w)`` and splits ``c`` into the
public frozen part (helper data) and the secret unfrozen part (raw key).

Regeneration treats the noisy response as a soft observation of ``w`` and runs
an ordinary polar decoder whose frozen inputs are the helper bits. ``T`` is an
involution, so the decoded input vector maps straight back to ``w``.
"""
from __future__ import annotations

import hashlib
import hmac
import struct
import zlib
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import bch as bchmod
from . import polar as polarmod
from .bch import BchCodeSpec, DecodeFailure
from .layout import PaddingScheme, default_scheme_id, padding_scheme
from .polar import LLR_MAX, DecoderConfig, PolarCodeSpec

MAGIC = b"PUFK"
FORMAT_VERSION = 1
DEFAULT_CHANNEL_P = 0.15
DEFAULT_PARITY_LLR_SCALE = 0.0


class IntegrityError(ValueError):
    pass


def pack_bits(bits) -> bytes:
    """MSB-first packing; the final partial byte is zero padded."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def unpack_bits(data: bytes, nbits: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:nbits].copy()


def key_digest(raw_bits) -> bytes:
    return hashlib.sha256(pack_bits(raw_bits)).digest()


@dataclass
class SecretKey:
    """Raw key bits live here only until :meth:`wipe`; never serialized."""

    raw_bits: np.ndarray = field(repr=False)
    hash: bytes

    def wipe(self) -> None:
        self.raw_bits[:] = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.wipe()


@dataclass(frozen=True)
class EnrollmentRecord:
    bch_m: int
    bch_n: int
    bch_k: int
    bch_t: int
    bch_primitive_poly: int
    polar_N: int
    num_frozen: int
    design_param: float
    frozen_crc32: int
    mask: tuple[int, ...]
    helper_bits: bytes  # one byte per bit (0/1), kept as bytes for immutability
    key_hash: bytes
    padding_scheme: int
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if len(self.helper_bits) != self.num_frozen:
            raise ValueError("helper length must equal the number of frozen bits")
        if len(self.key_hash) != 32:
            raise ValueError("key hash must be 32 bytes")

    @property
    def helper(self) -> np.ndarray:
        return np.frombuffer(self.helper_bits, dtype=np.uint8).copy()

    def bch_spec(self) -> BchCodeSpec:
        return bchmod.spec_from_params(
            self.bch_m, self.bch_n, self.bch_k, self.bch_t, self.bch_primitive_poly
        )

    def polar_spec(self) -> PolarCodeSpec:
        spec = polarmod.construct_frozen_set(self.polar_N, self.num_frozen, self.design_param)
        if spec.frozen_checksum() != self.frozen_crc32:
            raise IntegrityError("frozen-set checksum does not match the recomputed set")
        return spec

    def scheme(self) -> PaddingScheme:
        return padding_scheme(self.padding_scheme, self.bch_n, self.polar_N)


@dataclass(frozen=True)
class RegenResult:
    key_hash: bytes
    match: bool
    bch_corrections: int
    decoder: str
    flags: tuple[str, ...] = ()
    iterations: int = 0
    prehash_bit_errors: int | None = None

    @property
    def bch_failure(self) -> bool:
        return "bch_failure" in self.flags


@dataclass(frozen=True)
class ExtractorParams:
    bch: BchCodeSpec
    polar: PolarCodeSpec
    scheme: PaddingScheme


@lru_cache(maxsize=16)
def full_size_params(scheme_id: int | None = None) -> ExtractorParams:
    """(255,131) t=18 BCH inside a length-512 polar code with 262 frozen bits."""
    bch = bchmod.build_bch_spec(8, 18)
    pol = polarmod.construct_frozen_set(512, 262, 0.5)
    sid = default_scheme_id(bch.n, pol.N) if scheme_id is None else scheme_id
    return ExtractorParams(bch, pol, padding_scheme(sid, bch.n, pol.N))


def make_params(bch: BchCodeSpec, pol: PolarCodeSpec, scheme_id: int | None = None) -> ExtractorParams:
    if pol.N < bch.n:
        raise ValueError("polar length must be at least the BCH length")
    sid = default_scheme_id(bch.n, pol.N) if scheme_id is None else scheme_id
    return ExtractorParams(bch, pol, padding_scheme(sid, bch.n, pol.N))


def _transform_of(puf_bits, params: ExtractorParams) -> np.ndarray:
    w = params.scheme.embed(bchmod.bch_encode(puf_bits, params.bch))
    return polarmod.polar_transform(w)


def register(puf_bits, params: ExtractorParams, mask=None) -> tuple[EnrollmentRecord, SecretKey]:
    x = np.asarray(puf_bits, dtype=np.uint8)
    if x.shape != (params.bch.k,):
        raise ValueError(f"expected {params.bch.k} PUF bits, got {x.shape}")
    if np.any(x > 1):
        raise ValueError("PUF bits must be 0 or 1")
    pol = params.polar
    c = _transform_of(x, params)
    helper = c[list(pol.frozen)]
    raw = c[list(pol.unfrozen)].copy()
    c[:] = 0
    key = SecretKey(raw, key_digest(raw))
    mask = tuple(range(params.bch.k)) if mask is None else tuple(int(m) for m in mask)
    b = params.bch
    rec = EnrollmentRecord(
        bch_m=b.m, bch_n=b.n, bch_k=b.k, bch_t=b.t, bch_primitive_poly=b.primitive_poly,
        polar_N=pol.N, num_frozen=pol.num_frozen, design_param=pol.design_param,
        frozen_crc32=pol.frozen_checksum(), mask=mask, helper_bits=helper.tobytes(),
        key_hash=key.hash, padding_scheme=params.scheme.id,
    )
    return rec, key


def params_of(record: EnrollmentRecord) -> ExtractorParams:
    return ExtractorParams(record.bch_spec(), record.polar_spec(), record.scheme())


def observation_llr(noisy_puf_bits, params: ExtractorParams, channel_p: float,
                    parity_llr_scale: float = DEFAULT_PARITY_LLR_SCALE) -> np.ndarray:
    """Channel LLRs for the pre-transform vector seen through a noisy response.

    Message positions get BSC(channel_p) reliabilities, parity positions the
    same scaled by ``parity_llr_scale``, padding positions are certain zeros.
    """
    b, sch = params.bch, params.scheme
    w_obs = bchmod.bch_encode(noisy_puf_bits, b)
    soft = polarmod.bsc_llr(w_obs, channel_p)
    soft[b.k:] *= parity_llr_scale
    llr = np.full(sch.N, LLR_MAX)
    llr[list(sch.positions)] = soft
    return llr


def _enrolled_key(x: np.ndarray, params: ExtractorParams) -> np.ndarray:
    return _transform_of(x, params)[list(params.polar.unfrozen)]


def _outer_codeword(params: ExtractorParams):
    """Cheap test that a decoded input vector maps to padded BCH codeword."""
    pad = params.scheme.pad_mask
    b = params.bch

    def check(u) -> bool:
        w = polarmod.polar_transform(u)
        if w[pad].any():
            return False
        return not bchmod.syndromes(params.scheme.extract(w), b).any()
    return check


def _rederive(c_hat: np.ndarray, params: ExtractorParams):
    """Map a decoded input vector back to PUF bits and the raw key they enroll.

    Raises :class:`DecodeFailure` with ``.fallback`` set to the key enrolled by
    the uncorrected message part, for diagnostics.
    """
    word = params.scheme.extract(polarmod.polar_transform(c_hat))
    try:
        x_hat, ncorr = bchmod.bch_decode(word, params.bch)
    except DecodeFailure as exc:
        exc.fallback = _enrolled_key(word[: params.bch.k], params)
        raise
    return x_hat, ncorr, _enrolled_key(x_hat, params)


def regenerate(
    noisy_puf_bits,
    record: EnrollmentRecord,
    config: DecoderConfig = DecoderConfig(),
    channel_p: float = DEFAULT_CHANNEL_P,
    *,
    literal_substitution: bool = False,
    parity_llr_scale: float = DEFAULT_PARITY_LLR_SCALE,
    true_raw_key=None,
    params: ExtractorParams | None = None,
) -> RegenResult:
    params = params_of(record) if params is None else params
    pol = params.polar
    x = np.asarray(noisy_puf_bits, dtype=np.uint8)
    if x.shape != (params.bch.k,):
        raise ValueError(f"expected {params.bch.k} PUF bits, got {x.shape}")
    helper = record.helper
    flags: list[str] = []
    iterations = 0

    if literal_substitution:
        c_hat = polarmod.polar_transform(params.scheme.embed(bchmod.bch_encode(x, params.bch)))
        c_hat[list(pol.frozen)] = helper
        label = "literal"
    else:
        llr = observation_llr(x, params, channel_p, parity_llr_scale)
        validity = None
        if config.algorithm == "scl" and config.hash_aided:
            def validity(u):
                try:
                    _, _, raw = _rederive(u, params)
                except DecodeFailure:
                    return False
                return hmac.compare_digest(key_digest(raw), record.key_hash)
        stop = _outer_codeword(params) if config.algorithm == "bp" else None
        res = polarmod.decode(llr, helper, pol, config, validity, stop)
        c_hat, iterations = res.u, res.iterations
        if not res.converged:
            flags.append("not_converged")
        if res.predicate_failed:
            flags.append("no_valid_path")
        label = config.label

    ncorr = 0
    try:
        _, ncorr, raw = _rederive(c_hat, params)
    except DecodeFailure as exc:
        flags.append("bch_failure")
        raw = exc.fallback
    digest = key_digest(raw)
    errors = None
    if true_raw_key is not None:
        errors = int(np.count_nonzero(raw != np.asarray(true_raw_key, dtype=np.uint8)))
    raw[:] = 0
    match = "bch_failure" not in flags and hmac.compare_digest(digest, record.key_hash)
    return RegenResult(digest, bool(match), int(ncorr), label, tuple(flags), int(iterations), errors)


def verify(candidate_hash: bytes, record: EnrollmentRecord) -> bool:
    return hmac.compare_digest(bytes(candidate_hash), record.key_hash)


# --- record files -----------------------------------------------------------
#
# little endian: magic, u16 version, u16 m, u16 n, u16 k, u16 t, u32 primitive
# poly, u32 N, u32 |F|, f64 design param, u32 frozen crc, u32 mask_len, u16 per
# mask entry, u32 helper_bit_len, packed helper bytes, 32-byte key hash,
# u16 padding scheme, u32 crc of everything before it.

_HEAD = struct.Struct("<4sHHHHHIIIdI")


def serialize_record(rec: EnrollmentRecord) -> bytes:
    if any(not 0 <= m < 1 << 16 for m in rec.mask):
        raise ValueError("mask entries must fit in u16")
    out = bytearray(_HEAD.pack(
        MAGIC, rec.version, rec.bch_m, rec.bch_n, rec.bch_k, rec.bch_t,
        rec.bch_primitive_poly, rec.polar_N, rec.num_frozen, rec.design_param,
        rec.frozen_crc32,
    ))
    out += struct.pack("<I", len(rec.mask))
    out += np.asarray(rec.mask, dtype="<u2").tobytes()
    out += struct.pack("<I", rec.num_frozen)
    out += pack_bits(rec.helper)
    out += rec.key_hash
    out += struct.pack("<H", rec.padding_scheme)
    out += struct.pack("<I", zlib.crc32(out) & 0xFFFFFFFF)
    return bytes(out)


def helper_payload_size(num_frozen: int) -> int:
    return (num_frozen + 7) // 8


def deserialize_record(data: bytes, *, check_frozen: bool = True) -> EnrollmentRecord:
    data = bytes(data)
    if len(data) < _HEAD.size + 4:
        raise IntegrityError("record truncated")
    if data[:4] != MAGIC:
        raise IntegrityError("bad magic")
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != crc:
        raise IntegrityError("file checksum mismatch")
    head = _HEAD.unpack_from(data, 0)
    version = head[1]
    if version != FORMAT_VERSION:
        raise IntegrityError(f"unsupported record version {version}")
    m, n, k, t, prim, N, nf, dp, fcrc = head[2:]
    off = _HEAD.size
    try:
        (mlen,) = struct.unpack_from("<I", data, off)
        off += 4
        mask = tuple(int(v) for v in np.frombuffer(data, dtype="<u2", count=mlen, offset=off))
        off += 2 * mlen
        (hlen,) = struct.unpack_from("<I", data, off)
        off += 4
        nbytes = helper_payload_size(hlen)
        helper = unpack_bits(data[off:off + nbytes], hlen)
        if helper.size != hlen:
            raise IntegrityError("record truncated")
        off += nbytes
        key_hash = data[off:off + 32]
        off += 32
        (scheme,) = struct.unpack_from("<H", data, off)
        off += 2
    except (struct.error, ValueError) as exc:
        raise IntegrityError(f"record truncated: {exc}") from None
    if off != len(data) - 4:
        raise IntegrityError("trailing bytes in record")
    if hlen != nf:
        raise IntegrityError("helper length disagrees with frozen-set size")
    rec = EnrollmentRecord(
        bch_m=m, bch_n=n, bch_k=k, bch_t=t, bch_primitive_poly=prim, polar_N=N,
        num_frozen=nf, design_param=dp, frozen_crc32=fcrc, mask=mask,
        helper_bits=helper.tobytes(), key_hash=key_hash, padding_scheme=scheme, version=version,
    )
    if check_frozen:
        rec.polar_spec()
    return rec
