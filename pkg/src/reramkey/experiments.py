"""Monte Carlo experiment engine.

Every trial draws its randomness from ``stream(seed, trial, purpose)`` so
results do not depend on worker count or scheduling, and runs at different
flip probabilities or with different decoders see paired noise: a bit flipped
at probability p is also flipped at every larger p.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import extractor as fe
from .polar import DecoderConfig
from .puf import PufResponse, make_attacker_response
from .rng import stream

SCHEMA_VERSION = 1
ATTACKER_MIN_HD = 0.4

_DEVICE, _NOISE, _ATTACKER = 0, 1, 2


def wilson_upper(failures: int, trials: int, confidence: float = 0.95) -> float:
    """One-sided Wilson score upper confidence bound on a binomial rate."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= failures <= trials:
        raise ValueError("failures must lie in [0, trials]")
    z = statistics.NormalDist().inv_cdf(confidence)
    n, ph = trials, failures / trials
    z2 = z * z
    centre = ph + z2 / (2 * n)
    spread = z * math.sqrt(ph * (1 - ph) / n + z2 / (4 * n * n))
    return min(1.0, max(ph, (centre + spread) / (1 + z2 / n)))


@dataclass(frozen=True)
class RunOptions:
    scheme_id: int | None = None
    literal_substitution: bool = False
    parity_llr_scale: float = fe.DEFAULT_PARITY_LLR_SCALE
    channel_p: float | None = None  # decoder's assumed p; defaults to the true p
    workers: int = 1
    chunk: int = 2000


@dataclass
class FailureStats:
    p: float
    decoder: str
    trials: int
    failures: int
    bch_failures: int = 0
    sum_bch_corrections: int = 0
    sum_iterations: int = 0
    sum_bit_errors: int = 0
    key_bits: int = 0
    runtime_s: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials

    @property
    def wilson_95_upper(self) -> float:
        return wilson_upper(self.failures, self.trials)

    @property
    def mean_bch_corrections(self) -> float:
        return self.sum_bch_corrections / self.trials

    @property
    def mean_iterations(self) -> float:
        return self.sum_iterations / self.trials

    @property
    def mean_key_error(self) -> float:
        return self.sum_bit_errors / (self.trials * self.key_bits) if self.key_bits else float("nan")

    @property
    def mean_runtime(self) -> float:
        return self.runtime_s / self.trials

    def merge(self, other: "FailureStats") -> None:
        self.trials += other.trials
        self.failures += other.failures
        self.bch_failures += other.bch_failures
        self.sum_bch_corrections += other.sum_bch_corrections
        self.sum_iterations += other.sum_iterations
        self.sum_bit_errors += other.sum_bit_errors
        self.runtime_s += other.runtime_s
        self.key_bits = self.key_bits or other.key_bits


def device_bits(seed: int, trial: int, k: int) -> np.ndarray:
    return stream(seed, trial, _DEVICE).integers(0, 2, k, dtype=np.uint8)


def noisy_bits(bits: np.ndarray, p: float, seed: int, trial: int) -> np.ndarray:
    u = stream(seed, trial, _NOISE).random(bits.size)
    return bits ^ (u < p).astype(np.uint8)


def attacker_bits(bits: np.ndarray, seed: int, trial: int) -> np.ndarray:
    ref = PufResponse(bits, 0)
    return make_attacker_response(bits.size, ref, ATTACKER_MIN_HD, (seed, trial)).bits


def _chunk(args):
    p, decoders, start, stop, seed, attacker, opts = args
    params = fe.full_size_params(opts.scheme_id)
    k = params.bch.k
    configs = [DecoderConfig.parse(d) for d in decoders]
    stats = [FailureStats(p, c.label if not opts.literal_substitution else "literal", 0, 0)
             for c in configs]
    cp = p if opts.channel_p is None else opts.channel_p
    for trial in range(start, stop):
        x = device_bits(seed, trial, k)
        rec, key = fe.register(x, params)
        y = attacker_bits(x, seed, trial) if attacker else noisy_bits(x, p, seed, trial)
        for cfg, st in zip(configs, stats):
            t0 = time.perf_counter()
            r = fe.regenerate(y, rec, cfg, cp, literal_substitution=opts.literal_substitution,
                              parity_llr_scale=opts.parity_llr_scale, true_raw_key=key.raw_bits,
                              params=params)
            st.runtime_s += time.perf_counter() - t0
            st.trials += 1
            st.failures += not r.match
            st.bch_failures += r.bch_failure
            st.sum_bch_corrections += r.bch_corrections
            st.sum_iterations += r.iterations
            st.sum_bit_errors += r.prehash_bit_errors
            st.key_bits = key.raw_bits.size
        key.wipe()
    return stats


def _run(p, decoders, trials, seed, attacker, opts: RunOptions) -> list[FailureStats]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    step = max(1, opts.chunk)
    jobs = [(p, tuple(decoders), s, min(trials, s + step), seed, attacker, opts)
            for s in range(0, trials, step)]
    if opts.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(opts.workers) as ex:
            parts = list(ex.map(_chunk, jobs))
    else:
        parts = [_chunk(j) for j in jobs]
    out = parts[0]
    for part in parts[1:]:
        for a, b in zip(out, part):
            a.merge(b)
    return out


def run_failure_mc(p_values, trials: int, decoders=("sc",), seed: int = 0,
                   attacker: bool = False, opts: RunOptions = RunOptions()) -> list[FailureStats]:
    """Hash-mismatch counts per (p, decoder), on paired devices and noise."""
    rows = []
    for p in p_values:
        rows.extend(_run(float(p), decoders, trials, seed, attacker, opts))
    return rows


@dataclass(frozen=True)
class BerPoint:
    p: float
    legit: float
    attacker: float
    trials: int


def run_ber_sweep(p_values, trials: int, decoder: str = "sc", seed: int = 0,
                  opts: RunOptions = RunOptions()) -> list[BerPoint]:
    out = []
    for p in p_values:
        leg = _run(float(p), (decoder,), trials, seed, False, opts)[0]
        att = _run(float(p), (decoder,), trials, seed, True, opts)[0]
        out.append(BerPoint(float(p), leg.mean_key_error, att.mean_key_error, trials))
    return out


def run_decoder_compare(p_values, trials: int, decoders, seed: int = 0,
                        opts: RunOptions = RunOptions()) -> list[FailureStats]:
    return run_failure_mc(p_values, trials, decoders, seed, False, opts)


@dataclass(frozen=True)
class TimingRow:
    decoder: str
    trials: int
    batches: int
    median_of_means_s: float


def run_timing(decoders, trials: int = 100, p: float = 0.15, seed: int = 0, batches: int = 5,
               opts: RunOptions = RunOptions()) -> list[TimingRow]:
    """Median over ``batches`` of the mean regeneration time after one warm-up pass."""
    if trials < batches:
        raise ValueError("need at least one trial per batch")
    params = fe.full_size_params(opts.scheme_id)
    k = params.bch.k
    cases = []
    for t in range(trials):
        x = device_bits(seed, t, k)
        rec, key = fe.register(x, params)
        key.wipe()
        cases.append((rec, noisy_bits(x, p, seed, t)))
    rows = []
    for d in decoders:
        cfg = DecoderConfig.parse(d)

        def once(case):
            fe.regenerate(case[1], case[0], cfg, p, literal_substitution=opts.literal_substitution,
                          parity_llr_scale=opts.parity_llr_scale, params=params)

        for case in cases[: min(10, trials)]:
            once(case)
        means = []
        for chunk in np.array_split(np.arange(trials), batches):
            t0 = time.perf_counter()
            for i in chunk:
                once(cases[i])
            means.append((time.perf_counter() - t0) / len(chunk))
        rows.append(TimingRow(cfg.label, trials, batches, statistics.median(means)))
    return rows


# --- CSV --------------------------------------------------------------------

SCHEMAS = {
    "mc_failure": ["p", "decoder", "trials", "failures", "failure_rate", "wilson_95_upper",
                   "bch_failures", "mean_bch_corrections", "mean_iterations", "mean_key_error"],
    "ber_sweep": ["p", "percent_key_error_legit", "percent_key_error_attacker", "trials"],
    "decoder_compare": ["p", "decoder", "block_error_rate", "mean_runtime", "trials"],
    "timing": ["decoder", "trials", "batches", "median_of_means_s"],
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def to_csv(kind: str, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# reramkey {kind} v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCHEMAS[kind])
    for r in rows:
        if kind == "mc_failure":
            vals = [r.p, r.decoder, r.trials, r.failures, r.failure_rate, r.wilson_95_upper,
                    r.bch_failures, r.mean_bch_corrections, r.mean_iterations, r.mean_key_error]
        elif kind == "ber_sweep":
            vals = [r.p, 100 * r.legit, 100 * r.attacker, r.trials]
        elif kind == "decoder_compare":
            vals = [r.p, r.decoder, r.failure_rate, r.mean_runtime, r.trials]
        elif kind == "timing":
            vals = [r.decoder, r.trials, r.batches, r.median_of_means_s]
        else:
            raise ValueError(f"unknown CSV kind {kind!r}")
        w.writerow([_fmt(v) for v in vals])
    return buf.getvalue()


def read_csv(text: str) -> tuple[str, list[dict]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# reramkey "):
        raise ValueError("missing reramkey CSV header line")
    parts = lines[0].split()
    if len(parts) != 4 or parts[2] not in SCHEMAS or parts[3] != f"v{SCHEMA_VERSION}":
        raise ValueError(f"unsupported CSV schema line {lines[0]!r}")
    kind = parts[2]
    reader = csv.DictReader(lines[1:])
    if reader.fieldnames != SCHEMAS[kind]:
        raise ValueError(f"{kind} CSV columns must be {SCHEMAS[kind]}")
    return kind, list(reader)
