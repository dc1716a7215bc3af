"""Acceptance gate: one test per criterion, each printing a PASS/FAIL summary line.

The lines are collected by conftest.py and shown at the end of the run.
"""
import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from reramkey import bch as bchmod
from reramkey import experiments as ex
from reramkey import extractor as fe
from reramkey import polar
from reramkey.cli import main
from reramkey.plot import render_svg

ARTIFACTS = Path(__file__).resolve().parent.parent / "artifacts"
pytestmark = pytest.mark.slow


def report(n: int, ok: bool, detail: str, t0: float) -> None:
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail} ({time.perf_counter() - t0:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_sizes():
    t0 = time.perf_counter()
    p = fe.full_size_params()
    rec, key = fe.register(np.random.default_rng(1).integers(0, 2, 131, dtype=np.uint8), p)
    data = fe.serialize_record(rec)
    payload = fe.helper_payload_size(rec.num_frozen)
    # helper bytes sit right after the u32 helper length that follows the mask
    off = fe._HEAD.size + 4 + 2 * len(rec.mask) + 4
    hlen = int.from_bytes(data[off - 4:off], "little")
    tail = len(data) - off - payload
    ok = (rec.helper.size == 262 and key.raw_bits.size == 250 and payload == 33
          and hlen == 262 and tail == 32 + 2 + 4)
    report(1, ok and time.perf_counter() - t0 < 1.0,
           f"helper={rec.helper.size} key={key.raw_bits.size} payload={payload}B", t0)


def test_criterion_2_exact_regeneration_p0():
    t0 = time.perf_counter()
    (row,) = ex.run_failure_mc([0.0], 10_000, ("sc",), seed=2)
    dt = time.perf_counter() - t0
    report(2, row.failures == 0 and dt < 60, f"{row.trials - row.failures}/{row.trials} matched", t0)


def test_criterion_3_failure_rate_p015():
    t0 = time.perf_counter()
    sc, bp = ex.run_failure_mc([0.15], 100_000, ("sc", "bp:500"), seed=3)
    ARTIFACTS.mkdir(exist_ok=True)
    (ARTIFACTS / "mc_failure_p015.csv").write_text(ex.to_csv("mc_failure", [sc, bp]))
    ok = sc.failures == 0 and sc.wilson_95_upper <= 3.7e-5 and bp.failures <= sc.failures
    report(3, ok, f"SC {sc.failures}/{sc.trials} (Wilson95 upper {sc.wilson_95_upper:.3g}); "
                  f"BP {bp.failures}/{bp.trials} paired", t0)


def test_criterion_4_attacker():
    t0 = time.perf_counter()
    (row,) = ex.run_failure_mc([0.15], 10_000, ("sc",), seed=4, attacker=True)
    matches = row.trials - row.failures
    err = row.mean_key_error
    report(4, matches == 0 and 0.45 <= err <= 0.55,
           f"{matches} matches in {row.trials}; mean pre-hash key error {err:.4f}", t0)


def test_criterion_5_exact_recovery_region():
    t0 = time.perf_counter()
    gated = ex.run_failure_mc([0.0, 0.05, 0.10], 1000, ("sc",), seed=5)
    gate = all(r.failures == 0 and r.sum_bit_errors == 0 for r in gated)
    ps = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30]
    curve = ex.run_ber_sweep(ps, 1000, "sc", seed=5)
    ARTIFACTS.mkdir(exist_ok=True)
    text = ex.to_csv("ber_sweep", curve)
    (ARTIFACTS / "ber_sweep.csv").write_text(text)
    (ARTIFACTS / "ber_sweep.svg").write_text(render_svg(text))
    legit = [pt.legit for pt in curve]
    monotone = all(a <= b for a, b in zip(legit, legit[1:]))
    exact_upto = max((pt.p for pt in curve if pt.legit == 0.0), default=0.0)
    report(5, gate, f"0 key errors at p<=0.10 over 1000 trials: {gate}; "
                    f"curve monotone={monotone}, exact up to p={exact_upto:g}, "
                    f"error at 0.30={100 * legit[-1]:.2f}%", t0)


def _bch_exhaustive(m, t):
    spec = bchmod.build_bch_spec(m, t)
    n, k = spec.n, spec.k
    bad = 0
    for msg in itertools.product((0, 1), repeat=k):
        cw = bchmod.bch_encode(np.array(msg, np.uint8), spec)
        for w in range(spec.t + 1):
            for pos in itertools.combinations(range(n), w):
                r = cw.copy()
                r[list(pos)] ^= 1
                got, nc = bchmod.bch_decode(r, spec)
                bad += not (np.array_equal(got, msg) and nc == w)
    return bad


def test_criterion_6_codec_properties():
    t0 = time.perf_counter()
    bad = _bch_exhaustive(3, 1) + _bch_exhaustive(4, 2)
    spec = bchmod.build_bch_spec(8, 18)
    rng = np.random.default_rng(6)
    for _ in range(10_000):
        msg = rng.integers(0, 2, spec.k, dtype=np.uint8)
        w = int(rng.integers(0, spec.t + 1))
        r = bchmod.bch_encode(msg, spec)
        r[rng.choice(spec.n, w, replace=False)] ^= 1
        got, nc = bchmod.bch_decode(r, spec)
        bad += not (np.array_equal(got, msg) and nc == w)
    inv = 0
    for N in (2, 4, 8, 16):
        for v in range(1 << N):
            u = np.array([(v >> i) & 1 for i in range(N)], np.uint8)
            inv += not np.array_equal(polar.polar_transform(polar.polar_transform(u)), u)
    for _ in range(1000):
        u = rng.integers(0, 2, 512, dtype=np.uint8)
        inv += not np.array_equal(polar.polar_transform(polar.polar_transform(u)), u)
    dec = 0
    pspec = polar.construct_frozen_set(512, 262, 0.5)
    F = list(pspec.frozen)
    configs = [polar.DecoderConfig.parse(d) for d in ("sc", "scl:8", "bp:500")]
    for _ in range(1000):
        u = rng.integers(0, 2, 512, dtype=np.uint8)
        llr = polar.bsc_llr(polar.polar_transform(u), 0.05)
        for cfg in configs:
            dec += not np.array_equal(polar.decode(llr, u[F], pspec, cfg).u, u)
    dt = time.perf_counter() - t0
    report(6, bad == 0 and inv == 0 and dec == 0 and dt < 120,
           f"BCH errors={bad} involution errors={inv} noiseless decode errors={dec}", t0)


def test_criterion_7_helper_key_independence():
    t0 = time.perf_counter()
    toy = fe.make_params(bchmod.build_bch_spec(3, 1), polar.construct_frozen_set(8, 5, 0.5))
    rows = [fe.register(np.array(m, np.uint8), toy) for m in itertools.product((0, 1), repeat=4)]
    H = np.array([r.helper for r, _ in rows])
    K = np.array([k.raw_bits for _, k in rows])
    nonuniform = pairs = 0
    for i in range(H.shape[1]):
        for j in range(K.shape[1]):
            h, k = H[:, i], K[:, j]
            if np.ptp(h) == 0 or np.ptp(k) == 0:
                continue
            pairs += 1
            nonuniform += np.bincount(2 * h + k, minlength=4).tolist() != [4, 4, 4, 4]
    p = fe.full_size_params()
    X = np.random.default_rng(7).integers(0, 2, (10_000, 131), dtype=np.uint8)
    Hs, Ks = [], []
    for x in X:
        rec, key = fe.register(x, p)
        Hs.append(rec.helper)
        Ks.append(key.raw_bits)
    Hf, Kf = np.array(Hs, float), np.array(Ks, float)
    Hf -= Hf.mean(0)
    Kf -= Kf.mean(0)
    hs, ks = Hf.std(0), Kf.std(0)
    live_h, live_k = hs > 0, ks > 0
    rho = (Hf[:, live_h].T @ Kf[:, live_k] / len(X)) / np.outer(hs[live_h], ks[live_k])
    worst = float(np.abs(rho).max())
    dt = time.perf_counter() - t0
    report(7, nonuniform == 0 and pairs > 0 and worst < 0.05 and dt < 60,
           f"toy: {pairs} non-degenerate pairs, {nonuniform} non-uniform; "
           f"full size max |rho|={worst:.4f}", t0)


def _artifacts_once(d: Path) -> list[bytes]:
    d.mkdir()
    calls = [
        ["enroll", "--synthetic-seed", "8", "--record", str(d / "dev.rec")],
        ["mc-failure", "--p", "0.1,0.2", "--trials", "200", "--decoder", "sc,bp:500",
         "--seed", "8", "--csv", str(d / "mc.csv")],
        ["ber-sweep", "--p", "0,0.15,0.3", "--trials", "100", "--seed", "8",
         "--csv", str(d / "ber.csv")],
        ["plot", "--csv", str(d / "mc.csv"), "--out", str(d / "mc.svg")],
        ["plot", "--csv", str(d / "ber.csv"), "--out", str(d / "ber.svg")],
    ]
    for c in calls:
        assert main(c) == 0, c
    return [(d / f).read_bytes() for f in ("dev.rec", "mc.csv", "ber.csv", "mc.svg", "ber.svg")]


def test_criterion_8_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    a = _artifacts_once(tmp_path / "a")
    b = _artifacts_once(tmp_path / "b")
    capsys.readouterr()
    same = [x == y for x, y in zip(a, b)]
    report(8, all(same), f"{sum(same)}/{len(same)} artifacts byte-identical "
                         "(record, 2 CSVs, 2 SVGs)", t0)
