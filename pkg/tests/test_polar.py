import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reramkey import polar
from reramkey.polar import (
    DecoderConfig, bhattacharyya, bsc_llr, construct_frozen_set, decode, polar_transform,
    sc_decode, scl_candidates,
)


def kron_matrix(n):
    F = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, F)
    return G


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_transform_matches_kronecker_and_is_involution_exhaustive(n):
    N = 1 << n
    G = kron_matrix(n)
    for bits in itertools.product((0, 1), repeat=N):
        u = np.array(bits, dtype=np.uint8)
        x = polar_transform(u)
        assert np.array_equal(x, (u.astype(np.int64) @ G) % 2)
        assert np.array_equal(polar_transform(x), u)


def test_transform_involution_randomized_512():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        u = rng.integers(0, 2, 512, dtype=np.uint8)
        assert np.array_equal(polar_transform(polar_transform(u)), u)


def test_transform_batch_matches_single():
    rng = np.random.default_rng(1)
    U = rng.integers(0, 2, (20, 64), dtype=np.uint8)
    B = polar_transform(U)
    for u, b in zip(U, B):
        assert np.array_equal(polar_transform(u), b)


def test_transform_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        polar_transform(np.zeros(6, np.uint8))


def test_bhattacharyya_two_channels():
    z = bhattacharyya(2, 0.3)
    assert z == pytest.approx([2 * 0.3 - 0.09, 0.09])


@given(st.floats(0.01, 0.99), st.integers(1, 9))
def test_bhattacharyya_conserves_erasure_mass(Z, n):
    # for the erasure channel the synthetic channels keep total capacity
    z = bhattacharyya(1 << n, Z)
    assert z.sum() == pytest.approx((1 << n) * Z)
    assert np.all((z >= 0) & (z <= 1))


def test_toy_frozen_set():
    s = construct_frozen_set(8, 5, 0.5)
    assert s.frozen == (0, 1, 2, 3, 4)
    assert s.unfrozen == (5, 6, 7)


def test_full_size_frozen_set_sizes():
    s = construct_frozen_set(512, 262, 0.5)
    assert (s.num_frozen, s.K) == (262, 250)
    assert set(s.frozen).isdisjoint(s.unfrozen)
    assert sorted(s.frozen + s.unfrozen) == list(range(512))


@given(st.integers(1, 9), st.data())
def test_frozen_set_is_least_reliable(n, data):
    N = 1 << n
    nf = data.draw(st.integers(0, N))
    Z = data.draw(st.floats(0.05, 0.95))
    s = construct_frozen_set(N, nf, Z)
    z = bhattacharyya(N, Z)
    if 0 < nf < N:
        assert z[list(s.frozen)].min() >= z[list(s.unfrozen)].max()


def test_frozen_set_validation():
    with pytest.raises(ValueError):
        construct_frozen_set(12, 3)
    with pytest.raises(ValueError):
        construct_frozen_set(8, 9)
    with pytest.raises(ValueError):
        construct_frozen_set(8, 3, 1.0)


def test_frozen_checksum_stable():
    s = construct_frozen_set(512, 262, 0.5)
    assert s.frozen_checksum() == construct_frozen_set(512, 262, 0.5).frozen_checksum()
    assert s.frozen_checksum() != construct_frozen_set(512, 261, 0.5).frozen_checksum()


@pytest.mark.parametrize("text,label", [("sc", "sc"), ("scl:8", "scl:8"), ("SCL:4:hash", "scl:4:hash"),
                                        ("bp:30", "bp:30"), ("bp", "bp:500"),
                                        ("bp:20:plain", "bp:20:plain")])
def test_decoder_config_parse(text, label):
    assert DecoderConfig.parse(text).label == label


@pytest.mark.parametrize("bad", ["scl:3", "bp:0", "foo", "sc:2", "scl:4:crc", "bp:5:x"])
def test_decoder_config_rejects(bad):
    with pytest.raises(ValueError):
        DecoderConfig.parse(bad)


def _instance(rng, spec):
    u = rng.integers(0, 2, spec.N, dtype=np.uint8)
    x = polar_transform(u)
    return u, u[list(spec.frozen)], bsc_llr(x, 0.0)


@pytest.mark.parametrize("cfg", ["sc", "scl:4", "bp:60"])
def test_noiseless_recovery(cfg):
    spec = construct_frozen_set(512, 262, 0.5)
    c = DecoderConfig.parse(cfg)
    rng = np.random.default_rng(7)
    for _ in range(1000 if cfg != "scl:4" else 300):
        u, fv, llr = _instance(rng, spec)
        assert np.array_equal(decode(llr, fv, spec, c).u, u)


@pytest.mark.parametrize("N", [8, 64, 256])
def test_scl_list_one_equals_sc(N):
    spec = construct_frozen_set(N, N // 2, 0.5)
    rng = np.random.default_rng(N)
    for _ in range(200):
        u, fv, _ = _instance(rng, spec)
        llr = rng.normal(0, 3, N)
        paths, _ = scl_candidates(llr, fv, spec, 1)
        assert np.array_equal(paths[0], sc_decode(llr, fv, spec))


def test_scl_metrics_sorted_and_frozen_respected():
    spec = construct_frozen_set(64, 32, 0.5)
    rng = np.random.default_rng(2)
    _, fv, _ = _instance(rng, spec)
    paths, metrics = scl_candidates(rng.normal(0, 2, 64), fv, spec, 8)
    assert len(paths) == 8
    assert np.all(np.diff(metrics) >= 0)
    assert np.all(paths[:, list(spec.frozen)] == fv)
    assert len({p.tobytes() for p in paths}) == 8


def test_hash_aided_selects_valid_path():
    spec = construct_frozen_set(64, 32, 0.5)
    rng = np.random.default_rng(3)
    _, fv, _ = _instance(rng, spec)
    llr = rng.normal(0, 1, 64)
    paths, _ = scl_candidates(llr, fv, spec, 8)
    target = paths[5].tobytes()
    cfg = DecoderConfig.parse("scl:8:hash")
    res = polar.scl_decode(llr, fv, spec, cfg, lambda u: u.tobytes() == target)
    assert res.u.tobytes() == target and not res.predicate_failed
    res = polar.scl_decode(llr, fv, spec, cfg, lambda u: False)
    assert res.predicate_failed and np.array_equal(res.u, paths[0])


def test_sc_beats_chance_on_noisy_channel():
    spec = construct_frozen_set(256, 192, 0.5)
    rng = np.random.default_rng(4)
    ok = 0
    for _ in range(200):
        u, fv, _ = _instance(rng, spec)
        x = polar_transform(u) ^ (rng.random(256) < 0.03).astype(np.uint8)
        ok += np.array_equal(sc_decode(bsc_llr(x, 0.03), fv, spec), u)
    assert ok > 180


def test_bp_reports_iterations():
    spec = construct_frozen_set(64, 32, 0.5)
    rng = np.random.default_rng(5)
    u, fv, llr = _instance(rng, spec)
    res = decode(llr, fv, spec, DecoderConfig.parse("bp:60"))
    assert res.converged and 2 <= res.iterations <= 60


def test_bp_stop_hook():
    spec = construct_frozen_set(64, 32, 0.5)
    u, fv, llr = _instance(np.random.default_rng(6), spec)
    calls = []

    def never(v):
        calls.append(v.copy())
        return False

    res = decode(llr, fv, spec, DecoderConfig.parse("bp:7"), stop=never)
    assert len(calls) == 7 and res.iterations == 7 and not res.converged
    res = decode(llr, fv, spec, DecoderConfig.parse("bp:7"), stop=lambda v: np.array_equal(v, u))
    assert res.converged and np.array_equal(res.u, u)
    calls.clear()
    res = decode(llr, fv, spec, DecoderConfig.parse("bp:7:plain"), stop=never)
    assert not calls and res.converged


def test_decode_validates_inputs():
    spec = construct_frozen_set(8, 5, 0.5)
    with pytest.raises(ValueError):
        sc_decode(np.zeros(7), np.zeros(5, np.uint8), spec)
    with pytest.raises(ValueError):
        sc_decode(np.zeros(8), np.zeros(4, np.uint8), spec)
    with pytest.raises(ValueError):
        sc_decode(np.full(8, np.nan), np.zeros(5, np.uint8), spec)


def test_bsc_llr_magnitudes():
    assert bsc_llr([0, 1], 0.15) == pytest.approx([np.log(0.85 / 0.15), -np.log(0.85 / 0.15)])
    assert bsc_llr([0], 0.0)[0] == polar.LLR_MAX
    assert bsc_llr([1], 0.5)[0] == 0.0
