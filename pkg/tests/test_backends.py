import numpy as np
import pytest

from reramkey import _polar_py
from reramkey.polar import LLR_MAX, construct_frozen_set

ext = pytest.importorskip("reramkey._polar_ext")


def _case(rng, N, nf):
    spec = construct_frozen_set(N, nf, 0.5)
    full = np.zeros(N, np.uint8)
    full[list(spec.frozen)] = rng.integers(0, 2, nf, dtype=np.uint8)
    llr = np.clip(rng.normal(1.0, 2.5, N), -LLR_MAX, LLR_MAX)
    return llr, np.ascontiguousarray(spec.frozen_mask), full


@pytest.mark.parametrize("N", [8, 64, 512])
def test_transform_agrees(N):
    rng = np.random.default_rng(N)
    for _ in range(50):
        u = rng.integers(0, 2, N, dtype=np.uint8)
        assert np.array_equal(ext.polar_transform(u), _polar_py.polar_transform(u))


@pytest.mark.parametrize("N", [8, 64, 512])
def test_sc_agrees(N):
    rng = np.random.default_rng(N + 1)
    for _ in range(40):
        llr, mask, full = _case(rng, N, N // 2)
        assert np.array_equal(ext.sc_decode(llr, mask, full), _polar_py.sc_decode(llr, mask, full))


def test_sc_batch_agrees():
    rng = np.random.default_rng(9)
    llr, mask, full = _case(rng, 128, 70)
    L = np.clip(rng.normal(0.5, 2, (16, 128)), -40, 40)
    B = _polar_py.sc_decode_batch(L, mask, full)
    for row, out in zip(L, B):
        assert np.array_equal(out, ext.sc_decode(row, mask, full))


@pytest.mark.parametrize("N,L", [(8, 2), (64, 4), (512, 8)])
def test_scl_agrees(N, L):
    rng = np.random.default_rng(N * L)
    for _ in range(10):
        llr, mask, full = _case(rng, N, N // 2)
        pe, me = ext.scl_decode(llr, mask, full, L)
        pp, mp = _polar_py.scl_decode(llr, mask, full, L)
        assert np.array_equal(pe, pp)
        assert np.allclose(me, mp)


@pytest.mark.parametrize("N", [8, 64, 512])
def test_bp_agrees(N):
    rng = np.random.default_rng(N + 3)
    for _ in range(10):
        llr, mask, full = _case(rng, N, N // 2)
        ue, ie, ce = ext.bp_decode(llr, mask, full, 60, LLR_MAX)
        up, ip, cp = _polar_py.bp_decode(llr, mask, full, 60, LLR_MAX)
        assert np.array_equal(ue, up) and ie == ip and ce == cp
        target = up.copy()
        ue, ie, ce = ext.bp_decode(llr, mask, full, 30, LLR_MAX, lambda v: (v == target).all())
        up, ip, cp = _polar_py.bp_decode(llr, mask, full, 30, LLR_MAX, lambda v: (v == target).all())
        assert np.array_equal(ue, up) and ie == ip and ce == cp


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, RERAMKEY_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import reramkey.polar as p; print(p.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
