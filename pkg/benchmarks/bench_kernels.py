"""Compare the compiled polar kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--reps 200] [--N 512]

Prints the median time per call for each kernel and backend, and the speedup.
Both backends are checked for identical outputs on the benchmark inputs.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from reramkey import _polar_py
from reramkey.polar import construct_frozen_set

try:
    from reramkey import _polar_ext
except ImportError:
    _polar_ext = None


def _median_time(fn, reps: int) -> float:
    fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _cases(N: int, seed: int):
    spec = construct_frozen_set(N, N // 2 + N // 64, 0.5)
    rng = np.random.default_rng(seed)
    mask = np.zeros(N, np.uint8)
    mask[list(spec.frozen)] = 1
    u = rng.integers(0, 2, N, dtype=np.uint8)
    u[mask == 1] = rng.integers(0, 2, int(mask.sum()), dtype=np.uint8)
    x = _polar_py.polar_transform(u)
    y = x ^ (rng.random(N) < 0.05).astype(np.uint8)
    llr = np.where(y == 0, 1.0, -1.0) * np.log(0.95 / 0.05)
    full = np.where(mask == 1, u, 0).astype(np.uint8)
    return u, llr, mask, full


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--N", type=int, default=512)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _polar_ext is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    u, llr, mask, full = _cases(args.N, args.seed)
    kernels = {
        "transform": lambda m: m.polar_transform(u),
        "sc": lambda m: m.sc_decode(llr, mask, full),
        "scl:8": lambda m: m.scl_decode(llr, mask, full, 8),
        "bp:60": lambda m: m.bp_decode(llr, mask, full, 60, 40.0),
    }
    print(f"N={args.N} reps={args.reps}")
    print(f"{'kernel':<10} {'cython (us)':>12} {'python (us)':>12} {'speedup':>8}")
    for name, call in kernels.items():
        a, b = call(_polar_ext), call(_polar_py)
        same = all(np.array_equal(np.asarray(p), np.asarray(q))
                   for p, q in zip(np.atleast_1d(a) if not isinstance(a, tuple) else a,
                                   np.atleast_1d(b) if not isinstance(b, tuple) else b))
        reps = args.reps if name in ("transform", "sc") else max(5, args.reps // 10)
        tc = _median_time(lambda: call(_polar_ext), reps)
        tp = _median_time(lambda: call(_polar_py), reps)
        flag = "" if same else "  (outputs differ!)"
        print(f"{name:<10} {tc * 1e6:12.1f} {tp * 1e6:12.1f} {tp / tc:8.1f}{flag}")


if __name__ == "__main__":
    main()
