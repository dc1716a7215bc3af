"""Pure numpy polar kernels; used when the compiled ``_polar_ext`` is unavailable.

Natural-order transform ``x = u F^{(x)n}``: splitting ``u = (ua, ub)`` gives
``x = (T(ua) ^ T(ub), T(ub))``, so successive cancellation handles the first
half of ``u`` before the second.
"""
from __future__ import annotations

import numpy as np


def polar_transform(u: np.ndarray) -> np.ndarray:
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    h = 1
    while h < N:
        v = x.reshape(x.shape[:-1] + (N // (2 * h), 2, h))
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def _f(a, b):
    m = np.minimum(np.abs(a), np.abs(b))
    return np.where((a < 0) != (b < 0), -m, m)


def sc_decode(llr, frozen_mask, frozen_full):
    llr = np.asarray(llr, dtype=np.float64)
    u = np.zeros(llr.shape[0], dtype=np.uint8)

    def rec(L, lo):
        M = L.shape[0]
        if M == 1:
            bit = frozen_full[lo] if frozen_mask[lo] else (0 if L[0] >= 0 else 1)
            u[lo] = bit
            return np.array([bit], dtype=np.uint8)
        h = M // 2
        La, Lb = L[:h], L[h:]
        va = rec(_f(La, Lb), lo)
        vb = rec(np.where(va == 1, Lb - La, Lb + La), lo + h)
        return np.concatenate([va ^ vb, vb])

    rec(llr, 0)
    return u


def sc_decode_batch(llr, frozen_mask, frozen_full):
    """SC over a ``(B, N)`` batch of observations; ``frozen_full`` may be 1-D or ``(B, N)``."""
    llr = np.asarray(llr, dtype=np.float64)
    B, N = llr.shape
    ff = np.broadcast_to(np.asarray(frozen_full, dtype=np.uint8), (B, N))
    u = np.zeros((B, N), dtype=np.uint8)

    def rec(L, lo):
        M = L.shape[1]
        if M == 1:
            if frozen_mask[lo]:
                b = ff[:, lo].copy()
            else:
                b = (L[:, 0] < 0).astype(np.uint8)
            u[:, lo] = b
            return b[:, None]
        h = M // 2
        La, Lb = L[:, :h], L[:, h:]
        va = rec(_f(La, Lb), lo)
        vb = rec(np.where(va == 1, Lb - La, Lb + La), lo + h)
        return np.concatenate([va ^ vb, vb], axis=1)

    rec(llr, 0)
    return u


def scl_decode(llr, frozen_mask, frozen_full, list_size):
    """Surviving paths (best metric first) and their metrics.

    Candidates at each unfrozen leaf are ordered by (metric, parent, bit), so
    with ``list_size == 1`` this reduces to :func:`sc_decode`.
    """
    llr = np.asarray(llr, dtype=np.float64)
    N = llr.shape[0]
    # state per path: list of LLR vectors by depth, list of left-child results
    paths = [dict(alpha=[llr], left=[], u=np.zeros(N, dtype=np.uint8), metric=0.0)]

    def rec(paths, lo, M):
        if M == 1:
            out = []
            if frozen_mask[lo]:
                b = int(frozen_full[lo])
                for p in paths:
                    a = p["alpha"][-1][0]
                    if (b == 0 and a < 0) or (b == 1 and a >= 0):
                        p["metric"] += abs(a)
                    p["u"][lo] = b
                    p["ret"] = np.array([b], dtype=np.uint8)
                return paths
            cands = []
            for i, p in enumerate(paths):
                a = p["alpha"][-1][0]
                cands.append((p["metric"] + (abs(a) if a < 0 else 0.0), 2 * i, p, 0))
                cands.append((p["metric"] + (abs(a) if a >= 0 else 0.0), 2 * i + 1, p, 1))
            cands.sort(key=lambda c: (c[0], c[1]))
            for metric, _, p, b in cands[:list_size]:
                q = dict(alpha=list(p["alpha"]), left=list(p["left"]), u=p["u"].copy(), metric=metric)
                q["u"][lo] = b
                q["ret"] = np.array([b], dtype=np.uint8)
                out.append(q)
            return out
        h = M // 2
        for p in paths:
            L = p["alpha"][-1]
            p["alpha"].append(_f(L[:h], L[h:]))
        paths = rec(paths, lo, h)
        for p in paths:
            p["alpha"].pop()
            L = p["alpha"][-1]
            va = p["ret"]
            p["left"].append(va)
            p["alpha"].append(np.where(va == 1, L[h:] - L[:h], L[h:] + L[:h]))
        paths = rec(paths, lo + h, h)
        for p in paths:
            p["alpha"].pop()
            va = p["left"].pop()
            vb = p["ret"]
            p["ret"] = np.concatenate([va ^ vb, vb])
        return paths

    paths = rec(paths, 0, N)
    order = sorted(range(len(paths)), key=lambda i: (paths[i]["metric"], i))
    return (
        np.array([paths[i]["u"] for i in order], dtype=np.uint8),
        np.array([paths[i]["metric"] for i in order], dtype=np.float64),
    )


def bp_decode(llr, frozen_mask, frozen_full, max_iterations, prior, stop=None):
    llr = np.asarray(llr, dtype=np.float64)
    N = llr.shape[0]
    n = N.bit_length() - 1
    Lm = np.zeros((n + 1, N))
    Rm = np.zeros((n + 1, N))
    Lm[n] = llr
    fm = np.asarray(frozen_mask, dtype=bool)
    ff = np.asarray(frozen_full, dtype=np.uint8)
    Rm[0, fm] = np.where(ff[fm] == 1, -prior, prior)
    idx = np.arange(N)
    pairs = []
    for s in range(n):
        h = 1 << s
        a = idx[(idx & h) == 0]
        pairs.append((a, a + h))
    prev = None
    u = np.zeros(N, dtype=np.uint8)
    it = 0
    stable = False
    for it in range(1, max_iterations + 1):
        for s in range(n):
            a, b = pairs[s]
            ra, rb, la, lb = Rm[s, a], Rm[s, b], Lm[s + 1, a], Lm[s + 1, b]
            Rm[s + 1, a] = _f(ra, rb + lb)
            Rm[s + 1, b] = _f(ra, la) + rb
        for s in range(n - 1, -1, -1):
            a, b = pairs[s]
            ra, rb, la, lb = Rm[s, a], Rm[s, b], Lm[s + 1, a], Lm[s + 1, b]
            Lm[s, a] = _f(la, lb + rb)
            Lm[s, b] = _f(ra, la) + lb
        u = np.where(fm, ff, (Lm[0] + Rm[0] < 0).astype(np.uint8)).astype(np.uint8)
        if stop is not None:
            if stop(u):
                stable = True
                break
        elif prev is not None and np.array_equal(u, prev):
            stable = True
            break
        prev = u
    return u, it, stable
