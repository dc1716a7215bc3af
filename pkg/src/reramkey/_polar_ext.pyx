# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled polar kernels: SC, SC-list and min-sum BP over the natural-order graph.

Same semantics as ``_polar_py``; the test-suite checks the two agree bit for bit.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.string cimport memcpy

cnp.import_array()


cdef inline double _f(double a, double b) nogil:
    cdef double m = fabs(a) if fabs(a) < fabs(b) else fabs(b)
    if (a < 0) != (b < 0):
        return -m
    return m


def polar_transform(const unsigned char[:] u):
    cdef Py_ssize_t N = u.shape[0], h = 1, blk, j
    out = np.array(u, dtype=np.uint8, copy=True)
    cdef unsigned char[:] x = out
    while h < N:
        blk = 0
        while blk < N:
            for j in range(blk, blk + h):
                x[j] ^= x[j + h]
            blk += 2 * h
        h *= 2
    return out


# --- successive cancellation -------------------------------------------------
#
# Node at depth s covers a block of M = N >> s consecutive positions. alpha[s]
# holds its LLRs (M entries, stored at offset N - 2M .. in a flat buffer), beta
# holds partial sums. The left child of a node works on the first half of u,
# mirroring x = (T(ua) ^ T(ub), T(ub)).

cdef inline Py_ssize_t _off(Py_ssize_t N, Py_ssize_t M) nogil:
    return 2 * N - 2 * M


cdef void _sc_rec(double* alpha, unsigned char* beta, Py_ssize_t N, Py_ssize_t M,
                  Py_ssize_t lo, const unsigned char* fmask, const unsigned char* fvals,
                  unsigned char* u) nogil:
    cdef Py_ssize_t h, j, o = _off(N, M), oc
    cdef unsigned char b
    if M == 1:
        if fmask[lo]:
            b = fvals[lo]
        else:
            b = 0 if alpha[o] >= 0 else 1
        u[lo] = b
        beta[o] = b
        return
    h = M // 2
    oc = _off(N, h)
    for j in range(h):
        alpha[oc + j] = _f(alpha[o + j], alpha[o + h + j])
    _sc_rec(alpha, beta, N, h, lo, fmask, fvals, u)
    # stash left result in the upper half of this node's beta slot
    for j in range(h):
        beta[o + j] = beta[oc + j]
    for j in range(h):
        if beta[o + j]:
            alpha[oc + j] = alpha[o + h + j] - alpha[o + j]
        else:
            alpha[oc + j] = alpha[o + h + j] + alpha[o + j]
    _sc_rec(alpha, beta, N, h, lo + h, fmask, fvals, u)
    for j in range(h):
        beta[o + h + j] = beta[oc + j]
        beta[o + j] ^= beta[oc + j]


def sc_decode(const double[:] llr, const unsigned char[:] frozen_mask,
              const unsigned char[:] frozen_full):
    cdef Py_ssize_t N = llr.shape[0], j
    alpha_a = np.empty(2 * N, dtype=np.float64)
    beta_a = np.zeros(2 * N, dtype=np.uint8)
    u_a = np.zeros(N, dtype=np.uint8)
    cdef double[:] alpha = alpha_a
    cdef unsigned char[:] beta = beta_a
    cdef unsigned char[:] u = u_a
    for j in range(N):
        alpha[j] = llr[j]
    with nogil:
        _sc_rec(&alpha[0], &beta[0], N, N, 0, &frozen_mask[0], &frozen_full[0], &u[0])
    return u_a


# --- successive cancellation list ---------------------------------------------
#
# Each path owns a full copy of alpha/beta/u (4N bytes-ish); forking copies the
# whole state. Simple, and fine for the list sizes used here (<= 32).

cdef class _SCL:
    cdef Py_ssize_t N, L, npaths
    cdef double[:, :] alpha
    cdef unsigned char[:, :] beta
    cdef unsigned char[:, :] u
    cdef double[:] metric
    cdef const unsigned char[:] fmask
    cdef const unsigned char[:] fvals
    # scratch for list management
    cdef double[:, :] alpha2
    cdef unsigned char[:, :] beta2
    cdef unsigned char[:, :] u2
    cdef double[:] metric2

    def __init__(self, Py_ssize_t N, Py_ssize_t L, const unsigned char[:] fmask,
                 const unsigned char[:] fvals):
        self.N = N
        self.L = L
        self.npaths = 1
        self.alpha = np.zeros((2 * L, 2 * N), dtype=np.float64)
        self.beta = np.zeros((2 * L, 2 * N), dtype=np.uint8)
        self.u = np.zeros((2 * L, N), dtype=np.uint8)
        self.metric = np.zeros(2 * L, dtype=np.float64)
        self.alpha2 = np.zeros((2 * L, 2 * N), dtype=np.float64)
        self.beta2 = np.zeros((2 * L, 2 * N), dtype=np.uint8)
        self.u2 = np.zeros((2 * L, N), dtype=np.uint8)
        self.metric2 = np.zeros(2 * L, dtype=np.float64)
        self.fmask = fmask
        self.fvals = fvals

    cdef void _leaf(self, Py_ssize_t lo):
        cdef Py_ssize_t p, q, n, j, o = _off(self.N, 1), cnt
        cdef double a, pen0, pen1
        cdef unsigned char b
        if self.fmask[lo]:
            b = self.fvals[lo]
            for p in range(self.npaths):
                a = self.alpha[p, o]
                if (b == 0 and a < 0) or (b == 1 and a >= 0):
                    self.metric[p] += fabs(a)
                self.u[p, lo] = b
                self.beta[p, o] = b
            return
        # expand every path into two candidates, keep the L best
        n = self.npaths
        cnt = 0
        for p in range(n):
            a = self.alpha[p, o]
            pen0 = fabs(a) if a < 0 else 0.0
            pen1 = fabs(a) if a >= 0 else 0.0
            self.metric2[2 * p] = self.metric[p] + pen0
            self.metric2[2 * p + 1] = self.metric[p] + pen1
        cnt = 2 * n
        order = np.argsort(np.asarray(self.metric2[:cnt]), kind="stable")
        keep = min(cnt, self.L)
        for q in range(keep):
            j = order[q]
            p = j // 2
            self.alpha2[q, :] = self.alpha[p, :]
            self.beta2[q, :] = self.beta[p, :]
            self.u2[q, :] = self.u[p, :]
            b = j % 2
            self.u2[q, lo] = b
            self.beta2[q, o] = b
            self.metric[q] = self.metric2[j]
        for q in range(keep):
            self.alpha[q, :] = self.alpha2[q, :]
            self.beta[q, :] = self.beta2[q, :]
            self.u[q, :] = self.u2[q, :]
        self.npaths = keep

    cdef void _rec(self, Py_ssize_t M, Py_ssize_t lo):
        cdef Py_ssize_t h, j, p, o = _off(self.N, M), oc
        if M == 1:
            self._leaf(lo)
            return
        h = M // 2
        oc = _off(self.N, h)
        for p in range(self.npaths):
            for j in range(h):
                self.alpha[p, oc + j] = _f(self.alpha[p, o + j], self.alpha[p, o + h + j])
        self._rec(h, lo)
        for p in range(self.npaths):
            for j in range(h):
                self.beta[p, o + j] = self.beta[p, oc + j]
                if self.beta[p, o + j]:
                    self.alpha[p, oc + j] = self.alpha[p, o + h + j] - self.alpha[p, o + j]
                else:
                    self.alpha[p, oc + j] = self.alpha[p, o + h + j] + self.alpha[p, o + j]
        self._rec(h, lo + h)
        for p in range(self.npaths):
            for j in range(h):
                self.beta[p, o + h + j] = self.beta[p, oc + j]
                self.beta[p, o + j] ^= self.beta[p, oc + j]

    def run(self, const double[:] llr):
        cdef Py_ssize_t j
        for j in range(self.N):
            self.alpha[0, j] = llr[j]
        self._rec(self.N, 0)
        order = np.argsort(np.asarray(self.metric[: self.npaths]), kind="stable")
        paths = np.asarray(self.u[: self.npaths])[order].copy()
        return paths, np.asarray(self.metric[: self.npaths])[order].copy()


def scl_decode(const double[:] llr, const unsigned char[:] frozen_mask,
               const unsigned char[:] frozen_full, Py_ssize_t list_size):
    """All surviving paths, best metric first, plus their metrics."""
    dec = _SCL(llr.shape[0], list_size, frozen_mask, frozen_full)
    return dec.run(llr)


# --- belief propagation --------------------------------------------------------

def bp_decode(const double[:] llr, const unsigned char[:] frozen_mask,
              const unsigned char[:] frozen_full, int max_iterations, double prior,
              stop=None):
    """Min-sum flooding over ``n`` butterfly stages.

    Column 0 is the u side, column n the channel side. Each iteration is a
    left-to-right sweep of R messages followed by a right-to-left sweep of L
    messages. Without ``stop`` decoding ends when the hard decisions repeat;
    with it, only when ``stop(u_hat)`` is true or the budget runs out.
    Returns ``(u_hat, iterations, converged)``.
    """
    cdef Py_ssize_t N = llr.shape[0], n = 0, s, j, a, b, h, it
    while (1 << n) < N:
        n += 1
    Lm_a = np.zeros((n + 1, N), dtype=np.float64)
    Rm_a = np.zeros((n + 1, N), dtype=np.float64)
    cdef double[:, :] Lm = Lm_a
    cdef double[:, :] Rm = Rm_a
    u_a = np.zeros(N, dtype=np.uint8)
    prev_a = np.zeros(N, dtype=np.uint8)
    cdef unsigned char[:] uh = u_a
    cdef unsigned char[:] prev = prev_a
    cdef double la, lb, ra, rb, tot
    cdef bint stable = False
    cdef int iters = 0
    for j in range(N):
        Lm[n, j] = llr[j]
        if frozen_mask[j]:
            Rm[0, j] = -prior if frozen_full[j] else prior
    for it in range(max_iterations):
        iters = it + 1
        with nogil:
            # left to right: R messages from column s into column s+1
            for s in range(n):
                h = 1 << s
                for a in range(N):
                    if a & h:
                        continue
                    b = a + h
                    ra = Rm[s, a]
                    rb = Rm[s, b]
                    la = Lm[s + 1, a]
                    lb = Lm[s + 1, b]
                    Rm[s + 1, a] = _f(ra, rb + lb)
                    Rm[s + 1, b] = _f(ra, la) + rb
            # right to left: L messages from column s+1 into column s
            for s in range(n - 1, -1, -1):
                h = 1 << s
                for a in range(N):
                    if a & h:
                        continue
                    b = a + h
                    ra = Rm[s, a]
                    rb = Rm[s, b]
                    la = Lm[s + 1, a]
                    lb = Lm[s + 1, b]
                    Lm[s, a] = _f(la, lb + rb)
                    Lm[s, b] = _f(ra, la) + lb
            for j in range(N):
                if frozen_mask[j]:
                    uh[j] = frozen_full[j]
                else:
                    tot = Lm[0, j] + Rm[0, j]
                    uh[j] = 0 if tot >= 0 else 1
            if it > 0:
                stable = True
                for j in range(N):
                    if uh[j] != prev[j]:
                        stable = False
                        break
            for j in range(N):
                prev[j] = uh[j]
        if stop is None:
            if stable:
                break
        elif stop(u_a):
            stable = True
            break
        else:
            stable = False
    return u_a, iters, bool(stable)
