"""Tail-biting trellis of the H_TB / H_ETB family and iterative circular BCJR.

Section s takes information bit v_s.  The state entering section s is the
register (v_{s−1}, ..., v_{s−m}), stored with v_{s−j} in bit j−1, and the
section emits the m parities v_s ⊕ v_{s−j}.  The forward and backward
recursions are run around the cycle repeatedly, each pass starting from
the boundary metrics left by the previous one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..bridge import CodeSpec
from ..errors import NotTailBiting
from ..pmf import Pmf, from_logits


@dataclass(frozen=True, eq=False)
class TailBitingTrellis:
    sections: int
    memory: int
    next_state: np.ndarray  # (states, 2)
    pred: np.ndarray  # (states, 2): the two states leading into each state
    parity: np.ndarray  # (states, 2, memory)
    check_index: np.ndarray  # (sections, memory): code symbol of each emitted parity

    @property
    def states(self) -> int:
        return 1 << self.memory

    @property
    def nt(self) -> int:
        return self.sections // 2

    @property
    def length(self) -> int:
        return self.sections * (1 + self.memory)

    def encode(self, v) -> np.ndarray:
        """Run the encoder cyclically; the register starts from the last m inputs."""
        v = [int(b) for b in v]
        s_len, m = self.sections, self.memory
        state = 0
        for j in range(1, m + 1):
            state |= v[(-j) % s_len] << (j - 1)
        start = state
        out = np.zeros(self.length, dtype=np.int64)
        out[:s_len] = v
        for s in range(s_len):
            b = v[s]
            out[self.check_index[s]] = self.parity[state, b]
            state = self.next_state[state, b]
        if state != start:
            raise AssertionError("tail-biting path did not close")
        return out

    def closed_paths(self) -> np.ndarray:
        """Label sequences of all 2^S closed paths, in code symbol order."""
        return np.array([self.encode(v) for v in itertools.product((0, 1), repeat=self.sections)])


def tb_trellis_build(code: CodeSpec) -> TailBitingTrellis:
    """Trellis for a code whose checks are cyclic shifts of [L_TB 0].

    Block t of m rows must cover positions (t+r, t+m) mod S for r = 0..m−1.
    """
    if code.q != 2:
        raise NotTailBiting("tail-biting trellises here are binary")
    s_len = code.n
    rows = code.checks
    if s_len < 2 or rows % s_len:
        raise NotTailBiting("check count is not a multiple of the section count")
    m = rows // s_len
    if m < 1 or m >= s_len:
        raise NotTailBiting("bad memory length")
    a = code.h.data[:, :s_len]
    for t in range(s_len):
        for r in range(m):
            expect = np.zeros(s_len, dtype=np.int64)
            expect[(t + r) % s_len] = 1
            expect[(t + m) % s_len] = 1
            if not np.array_equal(a[t * m + r], expect):
                raise NotTailBiting(f"check {t * m + r} breaks the cyclic-shift structure")
    n_states = 1 << m
    mask = n_states - 1
    st = np.arange(n_states)
    nxt = np.stack([((st << 1) | b) & mask for b in (0, 1)], axis=1)
    # parity r of the section is v_s xor v_{s-(m-r)}, held in state bit m-r-1
    par = np.zeros((n_states, 2, m), dtype=np.int64)
    for r in range(m):
        reg = (st >> (m - r - 1)) & 1
        par[:, 0, r] = reg
        par[:, 1, r] = reg ^ 1
    pred = np.stack([(st >> 1) | (h << (m - 1)) for h in (0, 1)], axis=1)
    check_index = np.zeros((s_len, m), dtype=np.int64)
    for s in range(s_len):
        t = (s - m) % s_len
        check_index[s] = s_len + t * m + np.arange(m)
    for arr in (nxt, pred, par, check_index):
        arr.setflags(write=False)
    return TailBitingTrellis(s_len, m, nxt, pred, par, check_index)


class BcjrBatch(NamedTuple):
    llr: np.ndarray  # (B, S) a posteriori LLRs log P(0)/P(1) of the information bits
    iterations: np.ndarray  # (B,)
    converged: np.ndarray  # (B,) bool
    delta: np.ndarray  # (B,) last max |ΔLLR|


def _pair_reduce(a, b, max_log):
    return np.maximum(a, b) if max_log else np.logaddexp(a, b)


def _reduce(x, axis, max_log):
    mx = np.max(x, axis=axis)
    if max_log:
        return mx
    return mx + np.log(np.sum(np.exp(x - np.expand_dims(mx, axis)), axis=axis))


def branch_metrics(trellis: TailBitingTrellis, info_ll: np.ndarray, par_ll: np.ndarray) -> np.ndarray:
    """(B, S, states, 2) log branch metrics from information and parity log-likelihoods.

    ``info_ll`` is (B, S, 2); ``par_ll`` is (B, S, m, 2) with parity r of
    section s in ``par_ll[:, s, r]``.
    """
    g = np.repeat(info_ll[:, :, None, :], trellis.states, axis=2)
    for r in range(trellis.memory):
        g = g + par_ll[:, :, r][:, :, trellis.parity[:, :, r]]
    return g


def bcjr_batch(
    trellis: TailBitingTrellis,
    info_ll: np.ndarray,
    par_ll: np.ndarray,
    max_iter: int = 30,
    tol: float = 1e-3,
    max_log: bool = False,
) -> BcjrBatch:
    """Iterative circular BCJR on a batch of independent input sets.

    A trial is frozen once its LLRs move by less than ``tol`` and its hard
    decisions are unchanged from the previous iteration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    g_all = branch_metrics(trellis, np.asarray(info_ll, float), np.asarray(par_ll, float))
    n_b, s_len, n_st, _ = g_all.shape
    nxt, pred = trellis.next_state, trellis.pred
    ns_bit = np.arange(n_st) & 1

    llr = np.zeros((n_b, s_len))
    delta = np.full(n_b, np.inf)
    iters = np.zeros(n_b, dtype=np.int64)
    done = np.zeros(n_b, dtype=bool)
    alpha0 = np.zeros((n_b, n_st))
    betas = np.zeros((n_b, n_st))
    prev_hard = np.zeros((n_b, s_len), dtype=bool)

    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        g = g_all[idx]
        k = idx.size
        alpha = np.empty((k, s_len + 1, n_st))
        alpha[:, 0] = alpha0[idx]
        for s in range(s_len):
            gs = g[:, s]
            a0 = alpha[:, s][:, pred[:, 0]] + gs[:, pred[:, 0], ns_bit]
            a1 = alpha[:, s][:, pred[:, 1]] + gs[:, pred[:, 1], ns_bit]
            a = _pair_reduce(a0, a1, max_log)
            alpha[:, s + 1] = a - a.max(axis=1, keepdims=True)
        beta = np.empty((k, s_len + 1, n_st))
        beta[:, s_len] = betas[idx]
        for s in range(s_len - 1, -1, -1):
            gs = g[:, s]
            b0 = gs[:, :, 0] + beta[:, s + 1][:, nxt[:, 0]]
            b1 = gs[:, :, 1] + beta[:, s + 1][:, nxt[:, 1]]
            b = _pair_reduce(b0, b1, max_log)
            beta[:, s] = b - b.max(axis=1, keepdims=True)
        # posterior of v_s from alpha_s, the branch and beta_{s+1}
        m0 = _reduce(alpha[:, :-1] + g[..., 0] + beta[:, 1:][:, :, nxt[:, 0]], 2, max_log)
        m1 = _reduce(alpha[:, :-1] + g[..., 1] + beta[:, 1:][:, :, nxt[:, 1]], 2, max_log)
        new = m0 - m1
        d = np.max(np.abs(new - llr[idx]), axis=1) if it > 1 else np.full(k, np.inf)
        hard = new < 0
        conv = (d < tol) & np.all(hard == prev_hard[idx], axis=1)
        llr[idx] = new
        delta[idx] = d
        iters[idx] = it
        prev_hard[idx] = hard
        alpha0[idx] = alpha[:, s_len]
        betas[idx] = beta[:, 0]
        done[idx[conv]] = True
    return BcjrBatch(llr, iters, done, delta)


def split_inputs(trellis: TailBitingTrellis, loglik: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-symbol log-likelihoods (..., L, 2) → information (..., S, 2) and parity (..., S, m, 2)."""
    loglik = np.asarray(loglik, dtype=np.float64)
    info = loglik[..., : trellis.sections, :]
    par = loglik[..., trellis.check_index, :]
    return info, par


def scalar_loglik(lam) -> np.ndarray:
    """log N[exp(λβ)] up to a constant: (λ, −λ)."""
    lam = np.asarray(lam, dtype=np.float64)
    return np.stack([lam, -lam], axis=-1)


def tb_bcjr_iterative(
    trellis: TailBitingTrellis,
    inputs,
    a_priori=None,
    max_iter: int = 10_000,
    tol: float = 1e-3,
    max_log: bool = False,
) -> tuple[list[Pmf], int, bool]:
    """Approximate marginals of the information bits.

    ``inputs`` are decoder input vectors, one (L, 2) row per code symbol,
    read through L† as in the decoder bridge.  ``a_priori`` optionally adds
    per-bit log-likelihoods of shape (S, 2).
    """
    y = np.asarray(inputs, dtype=np.float64)
    if y.shape != (trellis.length, 2):
        raise ValueError(f"expected inputs of shape {(trellis.length, 2)}, got {y.shape}")
    loglik = y - y.mean(axis=1, keepdims=True)
    info, par = split_inputs(trellis, loglik)
    if a_priori is not None:
        info = info + np.asarray(a_priori, dtype=np.float64)
    res = bcjr_batch(trellis, info[None], par[None], max_iter=max_iter, tol=tol, max_log=max_log)
    marg = [from_logits([v / 2.0, -v / 2.0]) for v in res.llr[0]]
    return marg, int(res.iterations[0]), bool(res.converged[0])
