"""MIMO detectors: tail-biting (tb), extended tail-biting (etb), exact MAP and MMSE.

Every detector works on a batch of channel uses at once; :func:`detect_mimo`
wraps the batch path for a single problem.  Soft outputs are LLRs
log P(x=0)/P(x=1) of the 2Nt bits in natural bit order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ..errors import DetectionFailure, DimensionMismatch
from ..galois import all_configs
from .mimo import (
    MimoProblem,
    code_inputs,
    etb_construction,
    input_map,
    mimo_parameters,
    permutation_set,
    qpsk,
    standard_permutation,
    tb_construction,
)
from .trellis import bcjr_batch, scalar_loglik, split_inputs, tb_trellis_build

METHODS = ("tb", "etb", "map", "mmse")
MAP_MAX_NT = 8
LLR_CLIP = 700.0


@dataclass(frozen=True)
class DetectorConfig:
    max_iter: int = 30
    tol: float = 1e-3
    max_log: bool = False
    permutations: tuple | None = None  # etb only; defaults to permutation_set(Nt)


class DetectionBatch(NamedTuple):
    bits: np.ndarray  # (B, 2Nt) int
    llr: np.ndarray  # (B, 2Nt)
    iterations: np.ndarray  # (B,) BCJR iterations summed over tried permutations
    failures: np.ndarray  # (B,) bool, etb without a converging permutation


@lru_cache(maxsize=None)
def _tb_setup(nt: int, extended: bool, perm: tuple):
    code = etb_construction(nt) if extended else tb_construction(nt)[2]
    return tb_trellis_build(code), input_map(code, perm)


def _run_tb(lam_bit, lam_pair, nt, perm, extended, cfg):
    trellis, imap = _tb_setup(nt, extended, tuple(perm))
    info, par = code_inputs(imap, lam_bit, lam_pair)
    loglik = scalar_loglik(np.concatenate([info, par], axis=-1))
    i_ll, p_ll = split_inputs(trellis, loglik)
    res = bcjr_batch(trellis, i_ll, p_ll, max_iter=cfg.max_iter, tol=cfg.tol, max_log=cfg.max_log)
    llr = np.empty_like(res.llr)
    llr[:, list(perm)] = res.llr
    return llr, res.iterations, res.converged, res.delta


def _check(hc, y, sigma2):
    hc = np.asarray(hc, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if hc.ndim != 3 or y.ndim != 2 or hc.shape[:2] != y.shape:
        raise DimensionMismatch("expected hc (B, Nr, Nt) and y (B, Nr)")
    sigma2 = np.broadcast_to(np.asarray(sigma2, dtype=np.float64), hc.shape[:1])
    if np.any(sigma2 <= 0):
        raise ValueError("sigma2 must be positive")
    return hc, y, sigma2


def detect_tb(hc, y, sigma2, cfg: DetectorConfig = DetectorConfig()) -> DetectionBatch:
    hc, y, sigma2 = _check(hc, y, sigma2)
    nt = hc.shape[2]
    lam_bit, lam_pair = mimo_parameters(hc, y, sigma2)
    llr, iters, conv, _ = _run_tb(lam_bit, lam_pair, nt, standard_permutation(nt), False, cfg)
    return DetectionBatch((llr < 0).astype(np.int64), llr, iters, np.zeros(len(llr), dtype=bool))


def detect_etb(hc, y, sigma2, cfg: DetectorConfig = DetectorConfig()) -> DetectionBatch:
    """Try permutations in order until the iterative decoder converges.

    Trials that never converge keep the result with the smallest final LLR
    change and are flagged in ``failures``.
    """
    hc, y, sigma2 = _check(hc, y, sigma2)
    n_b, _, nt = hc.shape
    lam_bit, lam_pair = mimo_parameters(hc, y, sigma2)
    perms = cfg.permutations or permutation_set(nt)
    llr = np.zeros((n_b, 2 * nt))
    best = np.full(n_b, np.inf)
    iters = np.zeros(n_b, dtype=np.int64)
    todo = np.arange(n_b)
    for perm in perms:
        if todo.size == 0:
            break
        l_p, it_p, conv, delta = _run_tb(lam_bit[todo], lam_pair[todo], nt, perm, True, cfg)
        iters[todo] += it_p
        better = conv | (delta < best[todo])
        llr[todo[better]] = l_p[better]
        best[todo[better]] = np.where(conv[better], 0.0, delta[better])
        todo = todo[~conv]
    failures = np.zeros(n_b, dtype=bool)
    failures[todo] = True
    return DetectionBatch((llr < 0).astype(np.int64), llr, iters, failures)


def detect_map(hc, y, sigma2, cfg: DetectorConfig = DetectorConfig()) -> DetectionBatch:
    """Exact bit marginals by enumerating all 4^Nt transmit vectors."""
    hc, y, sigma2 = _check(hc, y, sigma2)
    n_b, _, nt = hc.shape
    if nt > MAP_MAX_NT:
        raise ValueError(f"exact MAP is limited to Nt <= {MAP_MAX_NT}")
    x = all_configs(2, 2 * nt)
    w = qpsk(x)  # (K, Nt)
    xf = x.astype(np.float64)
    llr = np.empty((n_b, 2 * nt))
    for b in range(n_b):
        d = y[b][:, None] - hc[b] @ w.T
        metric = -np.sum(d.real ** 2 + d.imag ** 2, axis=0) / (2 * sigma2[b])
        p = np.exp(metric - metric.max())
        tot = p.sum()
        ones = p @ xf
        tiny = np.finfo(float).tiny
        llr[b] = np.log(np.maximum(tot - ones, tiny)) - np.log(np.maximum(ones, tiny))
    llr = np.clip(llr, -LLR_CLIP, LLR_CLIP)
    return DetectionBatch((llr < 0).astype(np.int64), llr, np.zeros(n_b, dtype=np.int64), np.zeros(n_b, dtype=bool))


def detect_mmse(hc, y, sigma2, cfg: DetectorConfig = DetectorConfig()) -> DetectionBatch:
    """Linear MMSE filter W = (R + 2σ²I)^{-1} H^H and a Gaussian demapper.

    The filtered symbol is modelled as μ w + e with μ = (WH)_kk and
    E|e|² = μ − μ²; the two gray bits then see Re z ± Im z.
    """
    hc, y, sigma2 = _check(hc, y, sigma2)
    n_b, _, nt = hc.shape
    hh = np.conj(np.swapaxes(hc, 1, 2))
    r = hh @ hc
    a = r + 2 * sigma2[:, None, None] * np.eye(nt)
    w = np.linalg.solve(a, hh)
    z = np.einsum("bkr,br->bk", w, y)
    mu = np.real(np.einsum("bkr,brk->bk", w, hc))
    nu = np.maximum(mu - mu ** 2, 1e-300)
    llr = np.empty((n_b, 2 * nt))
    llr[:, 0::2] = 2 * mu * (z.real + z.imag) / nu
    llr[:, 1::2] = 2 * mu * (z.real - z.imag) / nu
    llr = np.clip(llr, -LLR_CLIP, LLR_CLIP)
    return DetectionBatch((llr < 0).astype(np.int64), llr, np.zeros(n_b, dtype=np.int64), np.zeros(n_b, dtype=bool))


_DISPATCH = {"tb": detect_tb, "etb": detect_etb, "map": detect_map, "mmse": detect_mmse}


def detect_batch(hc, y, sigma2, method: str, cfg: DetectorConfig = DetectorConfig()) -> DetectionBatch:
    if method not in _DISPATCH:
        raise ValueError(f"unknown detector {method!r}; choose from {METHODS}")
    return _DISPATCH[method](hc, y, sigma2, cfg)


def detect_mimo(p: MimoProblem, method: str, config: DetectorConfig = DetectorConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Hard bits and LLRs for one channel use.

    Raises DetectionFailure (with ``partial = (bits, llr)``) when the etb
    detector exhausts its permutations.
    """
    res = detect_batch(p.hc[None], p.y[None], p.sigma2, method, config)
    bits, llr = res.bits[0], res.llr[0]
    if res.failures[0]:
        raise DetectionFailure("no permutation converged", partial=(bits, llr))
    return bits, llr
