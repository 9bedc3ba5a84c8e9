"""Monte-Carlo BER simulation over the Rayleigh-fading MIMO QPSK channel.

Each trial (one transmitted MIMO symbol) draws its channel, bits and noise
from its own stream seeded by (master seed, SNR point, trial index), so the
result does not depend on how trials are grouped or how many workers run.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .detectors import METHODS, DetectorConfig, detect_batch
from .mimo import qpsk

CHUNK = 256
THREADS_ENV = "PMF_HILBERT_THREADS"
CSV_COLUMNS = ("snr_db", "detector", "bits", "errors", "ber", "mean_iterations", "failures")


@dataclass(frozen=True)
class SimConfig:
    nt: int = 8
    nr: int = 8
    snr_db: tuple[float, ...] = (10.0,)
    bits: int = 20_000
    max_iter: int = 30
    tol: float = 1e-3
    seed: int = 0
    detector: str = "tb"
    max_log: bool = False
    workers: int | None = None
    chunk: int = field(default=CHUNK)

    def __post_init__(self):
        if self.nt < 1 or self.nr < 1 or self.bits < 1 or self.max_iter < 1 or self.chunk < 1:
            raise ValueError("counts must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.snr_db:
            raise ValueError("at least one SNR point is required")
        if self.detector not in METHODS:
            raise ValueError(f"unknown detector {self.detector!r}; choose from {METHODS}")
        if self.detector in ("tb", "etb") and self.nt < 2:
            raise ValueError("tail-biting detectors need Nt >= 2")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))

    @property
    def trials(self) -> int:
        return math.ceil(self.bits / (2 * self.nt))


class BerPoint(NamedTuple):
    snr_db: float
    detector: str
    bits: int
    errors: int
    ber: float
    mean_iterations: float
    failures: int


def sigma2_for(snr_db: float, nr: int) -> float:
    """Per-real-dimension noise variance for SNR = Nr·Eb/N0 (Es = 1 per antenna, 2 bits per symbol)."""
    return nr / (4.0 * 10.0 ** (snr_db / 10.0))


def _snr_key(snr_db: float) -> int:
    # SeedSequence entropy must be non-negative
    return int(round(snr_db * 1000)) + 1_000_000


def draw_trials(seed: int, snr_db: float, start: int, stop: int, nt: int, nr: int):
    """Channels (B, Nr, Nt), bits (B, 2Nt) and received vectors (B, Nr) for trials start..stop−1."""
    s2 = sigma2_for(snr_db, nr)
    n_b = stop - start
    hc = np.empty((n_b, nr, nt), dtype=complex)
    bits = np.empty((n_b, 2 * nt), dtype=np.int64)
    y = np.empty((n_b, nr), dtype=complex)
    key = _snr_key(snr_db)
    for b, t in enumerate(range(start, stop)):
        rng = np.random.default_rng(np.random.SeedSequence([seed, key, t]))
        g = rng.standard_normal((2, nr, nt))
        hc[b] = (g[0] + 1j * g[1]) / math.sqrt(2.0)
        bits[b] = rng.integers(0, 2, 2 * nt)
        z = rng.standard_normal((2, nr))
        y[b] = hc[b] @ qpsk(bits[b]) + math.sqrt(s2) * (z[0] + 1j * z[1])
    return hc, bits, y, s2


def _workers(cfg: SimConfig) -> int:
    if cfg.workers is not None:
        return max(1, cfg.workers)
    env = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cap))
        except ValueError:
            pass
    return cap


def simulate_ber(cfg: SimConfig, progress=None) -> list[BerPoint]:
    """One BerPoint per SNR value; ``progress`` (if given) is called with each finished point."""
    det_cfg = DetectorConfig(max_iter=cfg.max_iter, tol=cfg.tol, max_log=cfg.max_log)
    n_trials = cfg.trials
    chunks = [(a, min(a + cfg.chunk, n_trials)) for a in range(0, n_trials, cfg.chunk)]
    out = []
    with ThreadPoolExecutor(max_workers=_workers(cfg)) as pool:
        for snr in cfg.snr_db:

            def job(bounds, snr=snr):
                hc, bits, y, s2 = draw_trials(cfg.seed, snr, *bounds, cfg.nt, cfg.nr)
                res = detect_batch(hc, y, s2, cfg.detector, det_cfg)
                return int(np.sum(res.bits != bits)), int(res.iterations.sum()), int(res.failures.sum())

            counts = list(pool.map(job, chunks))  # map keeps chunk order
            errors = sum(c[0] for c in counts)
            iters = sum(c[1] for c in counts)
            fails = sum(c[2] for c in counts)
            n_bits = n_trials * 2 * cfg.nt
            point = BerPoint(snr, cfg.detector, n_bits, errors, errors / n_bits, iters / n_trials, fails)
            out.append(point)
            if progress is not None:
                progress(point)
    return out


def ber_csv(points, stream=None) -> str:
    """CSV text with the columns of CSV_COLUMNS; also written to ``stream`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow([f"{p.snr_db:g}", p.detector, p.bits, p.errors, f"{p.ber:.6e}", f"{p.mean_iterations:.4f}", p.failures])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text
