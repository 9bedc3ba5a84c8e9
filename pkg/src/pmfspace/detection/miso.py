"""MISO q-PSK detection through the decoder of H_qPSK(n)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bridge import CodeSpec
from ..galois import all_configs, check_prime
from ..joint import JointPmf, SpcFactor, factors_product
from ..pmf import Pmf, from_logits, log_map


def psk(x, q: int):
    """q-ary PSK symbol exp(j2πx/q)."""
    return np.exp(2j * np.pi * np.asarray(x) / q)


@dataclass(frozen=True)
class MisoProblem:
    """Y = Σ h_i ψ(X_i) + Z with Z complex Gaussian of variance 2σ²."""

    q: int
    h: tuple
    y: complex
    sigma: float

    def __post_init__(self):
        check_prime(self.q)
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "h", tuple(complex(v) for v in self.h))
        if not self.h:
            raise ValueError("need at least one antenna")

    @property
    def n(self) -> int:
        return len(self.h)


def gamma_pmf(rho: complex, sigma: float, q: int) -> Pmf:
    """N[γ(ω; ρ, σ)] with γ = exp(Re{ρ ψ(ω)*}/σ²)."""
    w = np.arange(q)
    return from_logits(np.real(rho * np.conj(psk(w, q))) / sigma ** 2)


def pair_directions(q: int, n: int) -> list[tuple[int, ...]]:
    """a_{i,j} = f_i − f_j ordered by j, then i (the row order of H_qPSK)."""
    out = []
    for j in range(1, n):
        for i in range(j):
            a = [0] * n
            a[i], a[j] = 1, (-1) % q
            out.append(tuple(a))
    return out


def miso_factorize(p: MisoProblem) -> list[SpcFactor]:
    """Canonical factorization of Pr{X = x | Y = y}, degree-one factors first.

    The pair parameter is −h_i* h_j, the conjugate of the printed −h_i h_j*;
    the two agree only when ψ is real (q = 2).
    """
    q, n, h = p.q, p.n, p.h
    out = []
    for i in range(n):
        a = tuple(1 if k == i else 0 for k in range(n))
        out.append(SpcFactor(a, gamma_pmf(p.y * np.conj(h[i]), p.sigma, q)))
    k = 0
    for j in range(1, n):
        for i in range(j):
            rho = -np.conj(h[i]) * h[j]
            out.append(SpcFactor(pair_directions(q, n)[k], gamma_pmf(rho, p.sigma, q)))
            k += 1
    return out


def miso_app(p: MisoProblem) -> JointPmf:
    """Direct evaluation of N[exp(−|y − Σ h_i ψ(x_i)|²/2σ²)]."""
    x = all_configs(p.q, p.n)
    s = psk(x, p.q) @ np.asarray(p.h)
    return JointPmf._from_log(-np.abs(p.y - s) ** 2 / (2 * p.sigma ** 2), p.q, p.n)


def miso_reconstruct(p: MisoProblem) -> JointPmf:
    return factors_product(p.q, p.n, [(f.direction, f.component) for f in miso_factorize(p)])


def h_qpsk(q: int, n: int) -> CodeSpec:
    """[K(1,n); ...; K(n−1,n) | −I], one check per antenna pair."""
    if n < 2:
        raise ValueError("n must be >= 2")
    check_prime(q)
    return CodeSpec.from_a(q, np.array(pair_directions(q, n), dtype=np.int64), n)


def miso_inputs(p: MisoProblem) -> tuple[CodeSpec, np.ndarray]:
    """Code and decoder inputs L(r) in H_qPSK column order."""
    facs = miso_factorize(p)
    return h_qpsk(p.q, p.n), np.array([log_map(f.component) for f in facs])


def matched_filter_inputs(p: MisoProblem) -> np.ndarray:
    """The complex input list y h_i*, ..., −h_i h_j*, ... as printed (σ not applied)."""
    h = np.asarray(p.h)
    pairs = [-h[i] * np.conj(h[j]) for j in range(1, p.n) for i in range(j)]
    return np.concatenate([p.y * np.conj(h), np.array(pairs, dtype=complex)])


def random_miso(q: int, n: int, rng: np.random.Generator, sigma: float = 1.0) -> MisoProblem:
    h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    x = rng.integers(0, q, n)
    z = sigma * (rng.standard_normal() + 1j * rng.standard_normal())
    return MisoProblem(q, tuple(h), complex(psk(x, q) @ h + z), sigma)
