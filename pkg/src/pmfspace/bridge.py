"""Inference on a joint pmf as decoding of a linear code.

Extend x ∈ GF(q)^n with auxiliary symbols x·Aᵀ, one per non-basis
direction of the canonical factorization.  The extended words are the
codewords of the code with parity check matrix H = [A −I], and feeding the
decoder the inputs y_i = L(r_i) makes the decoder's likelihood equal p on
the code.  Maximization then becomes ML codeword decoding and
marginalization becomes symbolwise decoding.

The decoders here enumerate all q^n codewords.  They exist to certify the
equivalences and to serve as oracles for the fast detectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from . import pmf as _pmf
from .errors import DimensionMismatch
from .galois import FMat, FVec, all_configs, hamming_weight, parity_direction_set
from .joint import JointPmf, canonical_factorization
from .pmf import Pmf, log_map, log_unmap

MAX_ENUM = 2 ** 20


def simplex_map(x: int, q: int) -> np.ndarray:
    """s(x) = e_x − (1/q)·1."""
    if not 0 <= int(x) < q:
        raise ValueError(f"{x} is not a residue mod {q}")
    return _pmf.simplex_vectors(q)[int(x)]


def channel_likelihood(y: Sequence[float]) -> Pmf:
    """Likelihood of the transmitted symbol for Y = s(X) + Z, Z ~ N(0, I).

    exp(−½||y − s(x)||²) normalized over x, which is exactly L†(y).
    """
    return log_unmap(y)


def scalar_input(lam: float) -> np.ndarray:
    """Binary decoder input whose likelihood is N[exp(λ·β(x))], β(0)=1, β(1)=−1."""
    return np.array([lam, -lam], dtype=np.float64)


def scalar_inputs(lams: Sequence[float]) -> np.ndarray:
    lams = np.asarray(lams, dtype=np.float64)
    return np.stack([lams, -lams], axis=-1)


@dataclass(frozen=True)
class CodeSpec:
    """Linear code over GF(q) with H = [A −I]; the first ``n`` symbols are information."""

    q: int
    h: FMat
    n: int

    def __post_init__(self):
        if self.h.q != self.q:
            raise DimensionMismatch("matrix modulus differs from q")
        m = self.h.rows
        if self.h.cols != self.n + m:
            raise DimensionMismatch("H must have n + rows columns")
        if m and not np.array_equal(self.h.data[:, self.n:], (-np.eye(m, dtype=np.int64)) % self.q):
            raise ValueError("H must end with a −I block (the identity when q = 2)")

    @property
    def length(self) -> int:
        return self.h.cols

    @property
    def checks(self) -> int:
        return self.h.rows

    @property
    def a(self) -> FMat:
        return FMat(self.q, self.h.data[:, : self.n]) if self.checks else FMat(self.q, np.zeros((0, self.n), dtype=np.int64))

    def generator(self) -> FMat:
        """G = [I Aᵀ], so that H·Gᵀ = 0."""
        a = self.h.data[:, : self.n]
        return FMat(self.q, np.concatenate([np.eye(self.n, dtype=np.int64), a.T], axis=1))

    def encode(self, x: Sequence[int]) -> FVec:
        x = np.asarray(x, dtype=np.int64) % self.q
        return tuple(int(v) for v in (x @ self.generator().data) % self.q)

    def codewords(self) -> np.ndarray:
        """All q^n codewords, in index order of their information part."""
        if self.q ** self.n > MAX_ENUM:
            raise ValueError("code too large to enumerate")
        x = all_configs(self.q, self.n)
        return (x @ self.generator().data) % self.q

    def syndrome(self, c: Sequence[int]) -> np.ndarray:
        return (self.h.data @ np.asarray(c, dtype=np.int64)) % self.q

    def to_json(self) -> dict:
        return {"q": self.q, "n": self.n, "H": self.h.to_json()}

    @classmethod
    def from_json(cls, obj: dict | str) -> "CodeSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["q"]), FMat.from_json(obj["H"]), int(obj["n"]))

    @classmethod
    def from_a(cls, q: int, a: np.ndarray, n: int) -> "CodeSpec":
        a = np.asarray(a, dtype=np.int64).reshape(-1, n) % q
        m = a.shape[0]
        h = np.concatenate([a, (-np.eye(m, dtype=np.int64)) % q], axis=1)
        return cls(q, FMat(q, h), n)


@dataclass(frozen=True)
class SubstitutePmf:
    """t_p(x_E) = p(x) on x_E = [x, x·Aᵀ] and 0 elsewhere."""

    source: JointPmf
    code: CodeSpec

    def value(self, x_e: Sequence[int]) -> float:
        x_e = tuple(int(v) % self.code.q for v in x_e)
        if self.code.syndrome(x_e).any():
            return 0.0
        return self.source.prob(x_e[: self.code.n])

    def support(self) -> np.ndarray:
        return self.code.codewords()


def _as_inputs(inputs, length: int, q: int) -> np.ndarray:
    arr = np.asarray(inputs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape != (length, q):
        raise DimensionMismatch(f"expected {length} inputs of length {q}, got shape {arr.shape}")
    return arr


def code_from_factors(q: int, n: int, factors: Sequence[tuple[Sequence[int], Pmf]]) -> tuple[CodeSpec, np.ndarray]:
    """Code and inputs for N[Π r(a·x)] with arbitrary components.

    Factors on unit vectors feed the information symbols (θ if absent); every
    other factor adds one check row.  Inputs are L(r).
    """
    basis_inputs = np.zeros((n, q))
    rows, extra = [], []
    for a, r in factors:
        a = tuple(int(v) % q for v in a)
        if hamming_weight(a) == 1:
            i = next(j for j, v in enumerate(a) if v)
            # r(c·x_i) is a pmf of x_i with permuted entries
            perm = (np.arange(q) * a[i]) % q
            basis_inputs[i] += log_map(r)[perm]
        else:
            rows.append(a)
            extra.append(log_map(r))
    code = CodeSpec.from_a(q, np.array(rows, dtype=np.int64).reshape(-1, n), n)
    inputs = np.concatenate([basis_inputs, np.array(extra).reshape(-1, q)], axis=0)
    return code, inputs


def build_substitute(p: JointPmf) -> tuple[SubstitutePmf, CodeSpec, np.ndarray]:
    """Full dual-Hamming construction: one check per non-basis direction."""
    f = canonical_factorization(p)
    dirs = parity_direction_set(p.q, p.n)
    a = np.array(dirs[p.n:], dtype=np.int64).reshape(-1, p.n)
    code = CodeSpec.from_a(p.q, a, p.n)
    inputs = np.array([log_map(fac.component) for fac in f.factors])
    return SubstitutePmf(p, code), code, inputs


def build_substitute_short(p: JointPmf, tol: float = _pmf.THETA_TOL) -> tuple[CodeSpec, np.ndarray]:
    """Shorter code H_S = [B −I] keeping only non-θ directions of weight ≥ 2."""
    f = canonical_factorization(p)
    keep = [fac for fac in f.factors[p.n:] if not fac.is_theta(tol)]
    code = CodeSpec.from_a(p.q, np.array([fac.direction for fac in keep], dtype=np.int64).reshape(-1, p.n), p.n)
    inputs = np.array([log_map(fac.component) for fac in list(f.factors[: p.n]) + keep])
    return code, inputs


def codeword_scores(code: CodeSpec, inputs) -> tuple[np.ndarray, np.ndarray]:
    """Log-likelihood of every codeword: Σ_i log L†(y_i)(c_i)."""
    y = _as_inputs(inputs, code.length, code.q)
    loglik = np.array([log_unmap(v).logp for v in y])
    words = code.codewords()
    scores = loglik[np.arange(code.length)[None, :], words].sum(axis=1)
    return words, scores


def ml_codeword_decode(code: CodeSpec, inputs) -> FVec:
    """Exhaustive ML codeword; ties go to the smallest information index."""
    words, scores = codeword_scores(code, inputs)
    return tuple(int(v) for v in words[int(np.argmax(scores))])


def symbolwise_decode(code: CodeSpec, inputs) -> list[Pmf]:
    """Exact a posteriori pmf of every code symbol."""
    words, scores = codeword_scores(code, inputs)
    post = scores - logsumexp(scores)
    out = []
    for i in range(code.length):
        logm = np.full(code.q, -np.inf)
        for v in range(code.q):
            sel = words[:, i] == v
            if sel.any():
                logm[v] = logsumexp(post[sel])
        # every symbol value occurs on some codeword unless the column of G is zero
        logm = np.where(np.isfinite(logm), logm, -745.0)
        out.append(_pmf.from_logits(logm))
    return out
