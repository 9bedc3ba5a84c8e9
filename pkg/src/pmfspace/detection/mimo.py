"""MIMO QPSK: canonical factorization of the APP and the tail-biting codes.

Bits are indexed 0-based: antenna k carries bits 2k and 2k+1, mapped by
gray QPSK w = a·β(x_{2k}) + a*·β(x_{2k+1}) with a = (1+j)/2.

A permutation ``perm`` reorders the bits as v_m = x_{perm[m]}; the code's
information symbols are the v's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bridge import CodeSpec, scalar_inputs
from ..errors import DimensionMismatch
from ..galois import FMat, all_configs
from ..joint import JointPmf, SpcFactor, factors_product
from ..pmf import from_logits

QPSK_A = 0.5 + 0.5j


def qpsk(bits) -> np.ndarray:
    """Gray QPSK: [0,0]→1, [0,1]→j, [1,1]→−1, [1,0]→−j, applied to bit pairs along the last axis."""
    b = 1 - 2 * np.asarray(bits, dtype=np.float64)
    return QPSK_A * b[..., 0::2] + np.conj(QPSK_A) * b[..., 1::2]


@dataclass(frozen=True, eq=False)
class MimoProblem:
    """y = H_c w + z with z circularly symmetric of variance 2σ² per entry."""

    hc: np.ndarray
    y: np.ndarray
    sigma2: float

    def __post_init__(self):
        hc = np.atleast_2d(np.asarray(self.hc, dtype=complex))
        y = np.asarray(self.y, dtype=complex).ravel()
        if hc.shape[0] != y.size:
            raise DimensionMismatch(f"H_c has {hc.shape[0]} rows but y has {y.size} entries")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "hc", hc)
        object.__setattr__(self, "y", y)

    @property
    def nt(self) -> int:
        return self.hc.shape[1]

    @property
    def nr(self) -> int:
        return self.hc.shape[0]


def mimo_parameters(hc: np.ndarray, y: np.ndarray, sigma2) -> tuple[np.ndarray, np.ndarray]:
    """Scalar decoder inputs λ = ρ/σ² for every factor, batched over leading axes.

    Returns ``lam_bit`` of shape (..., 2Nt) and a symmetric ``lam_pair`` of
    shape (..., 2Nt, 2Nt) that is zero within an antenna and on the diagonal.
    """
    hc = np.asarray(hc, dtype=complex)
    y = np.asarray(y, dtype=complex)
    sigma2 = np.asarray(sigma2, dtype=np.float64)[..., None]
    r = np.conj(np.swapaxes(hc, -1, -2)) @ hc
    u = np.einsum("...rk,...r->...k", np.conj(hc), y)
    nt = hc.shape[-1]
    lam_bit = np.empty(u.shape[:-1] + (2 * nt,))
    lam_bit[..., 0::2] = (u.real + u.imag) / 2 / sigma2
    lam_bit[..., 1::2] = (u.real - u.imag) / 2 / sigma2
    # r[k, l] with k > l drives the pairs (2k+s, 2l+t)
    s2 = sigma2[..., None]
    lam_pair = np.zeros(u.shape[:-1] + (2 * nt, 2 * nt))
    lam_pair[..., 0::2, 0::2] = -r.real / 2 / s2
    lam_pair[..., 0::2, 1::2] = -r.imag / 2 / s2
    lam_pair[..., 1::2, 0::2] = r.imag / 2 / s2
    lam_pair[..., 1::2, 1::2] = -r.real / 2 / s2
    lower = np.kron(np.tril(np.ones((nt, nt)), -1), np.ones((2, 2))).astype(bool)
    lam_pair = np.where(lower, lam_pair, 0.0)
    lam_pair = lam_pair + np.swapaxes(lam_pair, -1, -2)
    return lam_bit, lam_pair


def mimo_factorize(p: MimoProblem) -> tuple[np.ndarray, np.ndarray, list[SpcFactor]]:
    """R = H_c^H H_c, u = H_c^H y and the SPC factors of Pr{X = x | y}.

    Factors are N[exp(λβ(a·x))]: the 2Nt degree-one factors first, then the
    pairs in H_MIMO,QPSK row order.
    """
    r = np.conj(p.hc.T) @ p.hc
    u = np.conj(p.hc.T) @ p.y
    lam_bit, lam_pair = mimo_parameters(p.hc, p.y, p.sigma2)
    n = 2 * p.nt
    facs = []
    for i in range(n):
        a = tuple(1 if k == i else 0 for k in range(n))
        facs.append(SpcFactor(a, from_logits([lam_bit[i], -lam_bit[i]])))
    for i, j in mimo_pairs(p.nt):
        a = tuple(1 if k in (i, j) else 0 for k in range(n))
        facs.append(SpcFactor(a, from_logits([lam_pair[i, j], -lam_pair[i, j]])))
    return r, u, facs


def mimo_reconstruct(p: MimoProblem) -> JointPmf:
    _, _, facs = mimo_factorize(p)
    return factors_product(2, 2 * p.nt, [(f.direction, f.component) for f in facs])


def mimo_app(p: MimoProblem) -> JointPmf:
    """Direct N[exp(−||y − H_c w(x)||²/2σ²)] over all 2^{2Nt} bit vectors."""
    x = all_configs(2, 2 * p.nt)
    d = p.y[None, :] - qpsk(x) @ p.hc.T
    return JointPmf._from_log(-np.sum(np.abs(d) ** 2, axis=1) / (2 * p.sigma2), 2, 2 * p.nt)


def mimo_pairs(nt: int) -> list[tuple[int, int]]:
    """Bit pairs of L(1,Nt), ..., L(Nt−1,Nt) in row order (0-based)."""
    out = []
    for k in range(1, nt):
        for j in (2 * k, 2 * k + 1):
            out += [(i, j) for i in range(2 * k)]
    return out


def _rows_from_pairs(pairs, n: int) -> np.ndarray:
    a = np.zeros((len(pairs), n), dtype=np.int64)
    for r, (i, j) in enumerate(pairs):
        a[r, i] = a[r, j] = 1
    return a


def h_mimo_qpsk(nt: int) -> CodeSpec:
    if nt < 2:
        raise ValueError("Nt must be >= 2")
    return CodeSpec.from_a(2, _rows_from_pairs(mimo_pairs(nt), 2 * nt), 2 * nt)


def mimo_inputs(p: MimoProblem) -> tuple[CodeSpec, np.ndarray]:
    lam_bit, lam_pair = mimo_parameters(p.hc, p.y, p.sigma2)
    lam = list(lam_bit) + [lam_pair[i, j] for i, j in mimo_pairs(p.nt)]
    return h_mimo_qpsk(p.nt), scalar_inputs(lam)


# ---------------------------------------------------------------------------
# Tail-biting constructions
# ---------------------------------------------------------------------------


def standard_permutation(nt: int) -> list[int]:
    """Bits 0, 2, ..., then 1, 3, ... (f_1, f_3, ..., f_2, f_4, ... in 1-based terms)."""
    return list(range(0, 2 * nt, 2)) + list(range(1, 2 * nt, 2))


def permutation_matrix(perm) -> FMat:
    """P with columns f_{perm[m]}ᵀ, so that v = x P."""
    n = len(perm)
    m = np.zeros((n, n), dtype=np.int64)
    m[list(perm), np.arange(n)] = 1
    return FMat(2, m)


def shift_rows(width: int, lag_count: int, sections: int) -> list[tuple[int, int]]:
    """Cyclic block rows: block t, row r covers positions t+r and t+lag_count.

    ``lag_count`` is the number of rows per block; this is ((L_TB 0))_t for
    t = 0..sections−1 with L_TB = [I 1] of width ``width``.
    """
    del width
    return [((t + r) % sections, (t + lag_count) % sections) for t in range(sections) for r in range(lag_count)]


def b_matrix(nt: int) -> FMat:
    """B(Nt): H_MIMO,QPSK rows expressed in v = x P coordinates."""
    perm = standard_permutation(nt)
    a = _rows_from_pairs(mimo_pairs(nt), 2 * nt)
    return FMat(2, a[:, perm])


def tb_rows(nt: int) -> list[tuple[int, int]]:
    return shift_rows(nt, nt - 1, 2 * nt)


def etb_rows(nt: int) -> list[tuple[int, int]]:
    return shift_rows(nt + 1, nt, 2 * nt)


def tb_construction(nt: int) -> tuple[FMat, FMat, CodeSpec]:
    """(P, B_TB(Nt), H_TB,MIMO(Nt) = [B_TB I])."""
    if nt < 2:
        raise ValueError("Nt must be >= 2")
    b_tb = _rows_from_pairs(tb_rows(nt), 2 * nt)
    return permutation_matrix(standard_permutation(nt)), FMat(2, b_tb), CodeSpec.from_a(2, b_tb, 2 * nt)


def tb_row_map(nt: int) -> list[int]:
    """For each row of B_TB, the index of the equal row of B(Nt)."""
    b = b_matrix(nt).data
    _, b_tb, _ = tb_construction(nt)
    rows = {r.tobytes(): i for i, r in enumerate(b)}
    out = []
    for r in b_tb.data:
        if r.tobytes() not in rows:
            raise ValueError("B_TB is not a row permutation of B")
        out.append(rows.pop(r.tobytes()))
    if rows:
        raise ValueError("B_TB is not a row permutation of B")
    return out


def etb_construction(nt: int) -> CodeSpec:
    """H_ETB,MIMO(Nt) = [C_TB(Nt) I] with 2Nt² checks."""
    if nt < 2:
        raise ValueError("Nt must be >= 2")
    return CodeSpec.from_a(2, _rows_from_pairs(etb_rows(nt), 2 * nt), 2 * nt)


def permutation_set(nt: int) -> list[list[int]]:
    """P_1..P_{2Nt−1}; for Nt = 8 these are the fifteen published permutations."""
    odds = list(range(0, 2 * nt, 2))
    evens = list(range(1, 2 * nt, 2))
    out = [odds + evens]
    out += [odds + evens[s:] + evens[:s] for s in range(1, nt)]
    out += [evens[s:] + evens[:s] + odds for s in range(1, nt)]
    return out


@dataclass(frozen=True, eq=False)
class InputMap:
    """Where each code symbol's input comes from for a code and permutation.

    ``bit`` (n,) gives the x-bit feeding information symbol m;
    ``pair`` (rows, 2) the x-bit pair of each check; ``live`` masks out
    duplicate checks and same-antenna pairs (input θ).
    """

    bit: np.ndarray
    pair: np.ndarray
    live: np.ndarray


def input_map(code: CodeSpec, perm) -> InputMap:
    perm = np.asarray(perm, dtype=np.int64)
    n = code.n
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("not a permutation")
    pos = [tuple(np.flatnonzero(row[:n])) for row in code.h.data]
    if any(len(p) != 2 for p in pos):
        raise ValueError("every check must involve exactly two information symbols")
    pair = perm[np.array(pos, dtype=np.int64)]
    seen, live = set(), []
    for i, j in pair:
        key = (min(i, j), max(i, j))
        same_antenna = key[0] // 2 == key[1] // 2
        live.append(not same_antenna and key not in seen)
        seen.add(key)
    missing = [(i, j) for j in range(n) for i in range(j) if i // 2 != j // 2 and (i, j) not in seen]
    if missing:
        raise ValueError(f"code does not cover the bit pairs {missing[:4]}... under this permutation")
    return InputMap(perm, pair, np.array(live, dtype=bool))


def code_inputs(imap: InputMap, lam_bit: np.ndarray, lam_pair: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scalar inputs for the information symbols and the checks, batched."""
    info = lam_bit[..., imap.bit]
    par = lam_pair[..., imap.pair[:, 0], imap.pair[:, 1]] * imap.live
    return info, par


def tb_inputs(p: MimoProblem, perm=None, extended: bool = False) -> tuple[CodeSpec, np.ndarray]:
    """Code and (L, 2) decoder inputs for H_TB (or H_ETB) under ``perm``."""
    code = etb_construction(p.nt) if extended else tb_construction(p.nt)[2]
    perm = standard_permutation(p.nt) if perm is None else perm
    lam_bit, lam_pair = mimo_parameters(p.hc, p.y, p.sigma2)
    info, par = code_inputs(input_map(code, perm), lam_bit, lam_pair)
    return code, scalar_inputs(np.concatenate([info, par]))


def random_channel(rng: np.random.Generator, nr: int, nt: int) -> np.ndarray:
    """Rayleigh H_c: iid CN(0, 1) entries (variance 1/2 per real dimension)."""
    return (rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))) / np.sqrt(2.0)


def random_mimo(rng: np.random.Generator, nr: int, nt: int, sigma2: float) -> tuple[MimoProblem, np.ndarray]:
    hc = random_channel(rng, nr, nt)
    bits = rng.integers(0, 2, 2 * nt)
    z = np.sqrt(sigma2) * (rng.standard_normal(nr) + 1j * rng.standard_normal(nr))
    return MimoProblem(hc, hc @ qpsk(bits) + z, sigma2), bits
