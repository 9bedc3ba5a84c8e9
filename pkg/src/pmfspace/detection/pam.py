"""Natural and gray mapped M-PAM detection through the decoder of H_2PSK(N)."""

from __future__ import annotations

import numpy as np

from ..bridge import CodeSpec, scalar_inputs
from ..galois import FMat, all_configs
from ..joint import JointPmf
from .miso import h_qpsk


def bpsk(x):
    return 1 - 2 * np.asarray(x)


def _bits(m: int) -> int:
    n = int(m).bit_length() - 1
    if m < 2 or 1 << n != m:
        raise ValueError(f"M = {m} is not a power of two >= 2")
    return n


def pam_natural(x) -> np.ndarray:
    """Σ 2^{i−1} β(x_i) for rows of ``x``."""
    x = np.atleast_2d(x)
    return bpsk(x) @ (2.0 ** np.arange(x.shape[1]))


def gray_matrix(n: int) -> FMat:
    """G(N): lower triangular all-ones, so gray(x) = natural(x G)."""
    return FMat(2, np.tril(np.ones((n, n), dtype=np.int64)))


def pam_gray(x) -> np.ndarray:
    """Σ 2^{i−1} β(Σ_{j≥i} x_j)."""
    x = np.atleast_2d(x)
    suffix = np.cumsum(x[:, ::-1], axis=1)[:, ::-1] % 2
    return bpsk(suffix) @ (2.0 ** np.arange(x.shape[1]))


def pam_app(n: int, y: float, sigma: float, gray: bool = False) -> JointPmf:
    """Direct Pr{X = x | Y = y} for Y = pam(x) + Z, Z ~ N(0, σ²)."""
    x = all_configs(2, n)
    s = pam_gray(x) if gray else pam_natural(x)
    return JointPmf._from_log(-((y - s) ** 2) / (2 * sigma ** 2), 2, n)


def _pairs(n: int):
    return [(i, j) for j in range(1, n) for i in range(j)]


def pam_printed_natural(n: int, y: float, sigma: float) -> np.ndarray:
    """[y/σ, 2y/σ, ..., −2^{i}2^{j}/σ, ...] in H_2PSK column order (i < j, 0-based)."""
    h = 2.0 ** np.arange(n)
    pairs = [-h[i] * h[j] for i, j in _pairs(n)]
    return np.concatenate([y * h, pairs]) / sigma


def pam_inputs_natural(m: int, y: float, sigma: float) -> tuple[CodeSpec, np.ndarray]:
    """H_2PSK(log2 M) and inputs λ = ρ/σ² (the printed list divided by σ)."""
    n = _bits(m)
    lam = pam_printed_natural(n, y, sigma) / sigma
    code = h_qpsk(2, n) if n >= 2 else CodeSpec.from_a(2, np.zeros((0, 1), dtype=np.int64), 1)
    return code, scalar_inputs(lam)


def b_vector(i: int, j: int, n: int) -> tuple[int, ...]:
    """b_{i,j} = Σ_{k=i..j} f_k (0-based, inclusive)."""
    return tuple(1 if i <= k <= j else 0 for k in range(n))


def h_gray(n: int) -> CodeSpec:
    """[b_{1,2}; b_{1,3}; b_{2,3}; ...; b_{N−1,N} | I]."""
    if n < 2:
        raise ValueError("N must be >= 2")
    rows = [b_vector(i, j, n) for i, j in _pairs(n)]
    return CodeSpec.from_a(2, np.array(rows, dtype=np.int64), n)


def pam_printed_gray(n: int, y: float, sigma: float) -> np.ndarray:
    """Natural-PAM inputs permuted into H_GRAY column order.

    Column i < N−1 carries the pair (i, i+1), column N−1 carries y·2^{N−1}.
    Row b_{i,j} with j = N−1 carries y·2^i; otherwise it carries the pair (i, j+1).
    """
    h = 2.0 ** np.arange(n)
    first = [-h[i] * h[i + 1] for i in range(n - 1)] + [y * h[n - 1]]
    checks = []
    for i, j in _pairs(n):
        checks.append(y * h[i] if j == n - 1 else -h[i] * h[j + 1])
    return np.array(first + checks) / sigma


def pam_inputs_gray(m: int, y: float, sigma: float) -> tuple[CodeSpec, np.ndarray]:
    n = _bits(m)
    if n == 1:
        return CodeSpec.from_a(2, np.zeros((0, 1), dtype=np.int64), 1), scalar_inputs([y / sigma ** 2])
    return h_gray(n), scalar_inputs(pam_printed_gray(n, y, sigma) / sigma)


def _tri(k: int) -> int:
    return k * (k - 1) // 2


def gray_rowops_printed(n: int) -> list[tuple[int, int]]:
    """The published row-operation list, (src, dst) 1-based, meaning row dst += row src.

    It turns H_GRAY(N) into a column permutation of H_2PSK(N) for N = 3, 4
    only; for N >= 5 the resulting column multiset already differs.
    """
    ops = [(1, 1 + (j - 2) * (j - 1) // 2) for j in range(3, n + 1)]
    for i in range(4, n + 1):
        src = _tri(i - 1) + 3
        dsts = [_tri(i - 1) + 1, _tri(i - 1) + 2]
        dsts += [_tri(i - 1) + j for j in range(4, i)]
        if i < n:
            # b_{3,i+1} does not exist for i = N
            dsts.append(_tri(i) + 3)
        dsts += [_tri(j - 1) + 1 + i for j in range(i + 2, n + 1)]
        ops += [(src, d) for d in dsts]
    return ops


def apply_rowops(h: FMat, ops) -> FMat:
    data = h.data.copy()
    for src, dst in ops:
        data[dst - 1] = (data[dst - 1] + data[src - 1]) % h.q
    return FMat(h.q, data)


def _match_columns(hp: np.ndarray, target: np.ndarray) -> list[int] | None:
    where = {}
    for c in range(hp.shape[1]):
        where.setdefault(hp[:, c].tobytes(), []).append(c)
    perm = []
    for c in range(target.shape[1]):
        cands = where.get(target[:, c].tobytes())
        if not cands:
            return None
        perm.append(cands.pop(0))
    return perm


def _symbol_perm(n: int) -> list[int]:
    """Gray-code column holding each H_2PSK code symbol.

    With w = x G(N)ᵀ the gray symbols are x_k = w_k + w_{k+1} (k < N),
    x_N = w_N, c_{i,j} = w_i + w_{j+1} (j < N) and c_{i,N} = w_i.
    """
    pairs = _pairs(n)
    col = {p: n + k for k, p in enumerate(pairs)}
    perm = [col[(i, n - 1)] for i in range(n - 1)] + [n - 1]
    for i, j in pairs:
        perm.append(i if j == i + 1 else col[(i, j - 1)])
    return perm


def _rowops_for(t: np.ndarray) -> list[tuple[int, int]]:
    """Row additions (1-based) that turn the identity into ``t`` over GF(2)."""
    a = t.copy() % 2
    m = a.shape[0]
    rec = []

    def add(src, dst):
        a[dst] ^= a[src]
        rec.append((src + 1, dst + 1))

    for c in range(m):
        if not a[c, c]:
            r = next(r for r in range(c + 1, m) if a[r, c])
            add(r, c)
        for r in range(m):
            if r != c and a[r, c]:
                add(c, r)
    # E_k ... E_1 t = I and every E is its own inverse
    return rec[::-1]


def gray_to_natural_rowops(n: int) -> tuple[list[tuple[int, int]], list[int]]:
    """Row operations and column permutation taking H_GRAY(N) to H_2PSK(N).

    ``perm`` (0-based) satisfies H''[:, c] = H'[:, perm[c]] where H' is the
    row-reduced matrix.  The published list is used where it works (N <= 4);
    for larger N the operations are derived from the symbol correspondence
    between the two codes.
    """
    if n < 3:
        raise ValueError("N must be >= 3")
    g = h_gray(n).h
    target = h_qpsk(2, n).h.data
    ops = gray_rowops_printed(n)
    perm = _match_columns(apply_rowops(g, ops).data, target)
    if perm is None:
        perm = _symbol_perm(n)
        hp = np.zeros_like(target)
        hp[:, perm] = target
        ops = _rowops_for(hp[:, n:])
    return ops, perm


def pam_inputs_gray_on_natural_code(m: int, y: float, sigma: float) -> tuple[CodeSpec, np.ndarray, list[int]]:
    """Gray-PAM detection with the H_2PSK decoder.

    Returns the code, the permuted inputs and ``bit_pos`` where gray bit i
    is read from code symbol ``bit_pos[i]``.
    """
    n = _bits(m)
    _, inputs = pam_inputs_gray(m, y, sigma)
    _, perm = gray_to_natural_rowops(n)
    inv = {old: new for new, old in enumerate(perm)}
    return h_qpsk(2, n), inputs[perm], [inv[i] for i in range(n)]
