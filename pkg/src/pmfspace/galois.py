"""Arithmetic over prime fields GF(q), plus vectors and matrices over them.

Vectors are plain tuples of residues.  Matrices are :class:`FMat`, a thin
immutable wrapper around an integer numpy array that remembers its modulus.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DivisionByZero

FVec = tuple  # tuple[int, ...] of residues in [0, q)


@dataclass(frozen=True)
class PrimeField:
    """The field of integers modulo a prime ``q``."""

    q: int

    def __post_init__(self):
        from sympy import isprime  # deferred: sympy is slow to import

        if not isinstance(self.q, (int, np.integer)) or self.q < 2 or not isprime(int(self.q)):
            raise ValueError(f"q must be a prime >= 2, got {self.q!r}")

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in GF({self.q})")
        return pow(a, -1, self.q)


def check_prime(q: int) -> int:
    return PrimeField(int(q)).q


@dataclass(frozen=True, eq=False)
class FMat:
    """Matrix over GF(q), stored row-major as residues."""

    q: int
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.int64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ValueError("FMat data must be two-dimensional")
        arr %= self.q
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FMat)
            and self.q == other.q
            and self.data.shape == other.data.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self):
        return hash((self.q, self.data.shape, self.data.tobytes()))

    def __matmul__(self, other: "FMat") -> "FMat":
        if self.q != other.q or self.cols != other.rows:
            raise ValueError("incompatible matrices")
        return FMat(self.q, (self.data @ other.data) % self.q)

    @property
    def T(self) -> "FMat":
        return FMat(self.q, self.data.T)

    def row(self, i: int) -> FVec:
        return tuple(int(v) for v in self.data[i])

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def to_json(self) -> dict:
        return {"q": self.q, "rows": self.rows, "cols": self.cols, "data": self.data.ravel().tolist()}

    @classmethod
    def from_json(cls, obj: dict | str) -> "FMat":
        if isinstance(obj, str):
            obj = json.loads(obj)
        q, rows, cols, data = obj["q"], obj["rows"], obj["cols"], obj["data"]
        if len(data) != rows * cols:
            raise ValueError("rows*cols does not match data length")
        if any(not 0 <= int(v) < q for v in data):
            raise ValueError("matrix entries must be residues in [0, q)")
        return cls(q, np.asarray(data, dtype=np.int64).reshape(rows, cols))

    @classmethod
    def identity(cls, q: int, n: int) -> "FMat":
        return cls(q, np.eye(n, dtype=np.int64))

    @classmethod
    def from_rows(cls, q: int, rows: Iterable[Sequence[int]], cols: int | None = None) -> "FMat":
        rows = [list(r) for r in rows]
        if not rows:
            return cls(q, np.zeros((0, cols or 0), dtype=np.int64))
        return cls(q, np.asarray(rows, dtype=np.int64))

    def __repr__(self):
        return f"FMat(q={self.q}, {self.data.tolist()})"


@dataclass(frozen=True)
class DependencyMatrix:
    """Diagonal 0/1 matrix selecting the coordinates a pmf depends on."""

    q: int
    mask: tuple

    def __post_init__(self):
        object.__setattr__(self, "mask", tuple(int(m) for m in self.mask))
        if any(m not in (0, 1) for m in self.mask):
            raise ValueError("dependency mask entries must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.mask)

    def as_fmat(self) -> FMat:
        return FMat(self.q, np.diag(self.mask))

    def apply(self, x: Sequence[int]) -> FVec:
        """Return x·D (zero the unmasked coordinates)."""
        return tuple(int(v) * m for v, m in zip(x, self.mask))


def vec_dot(a: Sequence[int], x: Sequence[int], q: int) -> int:
    return int(sum(int(u) * int(v) for u, v in zip(a, x)) % q)


def mat_rank_inverse(m: FMat) -> tuple[int, FMat | None]:
    """Gaussian elimination over GF(q).

    Returns the rank and, for square full-rank input, the inverse.
    """
    q = m.q
    r, c = m.shape
    square = r == c
    aug = np.concatenate([m.data.copy(), np.eye(r, dtype=np.int64)], axis=1) if square else m.data.copy()
    rank = 0
    for col in range(c):
        pivot = None
        for row in range(rank, r):
            if aug[row, col] % q:
                pivot = row
                break
        if pivot is None:
            continue
        if pivot != rank:
            aug[[rank, pivot]] = aug[[pivot, rank]]
        aug[rank] = (aug[rank] * pow(int(aug[rank, col]), -1, q)) % q
        for row in range(r):
            if row != rank and aug[row, col]:
                aug[row] = (aug[row] - aug[row, col] * aug[rank]) % q
        rank += 1
        if rank == r:
            break
    if square and rank == r:
        return rank, FMat(q, aug[:, c:])
    return rank, None


def mat_rank(m: FMat) -> int:
    return mat_rank_inverse(m)[0]


def canonical_direction(a: Sequence[int], q: int) -> FVec:
    """Scale ``a`` so its first nonzero entry is 1.  All-zero input is returned as is."""
    a = [int(v) % q for v in a]
    for v in a:
        if v:
            s = pow(v, -1, q)
            return tuple((u * s) % q for u in a)
    return tuple(a)


@lru_cache(maxsize=None)
def parity_direction_set(q: int, n: int) -> tuple[FVec, ...]:
    """Pairwise linearly independent representatives of every direction in GF(q)^n.

    The canonical basis vectors come first, then the remaining representatives
    (first nonzero entry equal to 1) in lexicographic order.
    """
    check_prime(q)
    if n < 1:
        raise ValueError("n must be >= 1")
    basis = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    seen = set(basis)
    rest = []
    for v in itertools.product(range(q), repeat=n):
        if any(v) and canonical_direction(v, q) == v and v not in seen:
            rest.append(v)
    return tuple(basis + rest)


def hamming_weight(a: Sequence[int]) -> int:
    return sum(1 for v in a if v)


@lru_cache(maxsize=64)
def all_configs(q: int, n: int) -> np.ndarray:
    """All vectors of GF(q)^n as rows, in mixed-radix order with x_1 most significant."""
    if q ** n > 2 ** 20:
        raise ValueError(f"q^n = {q ** n} exceeds the dense limit 2^20")
    grid = np.indices((q,) * n).reshape(n, -1).T.astype(np.int64)
    grid.setflags(write=False)
    return grid


def config_index(x: Sequence[int], q: int) -> int:
    idx = 0
    for v in x:
        idx = idx * q + int(v)
    return idx
