"""The Hilbert space of strictly positive pmfs over a finite alphabet.

Vector addition is the renormalized pointwise product, scalar multiplication
is the renormalized pointwise power and the uniform pmf is the zero vector.
Everything is computed on normalized log-probabilities so long chains of
operations do not underflow.

The same machinery backs :class:`pmfspace.joint.JointPmf`, which is the
identical construction over q^n outcomes.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch, NonPositiveMass

NORMALIZATION_TOL = 1e-12
THETA_TOL = 1e-9
DEFAULT_CLAMP_EPS = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _normalize_log(logf: np.ndarray) -> np.ndarray:
    return logf - logsumexp(logf)


def _positive_array(f: Iterable[float]) -> np.ndarray:
    arr = np.asarray(list(f) if not isinstance(f, np.ndarray) else f, dtype=np.float64).ravel()
    if arr.size == 0:
        raise DimensionMismatch("empty probability vector")
    if not np.all(np.isfinite(arr)):
        raise NonPositiveMass("probability entries must be finite")
    if np.any(arr <= 0):
        raise NonPositiveMass("every entry must be strictly positive")
    return arr


class PositiveVector:
    """Shared implementation of a normalized strictly positive vector.

    Subclasses only decide how many outcomes there are and how the value is
    presented; the algebra lives in the module-level functions.
    """

    __slots__ = ("_logp",)

    def __init__(self, probs: Iterable[float]):
        arr = _positive_array(probs)
        total = arr.sum()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total!r}; use normalize() for unnormalized input")
        self._logp = _frozen(_normalize_log(np.log(arr)))

    @classmethod
    def _from_log(cls, logp: np.ndarray, *args):
        obj = cls.__new__(cls)
        obj._init_shape(*args)
        obj._logp = _frozen(_normalize_log(np.asarray(logp, dtype=np.float64)))
        return obj

    def _init_shape(self, *args):
        pass

    def _like(self, logp: np.ndarray):
        raise NotImplementedError

    def _space(self) -> tuple:
        raise NotImplementedError

    @property
    def logp(self) -> np.ndarray:
        """Natural log of the probabilities (read-only)."""
        return self._logp

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self._logp)

    @property
    def size(self) -> int:
        return self._logp.size

    def __len__(self) -> int:
        return self._logp.size

    def __iter__(self):
        return iter(self.probs.tolist())

    def __getitem__(self, i):
        return float(np.exp(self._logp[i]))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return self._space() == other._space() and bool(np.max(np.abs(self.probs - other.probs)) <= atol)

    # Operator sugar: p + r is p ⊞ r, a * p is a ⊠ p, -p is ⊟p.
    def __add__(self, other):
        return boxplus(self, other)

    def __sub__(self, other):
        return boxplus(self, boxminus(other))

    def __neg__(self):
        return boxminus(self)

    def __rmul__(self, alpha: float):
        return boxtimes(alpha, self)


class Pmf(PositiveVector):
    """A strictly positive pmf over GF(q), q = len(probs)."""

    __slots__ = ()

    def __init__(self, probs: Iterable[float]):
        super().__init__(probs)
        if self.size < 2:
            raise DimensionMismatch("a pmf needs at least two outcomes")

    def _like(self, logp):
        return Pmf._from_log(logp)

    def _space(self):
        return ("pmf", self.size)

    @property
    def q(self) -> int:
        return self.size

    def __repr__(self):
        return "Pmf(" + ", ".join(f"{v:.6g}" for v in self.probs) + ")"

    def to_json(self) -> dict:
        return {"q": self.q, "probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, obj: dict | str) -> "Pmf":
        if isinstance(obj, str):
            obj = json.loads(obj)
        probs = obj["probs"]
        if len(probs) != obj["q"]:
            raise DimensionMismatch("len(probs) != q")
        return normalize(probs)


def _check_same(p: PositiveVector, r: PositiveVector):
    if p._space() != r._space():
        raise DimensionMismatch(f"operands live in different spaces: {p._space()} vs {r._space()}")


def normalize(f: Iterable[float]) -> Pmf:
    """N[f]: scale a positive vector so it sums to one."""
    arr = _positive_array(f)
    return Pmf._from_log(np.log(arr))


def clamp(f: Iterable[float], eps: float = DEFAULT_CLAMP_EPS) -> Pmf:
    """Lift zero (or tiny) entries to ``eps`` and normalize.

    Meant for user data with empty cells; the core constructors never do this.
    Negative entries are still rejected.
    """
    arr = np.asarray(list(f) if not isinstance(f, np.ndarray) else f, dtype=np.float64).ravel()
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise NonPositiveMass("clamp only repairs zeros, not negative or non-finite entries")
    return normalize(np.maximum(arr, eps))


def uniform(q: int) -> Pmf:
    """θ, the additive identity."""
    return Pmf._from_log(np.zeros(q))


theta = uniform


def from_logits(logits: Sequence[float]) -> Pmf:
    return Pmf._from_log(np.asarray(logits, dtype=np.float64))


def boxplus(p: PositiveVector, *rest: PositiveVector):
    """p ⊞ r ⊞ ...: pointwise product, renormalized."""
    acc = np.array(p.logp)
    for r in rest:
        _check_same(p, r)
        acc = acc + r.logp
    return p._like(acc)


def boxtimes(alpha: float, p: PositiveVector):
    """α ⊠ p: pointwise power, renormalized."""
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    return p._like(alpha * p.logp)


def boxminus(p: PositiveVector):
    """⊟p = (−1) ⊠ p."""
    return p._like(-p.logp)


def boxsum(items: Sequence[PositiveVector], weights: Sequence[float] | None = None):
    """⊞-sum of weighted terms, ⊞_i w_i ⊠ p_i."""
    if not items:
        raise ValueError("need at least one term")
    weights = [1.0] * len(items) if weights is None else list(weights)
    acc = np.zeros_like(items[0].logp)
    for w, p in zip(weights, items):
        _check_same(items[0], p)
        acc = acc + float(w) * p.logp
    return items[0]._like(acc)


def log_map(p: PositiveVector) -> np.ndarray:
    """L(p): centered log-probabilities, a vector orthogonal to all-ones."""
    lp = p.logp
    return lp - lp.mean()


def simplex_vectors(q: int) -> np.ndarray:
    """Rows s(x) = e_x − (1/q)·1 for x = 0..q−1."""
    return np.eye(q) - 1.0 / q


def log_unmap(v: Sequence[float]) -> Pmf:
    """L†(v) = N[exp(<v, s(x)>)].

    Any real vector is accepted; the component along all-ones has no effect.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size < 2:
        raise DimensionMismatch("need at least two coordinates")
    return Pmf._from_log(simplex_vectors(v.size) @ v)


def inner_product(p: PositiveVector, r: PositiveVector) -> float:
    """<p, r> = <L(p), L(r)> in R^q."""
    _check_same(p, r)
    return float(np.dot(log_map(p), log_map(r)))


def inner_product_covariance(p: PositiveVector, r: PositiveVector) -> float:
    """Same inner product written as q·Cov(log p(X), log r(X)) for uniform X."""
    _check_same(p, r)
    a, b = p.logp, r.logp
    return float(a.size * (np.mean(a * b) - np.mean(a) * np.mean(b)))


def norm(p: PositiveVector) -> float:
    return float(np.linalg.norm(log_map(p)))


def distance(p: PositiveVector, r: PositiveVector) -> float:
    """D(p, r) = ||p ⊟ r||."""
    _check_same(p, r)
    return float(np.linalg.norm(log_map(p) - log_map(r)))


def angle(p: PositiveVector, r: PositiveVector) -> float:
    """Angle in radians; undefined if either argument is θ."""
    np_, nr = norm(p), norm(r)
    if np_ == 0 or nr == 0:
        raise ValueError("angle with the zero vector θ is undefined")
    c = inner_product(p, r) / (np_ * nr)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def is_theta(p: PositiveVector, tol: float = THETA_TOL) -> bool:
    return norm(p) < tol


def staircase_vectors(q: int) -> np.ndarray:
    """Orthonormal basis of 1⊥ in R^q; row i−1 has i entries 1/√(i(i+1)) then −i/√(i(i+1))."""
    if q < 2:
        raise DimensionMismatch("q must be >= 2")
    rows = np.zeros((q - 1, q))
    for i in range(1, q):
        c = 1.0 / math.sqrt(i * (i + 1))
        rows[i - 1, :i] = c
        rows[i - 1, i] = -i * c
    return rows


def ortho_basis(q: int) -> list[Pmf]:
    """The q−1 orthonormal basis pmfs s_1..s_{q−1}."""
    return [log_unmap(v) for v in staircase_vectors(q)]


def coordinates(p: Pmf) -> np.ndarray:
    """Coordinates of p against :func:`ortho_basis`."""
    return np.array([inner_product(p, s) for s in ortho_basis(p.q)])


def from_coordinates(c: Sequence[float]) -> Pmf:
    c = np.asarray(c, dtype=np.float64)
    return log_unmap(c @ staircase_vectors(c.size + 1))


def llr(p: Pmf) -> float:
    """log(p(0)/p(1)) for a binary pmf."""
    if p.size != 2:
        raise DimensionMismatch("the LLR is defined for q = 2 only")
    return float(p.logp[0] - p.logp[1])


def from_llr(value: float) -> Pmf:
    return Pmf._from_log(np.array([value / 2.0, -value / 2.0]))
