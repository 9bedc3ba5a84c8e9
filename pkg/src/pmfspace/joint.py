"""Joint pmfs over GF(q)^n and their canonical factorization.

A joint pmf is stored densely, flat, with index(x) = Σ x_i q^{n−i}
(x_1 most significant), which is numpy's C order for a table of shape
(q,)*n.  The space is the same Hilbert space as :mod:`pmfspace.pmf` with
q^n outcomes, so all algebra functions there accept :class:`JointPmf` too.

A soft parity check (SPC) factor N[r(a·x)] lives in a (q−1)-dimensional
subspace determined by the direction of ``a``.  Subspaces of linearly
independent directions are orthogonal and together span the whole space,
so projecting onto each of the (q^n−1)/(q−1) directions gives a unique
product-form factorization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import pmf as _pmf
from .errors import DimensionMismatch, SingularMatrix, ZeroDirection
from .galois import (
    FMat,
    FVec,
    all_configs,
    canonical_direction,
    check_prime,
    mat_rank,
    mat_rank_inverse,
    parity_direction_set,
)
from .pmf import THETA_TOL, Pmf, PositiveVector, log_map, log_unmap, staircase_vectors

MAX_DENSE = 2 ** 20


class JointPmf(PositiveVector):
    """Strictly positive pmf over GF(q)^n, dense storage."""

    __slots__ = ("q", "n")

    def __init__(self, q: int, n: int, probs: Iterable[float]):
        self._init_shape(q, n)
        super().__init__(probs)
        if self.size != q ** n:
            raise DimensionMismatch(f"expected {q ** n} probabilities, got {self.size}")

    def _init_shape(self, q, n):
        q, n = int(q), int(n)
        if n < 1:
            raise DimensionMismatch("n must be >= 1")
        if q ** n > MAX_DENSE:
            raise ValueError(f"q^n = {q ** n} exceeds the dense storage limit {MAX_DENSE}")
        self.q = q
        self.n = n

    def _like(self, logp):
        return JointPmf._from_log(logp, self.q, self.n)

    def _space(self):
        return ("joint", self.q, self.n)

    @property
    def table(self) -> np.ndarray:
        """Probabilities reshaped to (q,)*n, axis i−1 holding x_i."""
        return self.probs.reshape((self.q,) * self.n)

    def prob(self, x: Sequence[int]) -> float:
        return float(np.exp(self.logp[np.ravel_multi_index(tuple(int(v) for v in x), (self.q,) * self.n)]))

    def __repr__(self):
        return f"JointPmf(q={self.q}, n={self.n}, probs={np.array2string(self.probs, precision=5)})"

    def to_json(self) -> dict:
        return {"q": self.q, "n": self.n, "probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, obj: dict | str, smooth: float | None = None) -> "JointPmf":
        if isinstance(obj, str):
            obj = json.loads(obj)
        q, n, probs = int(obj["q"]), int(obj["n"]), obj["probs"]
        if len(probs) != q ** n:
            raise DimensionMismatch(f"expected {q ** n} probabilities, got {len(probs)}")
        if smooth is not None:
            return joint_from_pmf(_pmf.clamp(probs, smooth), q, n)
        return joint_normalize(q, n, probs)


def joint_from_pmf(p: PositiveVector, q: int, n: int) -> JointPmf:
    return JointPmf._from_log(p.logp, q, n)


def joint_normalize(q: int, n: int, f: Iterable[float]) -> JointPmf:
    arr = _pmf._positive_array(f)
    if arr.size != q ** n:
        raise DimensionMismatch(f"expected {q ** n} entries, got {arr.size}")
    return JointPmf._from_log(np.log(arr), q, n)


def joint_from_table(q: int, table: np.ndarray) -> JointPmf:
    table = np.asarray(table, dtype=np.float64)
    return joint_normalize(q, table.ndim, table.ravel())


def joint_from_logits(q: int, n: int, logits: Sequence[float]) -> JointPmf:
    return JointPmf._from_log(np.asarray(logits, dtype=np.float64), q, n)


def joint_uniform(q: int, n: int) -> JointPmf:
    return JointPmf._from_log(np.zeros(q ** n), q, n)


def joint_log_unmap(v: Sequence[float], q: int, n: int) -> JointPmf:
    """L_N†: same formula as the univariate pseudo-inverse with q^n outcomes."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != q ** n:
        raise DimensionMismatch("vector length must be q^n")
    return JointPmf._from_log(v - v.mean(), q, n)


# ---------------------------------------------------------------------------
# SPC factors
# ---------------------------------------------------------------------------


def _direction(a: Sequence[int], q: int, n: int) -> np.ndarray:
    a = np.asarray([int(v) for v in a], dtype=np.int64) % q
    if a.size != n:
        raise DimensionMismatch(f"direction has length {a.size}, expected {n}")
    if not a.any():
        raise ZeroDirection("parity direction must be nonzero")
    return a


def parity_values(a: Sequence[int], q: int, n: int) -> np.ndarray:
    """a·x for every x in index order."""
    return (all_configs(q, n) @ _direction(a, q, n)) % q


@dataclass(frozen=True)
class SpcFactor:
    """N[r(a·x)] with ``a`` stored in canonical form."""

    direction: FVec
    component: Pmf

    def to_json(self) -> dict:
        return {"direction": list(self.direction), "component": self.component.probs.tolist()}

    def is_theta(self, tol: float = THETA_TOL) -> bool:
        return _pmf.is_theta(self.component, tol)


def spc_make(a: Sequence[int], r: Pmf) -> JointPmf:
    """The joint pmf N[r(a·x)] = r(a·x)/q^{n−1}."""
    q, n = r.q, len(a)
    check_prime(q)
    u = parity_values(a, q, n)
    return JointPmf._from_log(r.logp[u], q, n)


def spc_project(p: JointPmf, a: Sequence[int]) -> Pmf:
    """Component of the orthogonal projection of ``p`` onto Im S_a.

    r = ⊞_j c_j ⊠ s_j with c_j = q^{−(n−1)} <N[s_j(a·x)], p>.
    """
    q, n = p.q, p.n
    u = parity_values(a, q, n)
    lp = log_map(p)
    basis = staircase_vectors(q)  # L(s_j) for the orthonormal basis pmfs
    coeffs = np.array([np.dot(b[u], lp) for b in basis]) / q ** (n - 1)
    return log_unmap(coeffs @ basis)


def spc_project_coset(p: JointPmf, a: Sequence[int]) -> Pmf:
    """Second path: r(u) ∝ geometric mean of p over the coset {x : a·x = u}."""
    q, n = p.q, p.n
    u = parity_values(a, q, n)
    sums = np.bincount(u, weights=p.logp, minlength=q)
    counts = np.bincount(u, minlength=q)
    return _pmf.from_logits(sums / counts)


@dataclass(frozen=True)
class CanonicalFactorization:
    q: int
    n: int
    factors: tuple

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def component(self, direction: Sequence[int]) -> Pmf:
        d = canonical_direction(direction, self.q)
        for f in self.factors:
            if f.direction == d:
                return f.component
        raise KeyError(direction)

    def non_theta(self, tol: float = THETA_TOL) -> list[SpcFactor]:
        return [f for f in self.factors if not f.is_theta(tol)]

    def reconstruct(self) -> JointPmf:
        return reconstruct(self)

    def to_json(self) -> list:
        return [f.to_json() for f in self.factors]

    @classmethod
    def from_json(cls, obj: list | str, q: int | None = None) -> "CanonicalFactorization":
        if isinstance(obj, str):
            obj = json.loads(obj)
        factors = tuple(
            SpcFactor(tuple(int(v) for v in item["direction"]), _pmf.normalize(item["component"])) for item in obj
        )
        if not factors:
            raise ValueError("empty factorization")
        q = q or factors[0].component.q
        return cls(q, len(factors[0].direction), factors)


def canonical_factorization(p: JointPmf, directions: Sequence[Sequence[int]] | None = None) -> CanonicalFactorization:
    """Project ``p`` onto every direction subspace.

    ``directions`` defaults to :func:`parity_direction_set`; any other complete
    set of pairwise independent representatives gives the same pmf components
    up to relabeling (see :func:`align_factorization`).
    """
    q, n = p.q, p.n
    check_prime(q)
    dirs = parity_direction_set(q, n) if directions is None else [tuple(int(v) % q for v in d) for d in directions]
    factors = tuple(SpcFactor(tuple(d), spc_project(p, d)) for d in dirs)
    return CanonicalFactorization(q, n, factors)


def align_factorization(f: CanonicalFactorization) -> CanonicalFactorization:
    """Rewrite every factor on its canonical direction, in standard set order.

    If a = c·d with d canonical then r(a·x) = r(c·(d·x)), so the component on
    d is u ↦ r(c·u).
    """
    q = f.q
    by_dir = {}
    for fac in f.factors:
        d = canonical_direction(fac.direction, q)
        nz = next(v for v in fac.direction if v % q)
        first = next(v for v in d if v)
        c = (nz * pow(first, -1, q)) % q
        perm = (np.arange(q) * c) % q
        by_dir[d] = SpcFactor(d, Pmf._from_log(fac.component.logp[perm]))
    order = parity_direction_set(q, f.n)
    return CanonicalFactorization(q, f.n, tuple(by_dir[d] for d in order if d in by_dir))


def reconstruct(f: CanonicalFactorization) -> JointPmf:
    """N[Π_i r_i(a_i·x)], computed in the log domain."""
    q, n = f.q, f.n
    acc = np.zeros(q ** n)
    for fac in f.factors:
        acc += fac.component.logp[parity_values(fac.direction, q, n)]
    return JointPmf._from_log(acc, q, n)


def factors_product(q: int, n: int, factors: Iterable[tuple[Sequence[int], Pmf]]) -> JointPmf:
    """N[Π r(a·x)] for an arbitrary list of (direction, component) pairs."""
    acc = np.zeros(q ** n)
    for a, r in factors:
        acc += r.logp[parity_values(a, q, n)]
    return JointPmf._from_log(acc, q, n)


def is_spc(p: JointPmf, tol: float = THETA_TOL) -> tuple[FVec, Pmf] | None:
    """Return (a, r) when ``p`` is a single SPC constraint, else None.

    A uniform pmf is reported as (e_1, θ).
    """
    f = canonical_factorization(p)
    active = f.non_theta(tol)
    if not active:
        return f.factors[0].direction, _pmf.uniform(p.q)
    if len(active) == 1:
        return active[0].direction, active[0].component
    return None


# ---------------------------------------------------------------------------
# Linear transforms and marginals
# ---------------------------------------------------------------------------


def _inverse(b: FMat) -> FMat:
    if b.rows != b.cols:
        raise SingularMatrix("matrix must be square")
    _, inv = mat_rank_inverse(b)
    if inv is None:
        raise SingularMatrix("matrix is not invertible over GF(q)")
    return inv


def transform_reversible(p: JointPmf, b: FMat) -> JointPmf:
    """Distribution of Y = X·B, i.e. Pr{Y = y} = p(y·B⁻¹)."""
    if b.q != p.q or b.rows != p.n:
        raise DimensionMismatch("matrix does not match the pmf")
    inv = _inverse(b)
    x = (all_configs(p.q, p.n) @ inv.data) % p.q
    idx = np.ravel_multi_index(tuple(x.T), (p.q,) * p.n)
    return JointPmf._from_log(p.logp[idx], p.q, p.n)


def transform_factorization(f: CanonicalFactorization, b: FMat) -> CanonicalFactorization:
    """Directions map as a ↦ a·(B⁻¹)ᵀ under Y = X·B; components are kept."""
    inv_t = _inverse(b).data.T
    moved = [SpcFactor(tuple(int(v) for v in (np.asarray(fac.direction) @ inv_t) % f.q), fac.component) for fac in f.factors]
    return align_factorization(CanonicalFactorization(f.q, f.n, tuple(moved)))


def independence_transform(p: JointPmf, tol: float = THETA_TOL) -> tuple[FMat, list[Pmf]] | None:
    """Find K with Y = X·K having independent components, if one exists.

    Works when the non-θ canonical directions are linearly independent.  Their
    rows form K_c (completed with unit vectors to a basis) and K = K_cᵀ, so
    Y_j = a_j·x is distributed as the j-th component.  Completion coordinates
    are uniform.
    """
    q, n = p.q, p.n
    active = canonical_factorization(p).non_theta(tol)
    if len(active) > n:
        return None
    rows = [list(f.direction) for f in active]
    if rows and mat_rank(FMat(q, np.array(rows))) < len(rows):
        return None
    comps = [f.component for f in active]
    for i in range(n):
        if len(rows) == n:
            break
        e = [1 if j == i else 0 for j in range(n)]
        if mat_rank(FMat(q, np.array(rows + [e]))) == len(rows) + 1:
            rows.append(e)
            comps.append(_pmf.uniform(q))
    k = FMat(q, np.array(rows)).T
    return k, comps


def cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a ⊛ b)[k] = Σ_i a[i] b[(k − i) mod q]."""
    q = a.size
    idx = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
    return b[idx] @ a


def scaled_pmf(r: np.ndarray, c: int) -> np.ndarray:
    """Distribution of c·Y over GF(q) when Y ~ r."""
    q = r.size
    out = np.zeros(q)
    for y in range(q):
        out[(c * y) % q] += r[y]
    return out


def marginals_from_independent(k: FMat, components: Sequence[Pmf]) -> list[Pmf]:
    """Marginals of X = Y·K⁻¹ from the independent components of Y.

    Each X_i is a GF(q) linear combination of the Y_j, so its pmf is a chain
    of cyclic convolutions of the (rescaled) component pmfs.
    """
    q = k.q
    kinv = _inverse(k).data
    out = []
    for i in range(k.rows):
        acc = np.zeros(q)
        acc[0] = 1.0
        for j, r in enumerate(components):
            c = int(kinv[j, i])
            if c:
                acc = cyclic_convolve(acc, scaled_pmf(r.probs, c))
        out.append(_pmf.normalize(acc))
    return out


def marginal_brute(p: JointPmf, i: int) -> Pmf:
    """Pr{X_i = x} by direct summation; ``i`` is 0-based."""
    if not 0 <= i < p.n:
        raise IndexError(f"coordinate {i} out of range for n = {p.n}")
    axes = tuple(j for j in range(p.n) if j != i)
    return _pmf.normalize(p.table.sum(axis=axes))


def marginals_brute(p: JointPmf) -> list[Pmf]:
    return [marginal_brute(p, i) for i in range(p.n)]


def argmax_brute(p: JointPmf) -> FVec:
    """Most probable configuration; ties go to the smallest index."""
    idx = int(np.argmax(p.logp))
    return tuple(int(v) for v in all_configs(p.q, p.n)[idx])


# ---------------------------------------------------------------------------
# Random generators (seeded; used by tests and the CLI demos)
# ---------------------------------------------------------------------------


def random_pmf(q: int, rng: np.random.Generator, spread: float = 1.0) -> Pmf:
    return _pmf.from_logits(rng.normal(scale=spread, size=q))


def random_joint(q: int, n: int, rng: np.random.Generator, spread: float = 1.0) -> JointPmf:
    return JointPmf._from_log(rng.normal(scale=spread, size=q ** n), q, n)


def random_structured(
    q: int, n: int, rng: np.random.Generator, n_factors: int | None = None, spread: float = 1.0
) -> tuple[JointPmf, list[tuple[FVec, Pmf]]]:
    """Product of SPC factors on a random subset of directions."""
    dirs = parity_direction_set(q, n)
    k = n_factors if n_factors is not None else int(rng.integers(1, len(dirs) + 1))
    chosen = sorted(rng.choice(len(dirs), size=min(k, len(dirs)), replace=False).tolist())
    factors = [(dirs[i], random_pmf(q, rng, spread)) for i in chosen]
    return factors_product(q, n, factors), factors
