"""Conditional independence, Markov blankets and MRF graphs from the canonical factorization.

Two variables are conditionally independent given the rest exactly when no
non-trivial SPC factor involves both of them.  A brute-force check of the
defining product identity is provided as an oracle, together with the
Hammersley-Clifford construction for comparison (it depends on a base
configuration and is therefore not unique).

Variable indices are 0-based throughout.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .galois import all_configs
from .joint import CanonicalFactorization, JointPmf, canonical_factorization
from .pmf import THETA_TOL, norm

CI_TOL = 1e-9
MAX_HC_N = 12


def _check_pair(p: JointPmf, k: int, l: int):
    if k == l:
        raise ValueError("need two distinct variables")
    for i in (k, l):
        if not 0 <= i < p.n:
            raise IndexError(f"variable {i} out of range for n = {p.n}")


def _factorization(p: JointPmf, f: CanonicalFactorization | None) -> CanonicalFactorization:
    return canonical_factorization(p) if f is None else f


def ci_from_canonical(p: JointPmf, k: int, l: int, f: CanonicalFactorization | None = None, tol: float = THETA_TOL) -> bool:
    """X_k ⊥ X_l | rest, read off the canonical factorization."""
    _check_pair(p, k, l)
    for fac in _factorization(p, f).factors:
        if fac.direction[k] and fac.direction[l] and norm(fac.component) > tol:
            return False
    return True


def ci_brute(p: JointPmf, k: int, l: int, tol: float = CI_TOL) -> bool:
    """Check p(x)·Pr{x_rest} = Pr{x_∖k}·Pr{x_∖l} at every configuration.

    Evaluated in the log domain; ``tol`` bounds the absolute difference of the
    two sides relative to p(x)·Pr{x_rest}.
    """
    _check_pair(p, k, l)
    lt = p.logp.reshape((p.q,) * p.n)
    no_k = logsumexp(lt, axis=k, keepdims=True)
    no_l = logsumexp(lt, axis=l, keepdims=True)
    no_kl = logsumexp(no_k, axis=l, keepdims=True)
    lhs = lt + no_kl
    rhs = no_k + no_l
    return bool(np.max(np.abs(np.expm1(rhs - lhs))) < tol)


def markov_blanket(p: JointPmf, i: int, f: CanonicalFactorization | None = None, tol: float = THETA_TOL) -> set[int]:
    """Indices j sharing a non-θ factor with i."""
    if not 0 <= i < p.n:
        raise IndexError(f"variable {i} out of range for n = {p.n}")
    out = set()
    for fac in _factorization(p, f).factors:
        if fac.direction[i] and norm(fac.component) > tol:
            out.update(j for j, v in enumerate(fac.direction) if v and j != i)
    return out


def markov_blanket_brute(p: JointPmf, i: int, tol: float = CI_TOL) -> set[int]:
    return {j for j in range(p.n) if j != i and not ci_brute(p, i, j, tol)}


@dataclass(frozen=True)
class MrfGraph:
    n: int
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=bool)
        if a.shape != (self.n, self.n) or not np.array_equal(a, a.T) or a.diagonal().any():
            raise ValueError("adjacency must be symmetric with an empty diagonal")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.adjacency[i, j]]

    def to_dot(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names else [f"x{i}" for i in range(self.n)]
        lines = ["graph G {"]
        lines += [f"  {names[i]};" for i in range(self.n)]
        lines += [f"  {names[i]} -- {names[j]};" for i, j in self.edges()]
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"n": self.n, "adjacency": self.adjacency.astype(int).tolist(), "edges": [list(e) for e in self.edges()]}


def mrf_graph(p: JointPmf, f: CanonicalFactorization | None = None, tol: float = THETA_TOL) -> MrfGraph:
    f = _factorization(p, f)
    adj = np.zeros((p.n, p.n), dtype=bool)
    for i in range(p.n):
        for j in markov_blanket(p, i, f, tol):
            adj[i, j] = adj[j, i] = True
    return MrfGraph(p.n, adj)


# ---------------------------------------------------------------------------
# Hammersley-Clifford construction
# ---------------------------------------------------------------------------


def _mask_bits(mask: int, n: int) -> tuple[int, ...]:
    return tuple(j for j in range(n) if mask >> j & 1)


@dataclass(frozen=True)
class HcFactorization:
    """φ_D tables keyed by the dependency mask (bit j set means x_j is kept).

    ``log_tables[mask]`` has shape (q,)*|D| over the kept coordinates in
    increasing order.
    """

    q: int
    n: int
    base: tuple
    log_tables: dict = field(repr=False)

    def reconstruct(self) -> JointPmf:
        x = all_configs(self.q, self.n)
        acc = np.zeros(len(x))
        for mask, table in self.log_tables.items():
            bits = _mask_bits(mask, self.n)
            if bits:
                acc += table[tuple(x[:, bits].T)]
            else:
                acc += float(table)
        return JointPmf._from_log(acc, self.q, self.n)

    def nontrivial(self, tol: float = 1e-12) -> list[tuple[int, ...]]:
        """Masks whose factor is not constant."""
        out = []
        for mask, table in self.log_tables.items():
            t = np.asarray(table)
            if t.size > 1 and np.ptp(t) > tol:
                out.append(_mask_bits(mask, self.n))
        return out

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "base": list(self.base),
            "factors": [
                {"vars": list(_mask_bits(m, self.n)), "log_table": np.asarray(t).ravel().tolist()}
                for m, t in sorted(self.log_tables.items())
            ],
        }


def hammersley_clifford(p: JointPmf, base: Sequence[int]) -> HcFactorization:
    """φ_D(x) = Π_{D' ⊆ D} p(x_{D'}, base_{rest})^{(−1)^{|D−D'|}}.

    |D − D'| is the Hamming weight of the mask difference.  By Möbius
    inversion the product of all φ_D equals p exactly (the constant is 1).
    """
    q, n = p.q, p.n
    if n > MAX_HC_N:
        raise ValueError(f"n = {n} exceeds the enumeration limit {MAX_HC_N}")
    base = tuple(int(v) % q for v in base)
    if len(base) != n:
        raise ValueError("base configuration has the wrong length")
    lt = p.logp.reshape((q,) * n)
    # g[D'] as a function of x_{D'}: log p with the other coordinates at base.
    g = {}
    for mask in range(1 << n):
        bits = _mask_bits(mask, n)
        index = tuple(slice(None) if j in bits else base[j] for j in range(n))
        g[mask] = np.asarray(lt[index])
    tables = {}
    for mask in range(1 << n):
        bits = _mask_bits(mask, n)
        acc = np.zeros((q,) * len(bits))
        for sub_bits_len in range(len(bits) + 1):
            for sub in itertools.combinations(bits, sub_bits_len):
                sub_mask = sum(1 << j for j in sub)
                sign = -1.0 if (len(bits) - len(sub)) % 2 else 1.0
                # broadcast g[sub] (axes = sub) over axes = bits
                shape = [q if j in sub else 1 for j in bits]
                acc = acc + sign * np.reshape(g[sub_mask], shape)
        tables[mask] = acc
    return HcFactorization(q, n, base, tables)


def graph_to_json(g: MrfGraph) -> str:
    return json.dumps(g.to_json())
