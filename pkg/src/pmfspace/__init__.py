"""Probability mass functions as vectors: GF(q) algebra, canonical factorization,
Markov structure and inference through channel decoders."""

from __future__ import annotations

from .errors import (
    DetectionFailure,
    DimensionMismatch,
    DivisionByZero,
    NonPositiveMass,
    NotTailBiting,
    PmfSpaceError,
    SingularMatrix,
    ZeroDirection,
)
from .galois import FMat, PrimeField, parity_direction_set
from .joint import CanonicalFactorization, JointPmf, SpcFactor, canonical_factorization, reconstruct
from .pmf import Pmf, boxminus, boxplus, boxtimes, distance, inner_product, llr, log_map, log_unmap, normalize
from .markov import ci_brute, ci_from_canonical, hammersley_clifford, mrf_graph
from .bridge import CodeSpec, build_substitute, ml_codeword_decode, symbolwise_decode

__all__ = [
    "DetectionFailure",
    "DimensionMismatch",
    "DivisionByZero",
    "NonPositiveMass",
    "NotTailBiting",
    "PmfSpaceError",
    "SingularMatrix",
    "ZeroDirection",
    "FMat",
    "PrimeField",
    "parity_direction_set",
    "CanonicalFactorization",
    "JointPmf",
    "SpcFactor",
    "canonical_factorization",
    "reconstruct",
    "Pmf",
    "boxminus",
    "boxplus",
    "boxtimes",
    "distance",
    "inner_product",
    "llr",
    "log_map",
    "log_unmap",
    "normalize",
    "ci_brute",
    "ci_from_canonical",
    "hammersley_clifford",
    "mrf_graph",
    "CodeSpec",
    "build_substitute",
    "ml_codeword_decode",
    "symbolwise_decode",
]

__version__ = "0.1.0"
