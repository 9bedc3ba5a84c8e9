"""MISO, PAM and MIMO detection through the decoder bridge, plus the BER simulator."""

from __future__ import annotations

from .detectors import METHODS, DetectionBatch, DetectorConfig, detect_batch, detect_mimo
from .mimo import (
    MimoProblem,
    etb_construction,
    h_mimo_qpsk,
    mimo_app,
    mimo_factorize,
    mimo_inputs,
    mimo_reconstruct,
    permutation_set,
    random_mimo,
    standard_permutation,
    tb_construction,
    tb_inputs,
)
from .miso import MisoProblem, h_qpsk, miso_app, miso_factorize, miso_inputs, miso_reconstruct
from .pam import (
    gray_to_natural_rowops,
    h_gray,
    pam_app,
    pam_inputs_gray,
    pam_inputs_gray_on_natural_code,
    pam_inputs_natural,
)
from .sim import BerPoint, SimConfig, ber_csv, simulate_ber
from .trellis import TailBitingTrellis, bcjr_batch, tb_bcjr_iterative, tb_trellis_build

__all__ = [
    "METHODS",
    "DetectionBatch",
    "DetectorConfig",
    "detect_batch",
    "detect_mimo",
    "MimoProblem",
    "etb_construction",
    "h_mimo_qpsk",
    "mimo_app",
    "mimo_factorize",
    "mimo_inputs",
    "mimo_reconstruct",
    "permutation_set",
    "random_mimo",
    "standard_permutation",
    "tb_construction",
    "tb_inputs",
    "MisoProblem",
    "h_qpsk",
    "miso_app",
    "miso_factorize",
    "miso_inputs",
    "miso_reconstruct",
    "gray_to_natural_rowops",
    "h_gray",
    "pam_app",
    "pam_inputs_gray",
    "pam_inputs_gray_on_natural_code",
    "pam_inputs_natural",
    "BerPoint",
    "SimConfig",
    "ber_csv",
    "simulate_ber",
    "TailBitingTrellis",
    "bcjr_batch",
    "tb_bcjr_iterative",
    "tb_trellis_build",
]
