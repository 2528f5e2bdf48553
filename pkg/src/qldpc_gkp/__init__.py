"""Circuit-level simulation and soft-information BP-OSD decoding of GKP-concatenated QLDPC codes."""

from __future__ import annotations

from .codes import CssCode, CssValidationError, bb144, hypergraph_product, lifted_product, repetition_code, tanner_lifted_product
from .decoder import BpOsdDecoder, DecodeResult, bp_decode, osd_postprocess
from .detector_model import CircuitCheckMatrix, LlrMode, build_circuit_check_matrix, init_llrs
from .experiment import ExperimentConfig, FaultSample, FerEstimate, TrialOutcome, run_experiment, run_trial, sample_faults
from .gkp import GkpParams, Mechanism
from .io import load_bundle

__version__ = "0.1.0"

__all__ = [
    "BpOsdDecoder", "CircuitCheckMatrix", "CssCode", "CssValidationError", "DecodeResult", "ExperimentConfig",
    "FaultSample", "FerEstimate", "GkpParams", "LlrMode", "Mechanism", "TrialOutcome", "bb144", "bp_decode",
    "build_circuit_check_matrix", "hypergraph_product", "init_llrs", "lifted_product", "load_bundle",
    "osd_postprocess", "repetition_code", "run_experiment", "run_trial", "sample_faults", "tanner_lifted_product",
]
