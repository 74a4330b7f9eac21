"""Chaos-coded modulation over nonlinear DCO-OFDM visible light links."""

from ._ccmvlc import (
    BerPoint,
    BussgangStats,
    CcmParams,
    ConfigError,
    ConjugationTable,
    ConstraintViolation,
    Error,
    LedTransfer,
    bound,
    characterize,
    encode_block,
    enumerate_loops,
    optimize,
    perturbed_recursion_step,
    required_ebn0,
    simulate,
    tcm_round_trip,
)

__all__ = [
    "BerPoint",
    "BussgangStats",
    "CcmParams",
    "ConfigError",
    "ConjugationTable",
    "ConstraintViolation",
    "Error",
    "LedTransfer",
    "bound",
    "characterize",
    "encode_block",
    "enumerate_loops",
    "optimize",
    "perturbed_recursion_step",
    "required_ebn0",
    "simulate",
    "tcm_round_trip",
]
