"""Distributed pricing-based beamforming for weighted-sum energy efficiency.

The package simulates K single-antenna receivers served by K multi-antenna
transmitters over an interference channel and compares a distributed
pricing scheme with a noncooperative baseline and a centralized gradient
method.
"""
from .estimators import (
    CentralizedBeamformer,
    DAPBBeamformer,
    NoncooperativeBeamformer,
    make_beamformer,
)
from .exceptions import ConfigError, GenerationError, RankError, ValidationError
from .harness import Campaign, ResultRow, export, run_campaign
from .metrics import BeamState, wsee
from .orchestrators import RunReport, init_beams, run_centralized, run_dapb, run_noncooperative
from .scenario import NetworkScenario, SimConfig, generate

__version__ = "0.1.0"

__all__ = [
    "BeamState",
    "Campaign",
    "CentralizedBeamformer",
    "ConfigError",
    "DAPBBeamformer",
    "GenerationError",
    "NetworkScenario",
    "NoncooperativeBeamformer",
    "RankError",
    "ResultRow",
    "RunReport",
    "SimConfig",
    "ValidationError",
    "export",
    "generate",
    "init_beams",
    "make_beamformer",
    "run_campaign",
    "run_centralized",
    "run_dapb",
    "run_noncooperative",
    "wsee",
]
