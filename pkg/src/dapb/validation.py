"""Input checks shared by the estimators and the harness."""
from __future__ import annotations

import numpy as np

from .exceptions import ValidationError
from .scenario import NetworkScenario

__all__ = ["check_scenario", "check_beams", "check_regime"]

FEASIBILITY_SLACK = 1e-9


def check_scenario(scenario) -> NetworkScenario:
    """Validate shapes, finiteness and positivity of a scenario; return it unchanged."""
    if not isinstance(scenario, NetworkScenario):
        raise ValidationError(f"expected a NetworkScenario, got {type(scenario).__name__}")
    ch = scenario.channels
    if ch.ndim != 3 or ch.shape[0] != ch.shape[1] or ch.shape[2] < 1:
        raise ValidationError(f"channels must have shape (K, K, M), got {ch.shape}")
    if not np.all(np.isfinite(ch)):
        raise ValidationError("channels contain non-finite values")
    K = ch.shape[0]
    for name in ("noise_power", "pmax_w", "circuit_tx", "circuit_rx", "weights",
                 "backhaul_full_w", "backhaul_limited_w", "backhaul_noncoop_w"):
        arr = np.asarray(getattr(scenario, name))
        if arr.shape != (K,):
            raise ValidationError(f"{name} must have shape ({K},), got {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValidationError(f"{name} must be finite and nonnegative")
    if np.any(scenario.noise_power <= 0):
        raise ValidationError("noise_power must be strictly positive")
    if scenario.amp_inefficiency < 1:
        raise ValidationError("amp_inefficiency must be >= 1")
    return scenario


def check_beams(scenario: NetworkScenario, beams) -> np.ndarray:
    """Return ``beams`` as a ``(K, M)`` complex array, checking shape and power caps."""
    w = np.asarray(beams, dtype=np.complex128)
    shape = (scenario.num_pairs, scenario.num_antennas)
    if w.shape != shape:
        raise ValidationError(f"beams must have shape {shape}, got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("beams contain non-finite values")
    power = (w.real**2 + w.imag**2).sum(axis=1)
    if np.any(power > scenario.pmax_w + FEASIBILITY_SLACK):
        raise ValidationError("beams exceed the per-transmitter power cap")
    return w


def check_regime(regime: str, allowed=("full", "limited", "noncoop")) -> str:
    if regime not in allowed:
        raise ValidationError(f"regime must be one of {allowed}, got {regime!r}")
    return regime
