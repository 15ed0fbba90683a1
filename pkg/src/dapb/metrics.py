"""Physical-layer objective: interference, SINR, rate, power, EE and WS-EE.

Beams are a ``(K, M)`` complex array, row ``k`` being ``w_k``.  Every
function accepts either such an array or a :class:`BeamState`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import NetworkScenario

__all__ = [
    "BeamState",
    "UtilityReport",
    "link_gains",
    "interference",
    "sinr",
    "total_power",
    "wsee",
    "utility_report",
]

LN2 = np.log(2.0)


def link_gains(scenario: NetworkScenario, beams) -> np.ndarray:
    """``G[j, k] = |h_{j,k}^H w_j|^2``, received power at ``k`` from transmitter ``j``."""
    w = _as_beams(beams)
    amp = np.einsum("jkm,jm->jk", scenario.channels.conj(), w)
    return amp.real**2 + amp.imag**2


def _as_beams(beams) -> np.ndarray:
    if isinstance(beams, BeamState):
        return beams.beams
    return np.asarray(beams, dtype=np.complex128)


class BeamState:
    """Beam-vectors of all users plus cached link gains and interference.

    Single-beam updates refresh one row of the gain matrix and patch the
    interference vector by the difference; :meth:`refresh` recomputes
    both from scratch to clear accumulated rounding.
    """

    def __init__(self, scenario: NetworkScenario, beams):
        self.scenario = scenario
        w = np.array(beams, dtype=np.complex128)
        K, M = scenario.num_pairs, scenario.num_antennas
        if w.shape != (K, M):
            raise ValueError(f"beams must have shape {(K, M)}, got {w.shape}")
        self.beams = w
        self.refresh()

    def refresh(self):
        self.gains = link_gains(self.scenario, self.beams)
        self.interference = self.gains.sum(axis=0) - np.diag(self.gains)

    def copy(self) -> "BeamState":
        new = object.__new__(BeamState)
        new.scenario = self.scenario
        new.beams = self.beams.copy()
        new.gains = self.gains.copy()
        new.interference = self.interference.copy()
        return new

    def update(self, k: int, w):
        """Replace ``w_k`` and patch the cached interference at every other receiver."""
        w = np.asarray(w, dtype=np.complex128)
        amp = self.scenario.channels[k].conj() @ w
        row = amp.real**2 + amp.imag**2
        delta = row - self.gains[k]
        delta[k] = 0.0
        self.interference += delta
        np.maximum(self.interference, 0.0, out=self.interference)
        self.gains[k] = row
        self.beams[k] = w

    @property
    def signal(self) -> np.ndarray:
        return np.diag(self.gains).copy()

    @property
    def beam_power(self) -> np.ndarray:
        b = self.beams
        return (b.real**2 + b.imag**2).sum(axis=1)

    @property
    def ipnp(self) -> np.ndarray:
        """Interference-plus-noise power at every receiver."""
        return self.scenario.noise_power + self.interference


@dataclass
class UtilityReport:
    """Per-user SINR, rate (bit/s/Hz), total power (W), EE (bit/Hz/J) and the weighted sum."""

    sinr: np.ndarray
    rate: np.ndarray
    total_power: np.ndarray
    ee: np.ndarray
    wsee: float


def interference(scenario: NetworkScenario, beams, k: int) -> float:
    g = link_gains(scenario, beams)[:, k]
    return float(g.sum() - g[k])


def sinr(scenario: NetworkScenario, beams, k: int) -> float:
    g = link_gains(scenario, beams)[:, k]
    return float(g[k] / (scenario.noise_power[k] + g.sum() - g[k]))


def total_power(scenario: NetworkScenario, beams, k: int, regime: str = "full") -> float:
    w = _as_beams(beams)[k]
    rf = scenario.amp_inefficiency * float(np.vdot(w, w).real)
    return rf + float(scenario.static_power(regime)[k])


def utility_report(scenario, signal, ipnp, beam_power, regime: str) -> UtilityReport:
    eta = signal / ipnp
    rate = np.log2(1.0 + eta)
    ptot = scenario.amp_inefficiency * beam_power + scenario.static_power(regime)
    ee = rate / ptot
    return UtilityReport(eta, rate, ptot, ee, float(np.dot(scenario.weights, ee)))


def wsee(scenario: NetworkScenario, beams, regime: str = "full") -> UtilityReport:
    """Evaluate all per-user quantities and the weighted sum EE for ``beams``."""
    if isinstance(beams, BeamState):
        return utility_report(scenario, beams.signal, beams.ipnp, beams.beam_power, regime)
    w = _as_beams(beams)
    g = link_gains(scenario, w)
    signal = np.diag(g).copy()
    ipnp = scenario.noise_power + g.sum(axis=0) - signal
    return utility_report(scenario, signal, ipnp, (w.real**2 + w.imag**2).sum(axis=1), regime)
