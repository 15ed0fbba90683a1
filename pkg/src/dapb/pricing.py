"""Interference prices, leakage matrices and who hears which price."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cxlinalg import EigenDecomposition, eig_hermitian
from .metrics import LN2, BeamState
from .scenario import NetworkScenario

__all__ = [
    "PriceSet",
    "LeakageMatrix",
    "compute_prices",
    "price",
    "leakage",
    "pricing_cost",
]


@dataclass
class PriceSet:
    """Prices at every receiver and the feedback mask that routes them.

    ``feedback[k, j]`` is True when receiver ``j`` reports to transmitter
    ``k``; the diagonal is the IPNP report to a user's own transmitter.
    """

    prices: np.ndarray
    feedback: np.ndarray

    @property
    def feedback_counts(self) -> np.ndarray:
        """``N_k``: number of receivers reporting to each transmitter."""
        return self.feedback.sum(axis=1)


@dataclass
class LeakageMatrix:
    matrix: np.ndarray
    rank: int
    decomposition: EigenDecomposition


def _as_state(scenario, beams) -> BeamState:
    return beams if isinstance(beams, BeamState) else BeamState(scenario, beams)


def compute_prices(scenario: NetworkScenario, beams, regime: str = "full") -> PriceSet:
    """Price every receiver at the current beams.

    ``pi_j = alpha_j S_j / (ln 2 * P_{j,T} (1 + eta_j) (sigma_j^2 + I_j)^2)``,
    the negative derivative of ``alpha_j U_j`` with respect to ``I_j``.
    The power budget ``P_{j,T}`` uses the backhaul of ``regime``.
    """
    state = _as_state(scenario, beams)
    signal = state.signal
    ipnp = state.ipnp
    ptot = scenario.amp_inefficiency * state.beam_power + scenario.static_power(regime)
    # (1 + eta) * ipnp^2 == (ipnp + S) * ipnp
    with np.errstate(divide="ignore", invalid="ignore"):
        prices = scenario.weights * signal / (LN2 * ptot * (ipnp + signal) * ipnp)
    prices = np.where(signal > 0.0, prices, 0.0)
    return PriceSet(prices, scenario.feedback_mask(regime))


def price(scenario: NetworkScenario, beams, regime: str, j: int) -> float:
    return float(compute_prices(scenario, beams, regime).prices[j])


def leakage(scenario: NetworkScenario, prices: PriceSet, k: int) -> LeakageMatrix:
    """``L_k = sum over reporting j != k of pi_j h_{k,j} h_{k,j}^H``."""
    coef = np.where(prices.feedback[k], prices.prices, 0.0)
    coef[k] = 0.0
    hk = scenario.channels[k]  # rows h_{k,j}
    nz = coef > 0.0
    if not np.any(nz):
        M = scenario.num_antennas
        zero = np.zeros((M, M), dtype=np.complex128)
        return LeakageMatrix(zero, 0, EigenDecomposition(np.zeros(M), np.eye(M, dtype=np.complex128)))
    h = hk[nz]
    mat = (h.T * coef[nz]) @ h.conj()
    mat = 0.5 * (mat + mat.conj().T)
    decomp = eig_hermitian(mat)
    return LeakageMatrix(mat, decomp.rank, decomp)


def pricing_cost(leak, w) -> float:
    """Quadratic-form price ``w^H L w`` paid for the interference caused by ``w``."""
    mat = leak.matrix if isinstance(leak, LeakageMatrix) else np.asarray(leak)
    w = np.asarray(w, dtype=np.complex128)
    return float(np.vdot(w, mat @ w).real)
