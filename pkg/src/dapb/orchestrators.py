"""End-to-end beamforming algorithms.

* :func:`run_dapb` - sequential pricing best response with acceptance
  gating, over full or distance-limited price exchange.
* :func:`run_noncooperative` - the same loop with prices switched off.
* :func:`run_centralized` - projected gradient ascent on the weighted sum
  EE with an Armijo step.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .metrics import LN2, BeamState, wsee
from .peruser import penalized_utility, solve_peruser
from .pricing import LeakageMatrix, compute_prices, leakage
from .scenario import NetworkScenario

__all__ = [
    "RunReport",
    "ArmijoParams",
    "init_beams",
    "run_dapb",
    "run_noncooperative",
    "run_centralized",
    "centralized_gradient",
    "project_beams",
    "overhead_dapb",
    "overhead_limited",
    "overhead_noncoop",
    "overhead_centralized",
    "GRADIENT_MODES",
]

log = logging.getLogger(__name__)

GRADIENT_MODES = ("exact", "printed", "clean")


@dataclass
class RunReport:
    """Outcome of one algorithm run.

    ``wsee_trace[0]`` is the objective at the initial beams and entry
    ``n`` the objective after outer iteration ``n``.
    """

    algorithm: str
    wsee_trace: list[float]
    final_beams: np.ndarray
    iterations: int
    overhead_scalars: int
    wallclock_ms: float
    converged: bool
    per_user_ee: np.ndarray
    diagnostics: list[str] = field(default_factory=list)

    @property
    def wsee(self) -> float:
        return self.wsee_trace[-1]


@dataclass(frozen=True)
class ArmijoParams:
    """Step-size rule for the centralized ascent.

    ``sufficient_increase`` is the fraction of the linearised gain that an
    accepted step must realise and ``backtrack`` the factor the step is
    multiplied by on each rejection.
    """

    sufficient_increase: float = 0.3
    backtrack: float = 0.5
    initial_step: float = 1.0
    tolerance: float = 1e-5
    max_iters: int = 1000
    max_backtracks: int = 60

    def __post_init__(self):
        if not 0.0 < self.sufficient_increase < 1.0:
            raise ValueError("sufficient_increase must lie in (0, 1)")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.initial_step <= 0 or self.tolerance <= 0 or self.max_iters < 1:
            raise ValueError("initial_step, tolerance and max_iters must be positive")


def overhead_dapb(iterations: int, num_pairs: int) -> int:
    return int(iterations) * int(num_pairs) ** 2


def overhead_limited(iterations: int, feedback_counts) -> int:
    return int(iterations) * int(np.sum(feedback_counts))


def overhead_noncoop(iterations: int, num_pairs: int) -> int:
    return int(iterations) * int(num_pairs)


def overhead_centralized(num_pairs: int, num_antennas: int) -> int:
    K, M = int(num_pairs), int(num_antennas)
    return 2 * K * K * M + 2 * K * M


def init_beams(scenario: NetworkScenario) -> BeamState:
    """Matched-filter directions with powers drawn uniformly on ``[0, P_k]``."""
    rng = np.random.default_rng(scenario.init_seed)
    frac = rng.uniform(0.0, 1.0, size=scenario.num_pairs)
    h = scenario.direct_channels
    norms = np.linalg.norm(h, axis=1, keepdims=True)
    dirs = np.divide(h, norms, out=np.zeros_like(h), where=norms > 0)
    return BeamState(scenario, np.sqrt(frac * scenario.pmax_w)[:, None] * dirs)


def _initial_state(scenario, init) -> BeamState:
    if init is None:
        return init_beams(scenario)
    if isinstance(init, BeamState):
        return init.copy()
    return BeamState(scenario, init)


def _relative_change(new: float, old: float) -> float:
    if old == 0.0:
        return 0.0 if new == 0.0 else math.inf
    return abs(new - old) / abs(old)


def _zero_leakage(M: int) -> LeakageMatrix:
    from .cxlinalg import EigenDecomposition

    return LeakageMatrix(
        np.zeros((M, M), dtype=np.complex128),
        0,
        EigenDecomposition(np.zeros(M), np.eye(M, dtype=np.complex128)),
    )


def _best_response_loop(scenario, state, regime, priced, tol, max_iters):
    """Sequential sweeps shared by the DAPB and noncooperative runs."""
    K, M = scenario.num_pairs, scenario.num_antennas
    trace = [wsee(scenario, state, regime).wsee]
    zero = _zero_leakage(M)
    converged = False
    n = 0
    for n in range(1, max_iters + 1):
        for k in range(K):
            if priced:
                prices = compute_prices(scenario, state, regime)
                leak = leakage(scenario, prices, k)
            else:
                leak = zero
            cand = solve_peruser(scenario, state, leak, k, regime)
            new = penalized_utility(scenario, state, leak, k, cand, regime)
            old = penalized_utility(scenario, state, leak, k, state.beams[k], regime)
            if new >= old:
                state.update(k, cand)
        state.refresh()
        trace.append(wsee(scenario, state, regime).wsee)
        if _relative_change(trace[-1], trace[-2]) < tol:
            converged = True
            break
    return trace, n, converged


def run_dapb(
    scenario: NetworkScenario,
    regime: str = "full",
    init=None,
    tol: float = 1e-3,
    max_iters: int = 100,
) -> RunReport:
    """Distributed adaptive pricing beamforming.

    Each outer iteration visits users ``1..K`` in order.  Before user
    ``k`` moves, every receiver prices its interference at the current
    beams; prices reach transmitter ``k`` over all links (``"full"``) or
    only from receivers within ``dth_m`` (``"limited"``).  The candidate
    beam replaces the old one only if it does not lower the priced
    objective.  Stops when the relative change of the weighted sum EE
    drops below ``tol``.
    """
    if regime not in ("full", "limited"):
        raise ValueError(f"DAPB regime must be 'full' or 'limited', got {regime!r}")
    t0 = time.perf_counter()
    state = _initial_state(scenario, init)
    trace, n, converged = _best_response_loop(scenario, state, regime, True, tol, max_iters)
    if regime == "full":
        overhead = overhead_dapb(n, scenario.num_pairs)
    else:
        overhead = overhead_limited(n, scenario.feedback_mask("limited").sum(axis=1))
    report = wsee(scenario, state, regime)
    return RunReport(
        algorithm="dapb" if regime == "full" else "limited-dapb",
        wsee_trace=trace,
        final_beams=state.beams.copy(),
        iterations=n,
        overhead_scalars=overhead,
        wallclock_ms=(time.perf_counter() - t0) * 1e3,
        converged=converged,
        per_user_ee=report.ee,
    )


def run_noncooperative(
    scenario: NetworkScenario, init=None, tol: float = 1e-3, max_iters: int = 100
) -> RunReport:
    """Selfish best response: every user maximises its own EE, no prices.

    A candidate that lowers the user's own EE is rejected.  Nothing
    guarantees monotonicity of the weighted sum, so the trace is reported
    as it comes.
    """
    t0 = time.perf_counter()
    state = _initial_state(scenario, init)
    trace, n, converged = _best_response_loop(scenario, state, "noncoop", False, tol, max_iters)
    report = wsee(scenario, state, "noncoop")
    return RunReport(
        algorithm="noncoop",
        wsee_trace=trace,
        final_beams=state.beams.copy(),
        iterations=n,
        overhead_scalars=overhead_noncoop(n, scenario.num_pairs),
        wallclock_ms=(time.perf_counter() - t0) * 1e3,
        converged=converged,
        per_user_ee=report.ee,
    )


def centralized_gradient(
    scenario: NetworkScenario, beams, regime: str = "full", mode: str = "exact"
) -> np.ndarray:
    """Gradient of the weighted sum EE with respect to ``conj(w_k)``, all users.

    The real-coordinate gradient (real and imaginary parts as separate
    variables) is twice this array.

    Modes
    -----
    ``"exact"``
        Own-user term ``alpha_k/ln2 * (P_T h h^H w - rho ln(1+eta) (N + S) w)
        / (P_T^2 (N + S))`` minus ``L_k w_k`` built from the prices of all
        other receivers.  This is the true gradient.
    ``"printed"``
        Published closed form, kept for comparison: as ``"exact"`` but with ``N`` in place of
        ``N + S`` in the second numerator term.
    ``"clean"``
        ``"printed"`` without the ``- L_k w_k`` term.
    """
    if mode not in GRADIENT_MODES:
        raise ValueError(f"unknown gradient mode {mode!r}; expected one of {GRADIENT_MODES}")
    state = beams if isinstance(beams, BeamState) else BeamState(scenario, beams)
    w = state.beams
    h = scenario.direct_channels
    signal = state.signal
    ipnp = state.ipnp
    rho = scenario.amp_inefficiency
    ptot = rho * state.beam_power + scenario.static_power(regime)
    hw = np.einsum("km,km->k", h.conj(), w)  # h^H w
    log_term = np.log1p(signal / ipnp)
    second = ipnp + signal if mode == "exact" else ipnp
    num = ptot[:, None] * h * hw[:, None] - (rho * log_term * second)[:, None] * w
    grad = (scenario.weights / LN2)[:, None] * num / (ptot**2 * (ipnp + signal))[:, None]
    if mode == "clean":
        return grad
    prices = compute_prices(scenario, state, regime).prices
    coef = np.broadcast_to(prices, (scenario.num_pairs,) * 2).copy()
    np.fill_diagonal(coef, 0.0)
    # L_k w_k = sum_j pi_j h_{k,j} (h_{k,j}^H w_k)
    cross = np.einsum("kjm,km->kj", scenario.channels.conj(), w)
    leak_w = np.einsum("kj,kjm->km", coef * cross, scenario.channels)
    return grad - leak_w


def project_beams(beams, pmax) -> np.ndarray:
    """Scale every beam whose power exceeds its cap back onto the cap sphere."""
    w = np.array(beams, dtype=np.complex128)
    pw = (w.real**2 + w.imag**2).sum(axis=1)
    over = pw > pmax
    w[over] *= np.sqrt(pmax[over] / pw[over])[:, None]
    return w


def run_centralized(
    scenario: NetworkScenario,
    init=None,
    params: ArmijoParams | None = None,
    gradient_mode: str = "exact",
    regime: str = "full",
) -> RunReport:
    """Projected gradient ascent with the Armijo rule.

    Each iteration takes ``W_bar = Proj(W + s g)`` and moves to
    ``W + kappa (W_bar - W)`` with ``kappa = backtrack^m`` for the first
    ``m`` whose gain is at least ``sufficient_increase * kappa *
    Re sum_k g_k^H (w_bar_k - w_k)``.  If no ``m`` up to
    ``max_backtracks`` qualifies the run stops at the current point.
    """
    params = params or ArmijoParams()
    t0 = time.perf_counter()
    w = _initial_state(scenario, init).beams.copy()
    value = wsee(scenario, w, regime).wsee
    trace = [value]
    diagnostics: list[str] = []
    converged = False
    n = 0
    for n in range(1, params.max_iters + 1):
        g = centralized_gradient(scenario, w, regime, gradient_mode)
        direction = project_beams(w + params.initial_step * g, scenario.pmax_w) - w
        slope = float(np.vdot(g, direction).real)
        kappa = 1.0
        for _ in range(params.max_backtracks + 1):
            trial = w + kappa * direction
            trial_value = wsee(scenario, trial, regime).wsee
            if trial_value - value >= params.sufficient_increase * kappa * slope:
                break
            kappa *= params.backtrack
        else:
            diagnostics.append(f"armijo failure at iteration {n}")
            log.debug("armijo backtracking exhausted at iteration %d", n)
            n -= 1
            break
        change = _relative_change(trial_value, value)
        w, value = trial, trial_value
        trace.append(value)
        if change < params.tolerance:
            converged = True
            break
    report = wsee(scenario, w, regime)
    return RunReport(
        algorithm="centralized",
        wsee_trace=trace,
        final_beams=w,
        iterations=n,
        overhead_scalars=overhead_centralized(scenario.num_pairs, scenario.num_antennas),
        wallclock_ms=(time.perf_counter() - t0) * 1e3,
        converged=converged,
        per_user_ee=report.ee,
        diagnostics=diagnostics,
    )
