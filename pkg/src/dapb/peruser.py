"""Closed-form per-transmitter beam update.

Each transmitter maximises its own weighted EE minus the price of the
interference it leaks.  When its leakage matrix is invertible the beam is
whitened by ``L^{-1/2}`` and only a scalar power remains (Scenario 1).
Otherwise the beam is split into a component in the range of ``L`` and
one in its null space and a two-variable power problem is solved by
enumerating its KKT points (Scenario 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cxlinalg import inv_sqrt, project_onto_range
from .metrics import LN2, BeamState
from .pricing import LeakageMatrix, pricing_cost
from .scenario import NetworkScenario

__all__ = [
    "lambert_w0",
    "Scenario1Coefficients",
    "Scenario2Coefficients",
    "PowerSplit",
    "solve_scenario1",
    "solve_scenario2",
    "kkt_candidates",
    "selfish_ee_power",
    "solve_peruser",
    "reduce_problem",
    "penalized_utility",
    "BISECTION_TOL",
]

BISECTION_TOL = 1e-8
DEGENERATE_PROJECTION = 1e-10
TIE_TOL = 1e-12

# 1/e split into a double and its rounding error
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration started from a branch-point series near ``-1/e``,
    ``log1p(x)`` for moderate arguments and the asymptotic
    ``log x - log log x`` for large ones.

    Raises
    ------
    ValueError
        If ``x < -1/e``.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("lambert_w0 of NaN")
    if x == math.inf:
        return math.inf
    if x == 0.0:
        return 0.0
    q = (x + _INV_E_HI) + _INV_E_LO  # distance to the branch point
    if q <= 0.0:
        if q > -4e-16:
            return -1.0
        raise ValueError(f"lambert_w0 is real only for x >= -1/e, got {x!r}")

    if q < 0.1:
        p = math.sqrt(2.0 * math.e * q)
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 1e-14 * (1.0 + abs(w)):
            break
    return max(w, -1.0)


def _bisect(func, lo: float, hi: float, decreasing: bool, xtol: float = 0.0) -> float:
    """Root of a monotone ``func`` bracketed by ``[lo, hi]``.

    Stops once the bracket is below ``xtol * min(1, hi)`` or no longer
    shrinks in floating point.
    """
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        val = func(mid)
        if (val > 0.0) == decreasing:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol * min(1.0, hi):
            break
    return 0.5 * (lo + hi)


def selfish_ee_power(gain: float, static_power: float, cap: float = math.inf) -> float:
    """Maximiser of ``ln(1 + g p) / (p + P_C)`` over ``0 <= p <= cap``.

    The stationary point solves ``(1 + g p) ln(1 + g p) = g (p + P_C)``,
    i.e. ``p = (exp(W0((g P_C - 1)/e) + 1) - 1) / g``.
    """
    if gain <= 0.0 or cap <= 0.0:
        return 0.0
    w = lambert_w0((gain * static_power - 1.0) / math.e)
    return min(math.expm1(w + 1.0) / gain, cap)


# ----------------------------------------------------------------------
# Scenario 1: scalar power after whitening
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario1Coefficients:
    """Reduced scalar problem ``max ln(1+g p)/(p+P_C) - A p`` on ``[0, cap]``.

    Attributes
    ----------
    gain : effective channel gain over the IPNP.
    price_weight : slope of the linear pricing penalty.
    power_cap : transformed power limit.
    static_power : circuit plus backhaul power in transformed units.
    """

    gain: float
    price_weight: float
    power_cap: float
    static_power: float

    def objective(self, p):
        p = np.asarray(p, dtype=float)
        return np.log1p(self.gain * p) / (p + self.static_power) - self.price_weight * p

    def numerator(self, p: float) -> float:
        """Derivative of the objective times ``(p + P_C)^2``; strictly decreasing in ``p``."""
        g, a, pc = self.gain, self.price_weight, self.static_power
        return g * (p + pc) / (1.0 + g * p) - math.log1p(g * p) - a * (p + pc) ** 2

    def derivative(self, p: float) -> float:
        return self.numerator(p) / (p + self.static_power) ** 2


def solve_scenario1(c: Scenario1Coefficients, xtol: float = BISECTION_TOL) -> float:
    """Globally optimal power of the whitened scalar problem.

    The derivative changes sign at most once, so the answer is ``0`` when
    it starts nonpositive, the cap when it ends nonnegative, and the
    bisected root otherwise.
    """
    if c.power_cap <= 0.0 or c.gain <= 0.0:
        return 0.0
    if c.numerator(0.0) <= 0.0:
        return 0.0
    if c.numerator(c.power_cap) >= 0.0:
        return float(c.power_cap)
    return _bisect(c.numerator, 0.0, float(c.power_cap), decreasing=True, xtol=xtol)


# ----------------------------------------------------------------------
# Scenario 2: two-direction power split
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario2Coefficients:
    """Power-split problem over a range direction and a null-space direction.

    ``max ln(1 + g1 p1 + g2 p2) / (p1 + p2 + P_C) - g3 p1`` subject to
    ``p1, p2 >= 0`` and ``p1 + p2 <= cap``.  ``gain_range``/``gain_null``
    are the gains of the two directions over the IPNP, ``price_weight``
    the scaled leakage of the range direction.
    """

    gain_range: float
    gain_null: float
    price_weight: float
    static_power: float
    power_cap: float
    range_direction: np.ndarray | None = field(default=None, compare=False)
    null_direction: np.ndarray | None = field(default=None, compare=False)

    def objective(self, p1, p2):
        p1 = np.asarray(p1, dtype=float)
        p2 = np.asarray(p2, dtype=float)
        num = np.log1p(self.gain_range * p1 + self.gain_null * p2)
        return num / (p1 + p2 + self.static_power) - self.price_weight * p1

    def kkt_residual(self, p1: float, p2: float):
        """Multipliers ``(alpha, beta, gamma)`` implied by the stationarity conditions.

        ``gamma`` is read off whichever gradient component belongs to a
        positive variable (zero when the power constraint is slack).
        """
        g1, g2, g3 = self.gain_range, self.gain_null, self.price_weight
        t = p1 + p2 + self.static_power
        s = 1.0 + g1 * p1 + g2 * p2
        d1 = -math.log(s) / t**2 + g1 / (t * s) - g3
        d2 = -math.log(s) / t**2 + g2 / (t * s)
        tight = p1 + p2 >= self.power_cap * (1.0 - 1e-12)
        if tight:
            gamma = d1 if p1 > 0 else d2
        else:
            gamma = 0.0
        alpha = gamma - d1
        beta = gamma - d2
        return alpha, beta, gamma


@dataclass(frozen=True)
class PowerSplit:
    """Powers on the range and null-space directions.

    ``case`` names the KKT case that produced the split; ``fallback`` is
    set when no case fired and the origin was returned.
    """

    p1: float
    p2: float
    case: str = ""
    fallback: bool = False
    objective: float = 0.0


def _f1(c: Scenario2Coefficients, x: float) -> float:
    g2 = c.gain_null
    return -(1.0 + g2 * x) * math.log1p(g2 * x) + g2 * (x + c.static_power)


def _f2(c: Scenario2Coefficients, x: float) -> float:
    g1, g3, pc = c.gain_range, c.price_weight, c.static_power
    return -(1.0 + g1 * x) * math.log1p(g1 * x) + g1 * (x + pc) - g3 * (x + pc) ** 2 * (1.0 + g1 * x)


def _f3(c: Scenario2Coefficients, theta: float) -> float:
    g1, g2, g3 = c.gain_range, c.gain_null, c.price_weight
    return math.log(theta) + g2 * g3 / (g1 - g2) * theta**2 - math.log((g1 - g2) / g3)


def kkt_candidates(c: Scenario2Coefficients) -> dict[str, tuple[float, float]]:
    """Locally optimal points of the power-split problem, keyed by case ``"1"`` .. ``"6"``.

    Cases: (1) only null direction, interior; (2) both directions,
    power constraint slack; (3) both directions, constraint tight;
    (4) null direction at full power; (5) only range direction, interior;
    (6) range direction at full power.  A case appears in the result only
    when its acceptance test holds.
    """
    g1, g2, g3 = c.gain_range, c.gain_null, c.price_weight
    pc, cap = c.static_power, c.power_cap
    out: dict[str, tuple[float, float]] = {}
    if cap <= 0.0:
        return out
    tot = cap + pc

    # Case 1
    if g2 > 0.0 and _f1(c, cap) < 0.0:
        p2 = selfish_ee_power(g2, pc)
        t = p2 + pc
        alpha = math.log1p(g2 * p2) / t**2 + g3 - g1 / (t * (1.0 + g2 * p2))
        if alpha >= 0.0:
            out["1"] = (0.0, p2)

    if g1 > g2 and g3 > 0.0:
        ratio = (g1 - g2) / g3
        # Case 2
        if tot * (1.0 + g1 * cap) > ratio > pc and _f3(c, pc) < 0.0 and _f3(c, tot) > 0.0:
            theta = _bisect(lambda t: _f3(c, t), pc, tot, decreasing=False)
            p1 = (g2 * pc + ratio / theta - 1.0 - g2 * theta) / (g1 - g2)
            p2 = theta - pc - p1
            if p1 > 0.0 and p2 > 0.0:
                out["2"] = (p1, p2)
        # Case 3
        gamma = g2 * g3 / (g1 - g2) - (math.log(g1 - g2) - math.log(g3 * tot)) / tot**2
        if gamma >= 0.0:
            p1 = 1.0 / (g3 * tot) - (1.0 + g2 * cap) / (g1 - g2)
            if 0.0 < p1 < cap:
                out["3"] = (p1, cap - p1)

    # Case 4
    gamma = g2 / (tot * (1.0 + g2 * cap)) - math.log1p(g2 * cap) / tot**2
    if gamma >= 0.0:
        alpha = g3 - (g1 - g2) / (tot * (1.0 + g2 * cap))
        if alpha >= 0.0:
            out["4"] = (0.0, cap)

    # Case 5
    if g1 > 0.0 and _f2(c, 0.0) > 0.0 and _f2(c, cap) < 0.0:
        p1 = _bisect(lambda x: _f2(c, x), 0.0, cap, decreasing=True)
        t = p1 + pc
        beta = math.log1p(g1 * p1) / t**2 - g2 / (t * (1.0 + g1 * p1))
        if beta >= 0.0:
            out["5"] = (p1, 0.0)

    # Case 6
    gamma = -math.log1p(g1 * cap) / tot**2 + g1 / (tot * (1.0 + g1 * cap)) - g3
    if gamma >= 0.0:
        beta = (g1 - g2) / (tot * (1.0 + g1 * cap)) - g3
        if beta >= 0.0:
            out["6"] = (cap, 0.0)
    return out


def solve_scenario2(c: Scenario2Coefficients) -> PowerSplit:
    """Best power split over the two beam directions.

    With ``g1 <= g2`` the range direction is never worth using and the
    null-direction EE optimum is returned directly.  Otherwise every KKT
    case is checked, the objective is evaluated at each accepted point and
    at the origin, and the best is returned (ties go to smaller ``p1``).
    """
    g1, g2 = c.gain_range, c.gain_null
    cap = max(float(c.power_cap), 0.0)
    if g1 <= g2:
        if g2 <= 0.0:
            return PowerSplit(0.0, 0.0, "origin", False, 0.0)
        p2 = selfish_ee_power(g2, c.static_power, cap)
        return PowerSplit(0.0, p2, "shortcut", False, float(c.objective(0.0, p2)))
    if c.price_weight <= 0.0:
        # unpriced range direction: same problem with the roles swapped
        p1 = selfish_ee_power(g1, c.static_power, cap)
        return PowerSplit(p1, 0.0, "shortcut", False, float(c.objective(p1, 0.0)))

    cands = kkt_candidates(c)
    best = PowerSplit(0.0, 0.0, "origin", not cands, 0.0)
    for case, (p1, p2) in sorted(cands.items(), key=lambda kv: kv[1][0]):
        p1 = min(max(p1, 0.0), cap)
        p2 = min(max(p2, 0.0), cap - p1)
        val = float(c.objective(p1, p2))
        if val > best.objective + TIE_TOL * max(1.0, abs(best.objective)):
            best = PowerSplit(p1, p2, case, False, val)
    return best


# ----------------------------------------------------------------------
# Beam assembly
# ----------------------------------------------------------------------


def penalized_utility(
    scenario: NetworkScenario, state: BeamState, leak: LeakageMatrix | None, k: int, w, regime: str
) -> float:
    """Exact per-user objective ``alpha_k U_k(w, W_-k) - w^H L_k w``.

    Interference at receiver ``k`` comes from the other users in
    ``state`` and does not depend on ``w``.
    """
    w = np.asarray(w, dtype=np.complex128)
    h = scenario.channels[k, k]
    amp = np.vdot(h, w)
    signal = amp.real**2 + amp.imag**2
    ipnp = scenario.noise_power[k] + state.interference[k]
    ptot = scenario.amp_inefficiency * float(np.vdot(w, w).real) + scenario.static_power(regime)[k]
    util = scenario.weights[k] * math.log2(1.0 + signal / ipnp) / ptot
    if leak is None or leak.rank == 0:
        return util
    return util - pricing_cost(leak, w)


def reduce_problem(
    scenario: NetworkScenario, state: BeamState, leak: LeakageMatrix, k: int, regime: str = "full"
):
    """Scalar coefficients of user ``k``'s priced problem.

    Returns ``(coef, direction)``.  With full-rank leakage ``coef`` is a
    :class:`Scenario1Coefficients` and the beam is ``sqrt(p) * direction``;
    otherwise it is a :class:`Scenario2Coefficients` carrying both
    directions and ``direction`` is None.  Returns ``(None, None)`` when
    the user cannot gain anything (zero weight, channel or cap).
    """
    M = scenario.num_antennas
    h = scenario.channels[k, k]
    alpha = float(scenario.weights[k])
    cap = float(scenario.pmax_w[k])
    rho = scenario.amp_inefficiency
    static = float(scenario.static_power(regime)[k])
    ipnp = float(scenario.noise_power[k] + state.interference[k])
    hnorm = float(np.linalg.norm(h))
    if alpha <= 0.0 or hnorm == 0.0 or cap <= 0.0:
        return None, None

    if leak.rank == M:
        r = inv_sqrt(leak.matrix, leak.decomposition)
        hbar = r @ h
        u = hbar / np.linalg.norm(hbar)
        ru = r @ u
        quad = float(np.vdot(ru, ru).real)  # u^H L^{-1} u
        coef = Scenario1Coefficients(
            gain=float(np.vdot(hbar, hbar).real) / ipnp,
            price_weight=rho * quad * LN2 / alpha,
            power_cap=cap / quad,
            static_power=static / (rho * quad),
        )
        return coef, ru

    ph = project_onto_range(leak.decomposition, leak.rank, h)
    nh = h - ph
    n1 = float(np.linalg.norm(ph))
    n2 = float(np.linalg.norm(nh))
    thr = DEGENERATE_PROJECTION * hnorm
    zero = np.zeros(M, dtype=np.complex128)
    w1 = ph / n1 if n1 > thr else zero
    w2 = nh / n2 if n2 > thr else zero
    g1 = n1**2 / ipnp if n1 > thr else 0.0
    g2 = n2**2 / ipnp if n2 > thr else 0.0
    g3 = rho * pricing_cost(leak, w1) * LN2 / alpha if n1 > thr else 0.0
    return Scenario2Coefficients(g1, g2, max(g3, 0.0), static / rho, cap, w1, w2), None


def solve_peruser(
    scenario: NetworkScenario, state: BeamState, leak: LeakageMatrix, k: int, regime: str = "full"
) -> np.ndarray:
    """Candidate beam for transmitter ``k`` given the others' beams and its prices.

    Full-rank leakage whitens the channel and solves for one power along
    the whitened matched filter.  Rank-deficient leakage splits the beam
    into range and null-space projections of ``h_{k,k}`` and solves for
    two powers.  The returned beam always satisfies the power cap.
    """
    coef, direction = reduce_problem(scenario, state, leak, k, regime)
    if coef is None:
        return np.zeros(scenario.num_antennas, dtype=np.complex128)
    if direction is not None:
        w = math.sqrt(solve_scenario1(coef)) * direction
    else:
        split = solve_scenario2(coef)
        w = math.sqrt(split.p1) * coef.range_direction + math.sqrt(split.p2) * coef.null_direction

    cap = float(scenario.pmax_w[k])
    pw = float(np.vdot(w, w).real)
    if pw > cap:
        w = w * math.sqrt(cap / pw)
    return w
