"""Independent reference computations used as test oracles.

Everything here is written from the model definitions with plain loops
or brute force, sharing no code with the package.
"""
import math

import numpy as np

LN2 = math.log(2.0)


def s1_grid_max(gain, price_weight, cap, static, n=100_000):
    """Dense 1-D grid maximum of ``ln(1+g p)/(p+Pc) - A p`` on ``[0, cap]``."""
    p = np.linspace(0.0, cap, n)
    v = np.log1p(gain * p) / (p + static) - price_weight * p
    i = int(np.argmax(v))
    return float(v[i]), float(p[i])


def s2_objective(g1, g2, g3, pc, p1, p2):
    return np.log1p(g1 * p1 + g2 * p2) / (p1 + p2 + pc) - g3 * p1


def s2_grid_max(g1, g2, g3, pc, cap, n=400):
    """Maximum over a ``n x n`` grid of the simplex ``p1, p2 >= 0, p1 + p2 <= cap``.

    Grid on the (total, share) parametrisation so both the interior and the
    tight face are sampled with ``n`` points each.
    """
    t = np.linspace(0.0, cap, n)[:, None]
    s = np.linspace(0.0, 1.0, n)[None, :]
    p1, p2 = t * s, t * (1.0 - s)
    v = s2_objective(g1, g2, g3, pc, p1, p2)
    i = np.unravel_index(int(np.argmax(v)), v.shape)
    return float(v[i]), float(p1[i]), float(p2[i])


def draw_s1(rng):
    """Random Scenario-1 coefficients spanning interior, zero and cap answers."""
    gain = 10 ** rng.uniform(-2, 3)
    price_weight = 10 ** rng.uniform(-5, 1)
    cap = 10 ** rng.uniform(-1, 2)
    static = 10 ** rng.uniform(-2, 1)
    return gain, price_weight, cap, static


def draw_s2(rng):
    """Random Scenario-2 coefficients with ``g1 > g2`` most of the time."""
    g1 = 10 ** rng.uniform(-1, 2)
    g2 = g1 * 10 ** rng.uniform(-2, 0.3)
    g3 = 10 ** rng.uniform(-4, 0)
    pc = 10 ** rng.uniform(-1, 1)
    cap = 10 ** rng.uniform(-1, 1.5)
    return g1, g2, g3, pc, cap


def loop_metrics(scenario, beams, regime="full"):
    """Per-user SINR, EE and the weighted sum by explicit loops."""
    K = scenario.num_pairs
    w = np.asarray(beams, dtype=complex)
    sinr, ee = np.zeros(K), np.zeros(K)
    for k in range(K):
        sig = abs(np.vdot(scenario.channels[k, k], w[k])) ** 2
        interf = sum(abs(np.vdot(scenario.channels[j, k], w[j])) ** 2 for j in range(K) if j != k)
        sinr[k] = sig / (scenario.noise_power[k] + interf)
        ptot = (
            scenario.amp_inefficiency * np.vdot(w[k], w[k]).real
            + scenario.num_antennas * scenario.circuit_tx[k]
            + scenario.circuit_rx[k]
            + scenario.backhaul(regime)[k]
        )
        ee[k] = math.log2(1.0 + sinr[k]) / ptot
    return sinr, ee, float(sum(scenario.weights[k] * ee[k] for k in range(K)))


def loop_price(scenario, beams, j, regime="full"):
    """Price of receiver ``j`` from the textbook form with ``(1 + eta)`` and the squared IPNP."""
    K = scenario.num_pairs
    w = np.asarray(beams, dtype=complex)
    sig = abs(np.vdot(scenario.channels[j, j], w[j])) ** 2
    ipnp = scenario.noise_power[j] + sum(
        abs(np.vdot(scenario.channels[i, j], w[i])) ** 2 for i in range(K) if i != j
    )
    eta = sig / ipnp
    ptot = (
        scenario.amp_inefficiency * np.vdot(w[j], w[j]).real
        + scenario.num_antennas * scenario.circuit_tx[j]
        + scenario.circuit_rx[j]
        + scenario.backhaul(regime)[j]
    )
    return scenario.weights[j] * sig / (LN2 * ptot * (1 + eta) * ipnp**2)


def fd_gradient(f, beams, step=1e-6):
    """Central finite differences of a real function over real and imaginary parts.

    Returns the complex array ``d/dRe + 1j d/dIm``.
    """
    w = np.array(beams, dtype=complex)
    g = np.zeros_like(w)
    for idx in np.ndindex(w.shape):
        for unit in (1.0, 1j):
            wp, wm = w.copy(), w.copy()
            wp[idx] += step * unit
            wm[idx] -= step * unit
            d = (f(wp) - f(wm)) / (2 * step)
            g[idx] += d * unit
    return g


def random_scenario(rng, K=3, M=4, scale=1.0, **kw):
    """Hand-built scenario with unit-scale numbers, easier to reason about than path loss."""
    from dapb.scenario import NetworkScenario

    ch = scale * (rng.standard_normal((K, K, M)) + 1j * rng.standard_normal((K, K, M))) / np.sqrt(2)
    params = dict(
        circuit_tx=rng.uniform(0.05, 0.2, K),
        circuit_rx=rng.uniform(0.2, 0.4, K),
        backhaul_w=rng.uniform(0.0, 0.1, K),
        weights=rng.uniform(0.2, 1.5, K),
        amp_inefficiency=1 / 0.35,
    )
    params.update(kw)
    noise = params.pop("noise_power", 0.1)
    pmax = params.pop("pmax_w", 2.0)
    return NetworkScenario.from_arrays(ch, noise, pmax, **params)


def random_beams(rng, scenario):
    K, M = scenario.num_pairs, scenario.num_antennas
    w = rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))
    frac = rng.uniform(0, 1, K)
    return w / np.linalg.norm(w, axis=1, keepdims=True) * np.sqrt(frac * scenario.pmax_w)[:, None]
