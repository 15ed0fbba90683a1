import math

import numpy as np
import pytest

from dapb.metrics import BeamState
from dapb.pricing import compute_prices, leakage, price, pricing_cost
from dapb.scenario import NetworkScenario, SimConfig, generate
from dapb.orchestrators import init_beams
from oracles import loop_price, random_beams, random_scenario


def test_price_zero_cases(rng):
    s = random_scenario(rng)
    w = random_beams(rng, s)
    w[1] = 0
    assert price(s, w, "full", 1) == 0.0
    s0 = s.with_weights([1.0, 1.0, 0.0])
    assert price(s0, random_beams(rng, s0), "full", 2) == 0.0


def test_price_hand_value():
    # alpha=1, |h^H w|^2=1, sigma^2+I=1, P_T=1, eta=1
    s = NetworkScenario.from_arrays(np.ones((1, 1, 1)), 1.0, 5.0)
    assert price(s, [[1.0]], "full", 0) == pytest.approx(1 / (2 * math.log(2)), rel=1e-14)
    assert price(s, [[1.0]], "full", 0) == pytest.approx(0.72135, abs=1e-5)


def test_prices_match_textbook_form(rng):
    for regime in ("full", "limited"):
        s = random_scenario(rng, K=5)
        w = random_beams(rng, s)
        ps = compute_prices(s, w, regime)
        for j in range(5):
            assert ps.prices[j] == pytest.approx(loop_price(s, w, j, regime), rel=1e-12)
        assert np.all(ps.prices >= 0)


def test_leakage_trivial():
    s = NetworkScenario.from_arrays(np.ones((1, 1, 3)), 1.0, 1.0)
    leak = leakage(s, compute_prices(s, [[1.0, 0, 0]]), 0)
    assert leak.rank == 0
    np.testing.assert_array_equal(leak.matrix, 0)


def test_leakage_limited_far_apart():
    cfg = SimConfig(num_pairs=4, dth_m=1.0)
    s = generate(cfg, 0)
    ps = compute_prices(s, init_beams(s), "limited")
    for k in range(4):
        leak = leakage(s, ps, k)
        assert leak.rank == 0
        assert np.all(leak.matrix == 0)


def test_leakage_rank_one(rng):
    s = random_scenario(rng, K=2)
    w = random_beams(rng, s)
    ps = compute_prices(s, w)
    leak = leakage(s, ps, 0)
    assert leak.rank == 1
    h = s.channels[0, 1]
    assert leak.decomposition.eigenvalues[0] == pytest.approx(ps.prices[1] * np.vdot(h, h).real, rel=1e-10)


def test_leakage_psd_and_quadratic_form(rng):
    for _ in range(50):
        K = int(rng.integers(2, 7))
        s = random_scenario(rng, K=K, M=4)
        w = random_beams(rng, s)
        ps = compute_prices(s, w)
        for k in range(K):
            leak = leakage(s, ps, k)
            np.testing.assert_allclose(leak.matrix, leak.matrix.conj().T, atol=1e-14)
            assert leak.decomposition.eigenvalues.min() >= -1e-12 * max(1, leak.decomposition.eigenvalues.max())
            assert leak.rank <= min(4, K - 1)
            v = random_beams(rng, s)[k]
            explicit = sum(ps.prices[j] * abs(np.vdot(s.channels[k, j], v)) ** 2 for j in range(K) if j != k)
            assert pricing_cost(leak, v) == pytest.approx(explicit, rel=1e-10, abs=1e-300)
            assert pricing_cost(leak, np.zeros(4)) == 0.0


def test_limited_equals_full_when_radius_covers_square():
    cfg = SimConfig(num_pairs=5, dth_m=350 * math.sqrt(2) + 1)
    s = generate(cfg, 2)
    w = init_beams(s)
    full = compute_prices(s, w, "full")
    lim = compute_prices(s, w, "limited")
    np.testing.assert_array_equal(full.feedback, lim.feedback)
    # prices differ only through the backhaul term, so compare with a shared budget
    s2 = s.__class__(**{**s.__dict__, "backhaul_limited_w": s.backhaul_full_w})
    lim2 = compute_prices(s2, BeamState(s2, w.beams), "limited")
    for k in range(5):
        np.testing.assert_allclose(leakage(s, full, k).matrix, leakage(s2, lim2, k).matrix, rtol=1e-14)


def test_limited_feedback_counts():
    s = generate(SimConfig(num_pairs=10, dth_m=100.0), 4)
    ps = compute_prices(s, init_beams(s), "limited")
    d = s.distances()
    for k in range(10):
        expect = sum(1 for j in range(10) if j == k or d[k, j] <= 100.0)
        assert ps.feedback_counts[k] == expect
