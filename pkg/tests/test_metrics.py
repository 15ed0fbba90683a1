import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dapb.metrics import BeamState, interference, sinr, total_power, wsee
from dapb.scenario import NetworkScenario, SimConfig, generate
from oracles import loop_metrics, random_beams, random_scenario


def test_interference_examples():
    ch = np.zeros((2, 2, 2), dtype=complex)
    ch[1, 0] = [1, 0]
    s = NetworkScenario.from_arrays(ch, 1.0, 10.0)
    w = np.array([[0, 0], [2, 0]], dtype=complex)
    assert interference(s, w, 0) == pytest.approx(4.0)
    assert interference(s, np.zeros((2, 2)), 0) == 0.0
    single = NetworkScenario.from_arrays(np.ones((1, 1, 3)), 1.0, 1.0)
    assert interference(single, np.ones((1, 3)), 0) == 0.0


def test_sinr_examples():
    P, s2 = 2.0, 0.1
    ch = np.zeros((1, 1, 4), dtype=complex)
    ch[0, 0, 0] = 1
    s = NetworkScenario.from_arrays(ch, s2, P)
    w = np.zeros((1, 4), dtype=complex)
    assert sinr(s, w, 0) == 0.0
    w[0, 0] = math.sqrt(P)
    assert sinr(s, w, 0) == pytest.approx(P / s2)


def test_total_power_examples():
    s = NetworkScenario.from_arrays(np.ones((1, 1, 2)), 1.0, 1.0, amp_inefficiency=1.0)
    assert total_power(s, [[1.0, 0.0]], 0) == pytest.approx(1.0)
    s = NetworkScenario.from_arrays(
        np.ones((1, 1, 2)), 1.0, 1.0, amp_inefficiency=1 / 0.35,
        circuit_tx=0.1, circuit_rx=0.3, backhaul_w=0.02,
    )
    assert total_power(s, np.zeros((1, 2)), 0) == pytest.approx(2 * 0.1 + 0.3 + 0.02)
    w = np.array([[math.sqrt(0.35), 0.0]])
    assert total_power(s, w, 0) == pytest.approx(1.0 + 0.52)


def test_wsee_examples(rng):
    s = random_scenario(rng)
    assert wsee(s, np.zeros((3, 4))).wsee == 0.0
    # eta = 1, P_T = 1, alpha = 1 -> 1 bit/Hz/J
    one = NetworkScenario.from_arrays(np.ones((1, 1, 1)), 1.0, 5.0)
    assert wsee(one, [[1.0]]).wsee == pytest.approx(1.0)


def test_wsee_matches_loops(rng):
    for regime in ("full", "limited", "noncoop"):
        for _ in range(20):
            s = random_scenario(rng, K=4, backhaul_w=rng.uniform(0, 0.1, 4))
            w = random_beams(rng, s)
            rep = wsee(s, w, regime)
            sin, ee, tot = loop_metrics(s, w, regime)
            np.testing.assert_allclose(rep.sinr, sin, rtol=1e-12)
            np.testing.assert_allclose(rep.ee, ee, rtol=1e-12)
            assert rep.wsee == pytest.approx(tot, rel=1e-12)
            assert abs(rep.wsee - float(np.dot(s.weights, rep.ee))) <= 1e-12 * max(1, rep.wsee)
            assert np.all(rep.rate >= 0) and np.all(rep.total_power > 0)
            for k in range(4):
                assert sinr(s, w, k) == pytest.approx(sin[k], rel=1e-12)


def test_beamstate_cache_tracks_updates(rng):
    s = generate(SimConfig(num_pairs=8), 0)
    st_ = BeamState(s, random_beams(rng, s))
    for _ in range(200):
        k = int(rng.integers(8))
        st_.update(k, random_beams(rng, s)[k])
        fresh = BeamState(s, st_.beams)
        np.testing.assert_allclose(st_.interference, fresh.interference, rtol=1e-9)
    c = st_.copy()
    c.update(0, np.zeros(4))
    assert not np.array_equal(c.beams, st_.beams)
    with pytest.raises(ValueError):
        BeamState(s, np.zeros((3, 4)))


@given(seed=st.integers(0, 2**32 - 1))
def test_phase_invariance(seed):
    rng = np.random.default_rng(seed)
    s = random_scenario(rng, K=3)
    w = random_beams(rng, s)
    rot = w * np.exp(1j * rng.uniform(0, 2 * np.pi, 3))[:, None]
    assert abs(wsee(s, w).wsee - wsee(s, rot).wsee) <= 1e-10 * max(1.0, wsee(s, w).wsee)


@given(seed=st.integers(0, 2**32 - 1), factor=st.floats(1.01, 10))
def test_more_interference_never_helps_others(seed, factor):
    rng = np.random.default_rng(seed)
    s = random_scenario(rng, K=3, pmax_w=100.0)
    w = random_beams(rng, s)
    before = wsee(s, w).ee
    w2 = w.copy()
    w2[0] *= factor
    after = wsee(s, w2).ee
    assert np.all(after[1:] <= before[1:] + 1e-15)


def test_ee_convex_in_interference(rng):
    # U_j as a function of an additive interference term
    for _ in range(100):
        s = random_scenario(rng, K=2)
        w = random_beams(rng, s)
        rep = wsee(s, w)
        S = rep.sinr[0] * (s.noise_power[0] + interference(s, w, 0))
        base = s.noise_power[0] + interference(s, w, 0)
        h = 1e-3 * base

        def u(extra):
            return math.log2(1 + S / (base + extra)) / rep.total_power[0]

        second = (u(2 * h) - 2 * u(h) + u(0)) / h**2
        assert second >= -1e-8
