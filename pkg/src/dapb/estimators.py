"""Estimator-style wrappers around the beamforming algorithms.

The wrappers follow scikit-learn conventions: hyper-parameters are set in
``__init__`` and exposed through ``get_params``/``set_params``, ``fit``
takes a :class:`~dapb.scenario.NetworkScenario` and stores results in
attributes ending with an underscore, and ``score`` returns the weighted
sum EE.  This lets them be cloned, grid-searched over parameters, or
swapped for one another in the campaign harness.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .metrics import wsee
from .orchestrators import ArmijoParams, run_centralized, run_dapb, run_noncooperative
from .validation import check_beams, check_regime, check_scenario

__all__ = [
    "DAPBBeamformer",
    "NoncooperativeBeamformer",
    "CentralizedBeamformer",
    "make_beamformer",
]


class _BeamformerMixin:
    backhaul_regime_ = "full"

    def _store(self, report):
        self.report_ = report
        self.beams_ = report.final_beams
        self.wsee_trace_ = np.asarray(report.wsee_trace)
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        self.overhead_ = report.overhead_scalars
        return self

    def _init(self, scenario, init):
        return None if init is None else check_beams(scenario, init)

    def predict(self, scenario=None):
        """Per-user EE (bit/Hz/J) of the fitted beams."""
        check_is_fitted(self, "beams_")
        if scenario is None:
            return self.report_.per_user_ee
        return wsee(check_scenario(scenario), self.beams_, self.backhaul_regime_).ee

    def score(self, scenario=None, y=None) -> float:
        """Weighted sum EE of the fitted beams on ``scenario`` (default: the fitted one)."""
        check_is_fitted(self, "beams_")
        if scenario is None:
            return float(self.report_.wsee)
        return wsee(check_scenario(scenario), self.beams_, self.backhaul_regime_).wsee


class DAPBBeamformer(_BeamformerMixin, BaseEstimator):
    """Pricing-based distributed beamforming.

    Parameters
    ----------
    regime : {"full", "limited"}
        Price exchange among all links, or only within the scenario's
        ``dth_m`` radius.
    tol : float
        Relative change of the weighted sum EE at which iteration stops.
    max_iter : int
        Cap on outer iterations.
    """

    def __init__(self, regime="full", tol=1e-3, max_iter=100):
        self.regime = regime
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, scenario, y=None, init=None):
        scenario = check_scenario(scenario)
        check_regime(self.regime, ("full", "limited"))
        self.backhaul_regime_ = self.regime
        report = run_dapb(scenario, self.regime, self._init(scenario, init), self.tol, self.max_iter)
        return self._store(report)


class NoncooperativeBeamformer(_BeamformerMixin, BaseEstimator):
    """Selfish EE best response without prices."""

    backhaul_regime_ = "noncoop"

    def __init__(self, tol=1e-3, max_iter=100):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, scenario, y=None, init=None):
        scenario = check_scenario(scenario)
        report = run_noncooperative(scenario, self._init(scenario, init), self.tol, self.max_iter)
        return self._store(report)


class CentralizedBeamformer(_BeamformerMixin, BaseEstimator):
    """Projected gradient ascent with an Armijo step on the weighted sum EE."""

    def __init__(
        self,
        tol=1e-5,
        max_iter=1000,
        sufficient_increase=0.3,
        backtrack=0.5,
        initial_step=1.0,
        gradient_mode="exact",
    ):
        self.tol = tol
        self.max_iter = max_iter
        self.sufficient_increase = sufficient_increase
        self.backtrack = backtrack
        self.initial_step = initial_step
        self.gradient_mode = gradient_mode

    def fit(self, scenario, y=None, init=None):
        scenario = check_scenario(scenario)
        params = ArmijoParams(
            sufficient_increase=self.sufficient_increase,
            backtrack=self.backtrack,
            initial_step=self.initial_step,
            tolerance=self.tol,
            max_iters=self.max_iter,
        )
        report = run_centralized(scenario, self._init(scenario, init), params, self.gradient_mode)
        return self._store(report)


def make_beamformer(name: str, tol: float | None = None, max_iter: int | None = None):
    """Estimator for a harness algorithm name (``dapb``, ``limited-dapb``, ``noncoop``, ``centralized``)."""
    kw = {}
    if tol is not None:
        kw["tol"] = tol
    if max_iter is not None:
        kw["max_iter"] = max_iter
    if name == "dapb":
        return DAPBBeamformer(regime="full", **kw)
    if name == "limited-dapb":
        return DAPBBeamformer(regime="limited", **kw)
    if name == "noncoop":
        return NoncooperativeBeamformer(**kw)
    if name == "centralized":
        # the outer-loop tolerance and cap belong to the distributed schemes
        return CentralizedBeamformer()
    raise ValueError(f"unknown algorithm {name!r}")
