"""Monte Carlo campaigns over one sweep axis, with paired trials.

At every (sweep point, trial) one scenario and one initial beam set are
drawn and handed to every algorithm in the campaign, so algorithm
comparisons are paired.  Rows come out in (point, trial, algorithm) order
whatever the degree of parallelism.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .estimators import make_beamformer
from .exceptions import ConfigError
from .orchestrators import init_beams
from .scenario import SimConfig, generate

__all__ = [
    "ALGORITHMS",
    "SWEEP_AXES",
    "CSV_HEADER",
    "Campaign",
    "ResultRow",
    "run_campaign",
    "export",
    "read_weights",
    "read_csv",
]

ALGORITHMS = ("dapb", "limited-dapb", "noncoop", "centralized")
SWEEP_AXES = ("num_pairs", "pmax_dbm", "num_antennas", "dlen_m", "dth_m", "weights")
_INT_AXES = ("num_pairs", "num_antennas")
CSV_HEADER = (
    "sweep_value", "trial", "algorithm", "iterations", "wsee_bits_per_hz_per_joule",
    "overhead_scalars", "wallclock_ms", "converged",
)


def read_weights(spec: str, num_pairs: int | None = None):
    """Weights from ``"equal"`` (all ones, returned as None) or a file with one value per line."""
    if spec == "equal":
        return None
    path = Path(spec)
    try:
        lines = path.read_text().split()
    except OSError as exc:
        raise ConfigError(f"cannot read weights file {path}: {exc}") from exc
    try:
        weights = tuple(float(x) for x in lines)
    except ValueError as exc:
        raise ConfigError(f"weights file {path} holds a non-numeric entry") from exc
    if num_pairs is not None and len(weights) != num_pairs:
        raise ConfigError(f"weights file {path} has {len(weights)} entries, expected {num_pairs}")
    return weights


@dataclass(frozen=True)
class Campaign:
    """A sweep of one configuration axis with paired Monte Carlo trials.

    For the ``weights`` axis ``sweep_values`` index into ``weight_sets``
    (``None`` there means equal weights).
    """

    base: SimConfig = field(default_factory=SimConfig)
    sweep_axis: str = "num_pairs"
    sweep_values: tuple = ()
    algorithms: tuple[str, ...] = ("dapb",)
    trials: int = 1
    seed: int = 0
    weight_sets: tuple = ()
    record_timing: bool = True

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}; expected one of {ALGORITHMS}")
        vals = tuple(self.sweep_values)
        if self.sweep_axis == "weights":
            if not vals:
                vals = tuple(range(len(self.weight_sets))) or (0,)
        elif not vals:
            vals = (getattr(self.base, self.sweep_axis),)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        object.__setattr__(self, "sweep_values", vals)
        for i in range(len(vals)):
            self.config_at(i)  # validate every point up front

    def config_at(self, index: int) -> SimConfig:
        value = self.sweep_values[index]
        cfg = self.base.replace(seed=self.seed)
        if self.sweep_axis == "weights":
            sets = self.weight_sets or (None,)
            if not (isinstance(value, (int, np.integer)) and 0 <= value < len(sets)):
                raise ConfigError(f"weights sweep value {value!r} is not an index into the weight sets")
            return cfg.replace(weights=sets[value])
        if self.sweep_axis in _INT_AXES:
            if float(value) != int(value):
                raise ConfigError(f"{self.sweep_axis} sweep values must be integers")
            value = int(value)
            if self.sweep_axis == "num_pairs" and cfg.weights is not None and len(cfg.weights) != value:
                raise ConfigError("explicit weights do not match the swept number of pairs")
        return cfg.replace(**{self.sweep_axis: value})


@dataclass
class ResultRow:
    sweep_value: float
    trial: int
    algorithm: str
    iterations: int
    wsee: float
    per_user_ee: list[float]
    overhead_scalars: int
    wallclock_ms: float
    converged: bool
    scenario_hash: str = ""
    error: str | None = None

    def csv_fields(self) -> list[str]:
        return [
            _fmt(self.sweep_value), str(self.trial), self.algorithm, str(self.iterations),
            _fmt(self.wsee), str(self.overhead_scalars), _fmt(self.wallclock_ms),
            "true" if self.converged else "false",
        ]

    def json_dict(self) -> dict:
        d = {
            "sweep_value": self.sweep_value,
            "trial": self.trial,
            "algorithm": self.algorithm,
            "iterations": self.iterations,
            "wsee_bits_per_hz_per_joule": _json_float(self.wsee),
            "overhead_scalars": self.overhead_scalars,
            "wallclock_ms": self.wallclock_ms,
            "converged": self.converged,
            "per_user_ee": [_json_float(x) for x in self.per_user_ee],
            "scenario_hash": self.scenario_hash,
        }
        if self.error is not None:
            d["error"] = self.error
        return d


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _run_trial(campaign: Campaign, index: int, trial: int) -> list[ResultRow]:
    value = campaign.sweep_values[index]
    rows = []
    try:
        scenario = generate(campaign.config_at(index), trial)
        init = init_beams(scenario).beams
        digest = scenario.fingerprint()
    except Exception as exc:  # recorded per row, campaign continues
        msg = f"{type(exc).__name__}: {exc}"
        return [
            ResultRow(value, trial, alg, 0, math.nan, [], 0, 0.0, False, "", msg)
            for alg in campaign.algorithms
        ]
    cfg = scenario.config
    for alg in campaign.algorithms:
        try:
            est = make_beamformer(alg, cfg.tolerance, cfg.max_outer_iters)
            est.fit(scenario, init=init)
            rep = est.report_
            rows.append(ResultRow(
                value, trial, alg, rep.iterations, float(rep.wsee),
                [float(x) for x in rep.per_user_ee], rep.overhead_scalars,
                rep.wallclock_ms if campaign.record_timing else 0.0,
                bool(rep.converged), digest,
            ))
        except Exception as exc:
            rows.append(ResultRow(
                value, trial, alg, 0, math.nan, [], 0, 0.0, False, digest,
                f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}",
            ))
    return rows


def _run_task(args):
    return _run_trial(*args)


def run_campaign(campaign: Campaign, jobs: int = 1) -> Iterator[ResultRow]:
    """Yield one row per (sweep point, trial, algorithm), in that order.

    With ``jobs > 1`` trials run in worker processes; rows are still
    yielded in order, each as soon as it and its predecessors finish.
    """
    tasks = [
        (campaign, i, t)
        for i in range(len(campaign.sweep_values))
        for t in range(campaign.trials)
    ]
    if jobs <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield from _run_trial(*task)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for rows in pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))):
            yield from rows


def export(rows: Iterable[ResultRow], fmt: str = "csv", path=None) -> int:
    """Write rows as CSV or JSON lines to ``path`` (``None`` or ``"-"`` for stdout).

    Returns the number of rows written.

    Raises
    ------
    OSError
        If ``path`` cannot be opened; the message names the path.
    """
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")
    if path is None or str(path) == "-":
        return _write(rows, fmt, sys.stdout)
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    with fh:
        return _write(rows, fmt, fh)


def _write(rows, fmt, fh) -> int:
    n = 0
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_fields())
            fh.flush()
            n += 1
    else:
        for row in rows:
            fh.write(json.dumps(row.json_dict(), sort_keys=False) + "\n")
            fh.flush()
            n += 1
    return n


def read_csv(text: str) -> list[dict]:
    """Parse CSV text written by :func:`export` back into typed dictionaries."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        out.append({
            "sweep_value": float(rec["sweep_value"]),
            "trial": int(rec["trial"]),
            "algorithm": rec["algorithm"],
            "iterations": int(rec["iterations"]),
            "wsee": float(rec["wsee_bits_per_hz_per_joule"]),
            "overhead_scalars": int(rec["overhead_scalars"]),
            "wallclock_ms": float(rec["wallclock_ms"]),
            "converged": rec["converged"] == "true",
        })
    return out

