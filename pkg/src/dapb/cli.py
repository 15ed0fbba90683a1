"""Command line entry point: ``dapb-sim``."""
from __future__ import annotations

import argparse
import os
import sys
from importlib import resources

from .exceptions import ConfigError
from .harness import ALGORITHMS, SWEEP_AXES, Campaign, export, read_weights, run_campaign
from .scenario import SimConfig, read_config_mapping

_AXIS_ALIASES = {
    "users": "num_pairs",
    "antennas": "num_antennas",
    "pmax-dbm": "pmax_dbm",
    "dlen": "dlen_m",
    "dth": "dth_m",
}
# keys a config file may carry on top of SimConfig fields
_CAMPAIGN_KEYS = ("trials", "algorithms", "sweep_axis", "sweep_values", "format", "out", "jobs")


def bundled_unequal_weights() -> tuple[float, ...]:
    text = resources.files("dapb").joinpath("data/unequal_weights.txt").read_text()
    return tuple(float(x) for x in text.split())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dapb-sim",
        description="Monte Carlo comparison of energy-efficient beamforming schemes.",
    )
    p.add_argument("--config", help="JSON, YAML or key = value file; flags override it")
    p.add_argument("--users", type=int, help="number of transmitter/receiver pairs")
    p.add_argument("--antennas", type=int, help="transmit antennas per transmitter")
    p.add_argument("--pmax-dbm", type=float)
    p.add_argument("--dlen", type=float, help="side of the square region in metres")
    p.add_argument("--dth", type=float, help="limited-feedback radius in metres")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alg", action="append", choices=ALGORITHMS,
                   help="algorithm to run; repeat for several (default: dapb)")
    p.add_argument("--sweep", nargs=2, metavar=("AXIS", "VALUES"),
                   help="axis (users, antennas, pmax-dbm, dlen, dth, weights) and comma-separated values")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--weights", help="'equal', 'unequal' (bundled set) or a file with one weight per line")
    p.add_argument("--out", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    p.add_argument("--no-timing", action="store_true",
                   help="write wallclock_ms as 0 so repeated runs are byte-identical")
    return p


def _weights(spec: str):
    if spec == "unequal":
        return bundled_unequal_weights()
    return read_weights(spec)


def _parse_values(axis: str, text: str):
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError("empty sweep value list")
    if axis == "weights":
        return items
    try:
        return tuple(float(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"bad sweep value list {text!r}") from exc


def campaign_from_args(args) -> tuple[Campaign, dict]:
    mapping = read_config_mapping(args.config) if args.config else {}
    extra = {k: mapping.pop(k) for k in _CAMPAIGN_KEYS if k in mapping}
    overrides = {
        "num_pairs": args.users,
        "num_antennas": args.antennas,
        "pmax_dbm": args.pmax_dbm,
        "dlen_m": args.dlen,
        "dth_m": args.dth,
        "seed": args.seed,
        "tolerance": args.tolerance,
        "max_outer_iters": args.max_iters,
    }
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    if args.weights is not None:
        mapping["weights"] = _weights(args.weights)
    try:
        base = SimConfig.from_mapping(mapping)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc

    axis = extra.get("sweep_axis", "num_pairs")
    values = extra.get("sweep_values", ())
    if args.sweep:
        axis, values = args.sweep[0], _parse_values(_AXIS_ALIASES.get(args.sweep[0], args.sweep[0]), args.sweep[1])
    axis = _AXIS_ALIASES.get(axis, axis)
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    weight_sets = ()
    if axis == "weights":
        weight_sets = tuple(_weights(str(v)) for v in values)
        values = tuple(range(len(weight_sets)))
    algorithms = tuple(args.alg or extra.get("algorithms") or ("dapb",))
    if isinstance(algorithms, str):
        algorithms = (algorithms,)
    campaign = Campaign(
        base=base,
        sweep_axis=axis,
        sweep_values=tuple(values),
        algorithms=algorithms,
        trials=int(args.trials if args.trials is not None else extra.get("trials", 1)),
        seed=base.seed,
        weight_sets=weight_sets,
        record_timing=not args.no_timing,
    )
    io = {
        "format": args.format or extra.get("format", "csv"),
        "out": args.out or extra.get("out", "-"),
        "jobs": args.jobs if args.jobs is not None else int(extra.get("jobs", os.cpu_count() or 1)),
    }
    if io["format"] not in ("csv", "jsonl"):
        raise ConfigError(f"unknown output format {io['format']!r}")
    if io["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    return campaign, io


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        campaign, io = campaign_from_args(args)
    except ConfigError as exc:
        print(f"dapb-sim: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        export(run_campaign(campaign, jobs=io["jobs"]), io["format"], io["out"])
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``)
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0
    except OSError as exc:
        print(f"dapb-sim: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
