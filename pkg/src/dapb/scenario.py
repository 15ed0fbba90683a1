"""Monte Carlo network realisations for the MISO interference channel.

A :class:`SimConfig` describes a campaign point; :func:`generate` turns it
plus a trial index into one :class:`NetworkScenario` holding geometry,
Rayleigh-faded channels and every static power constant the algorithms
need.  Generation is a pure function of ``(config, trial_index)``.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, GenerationError

__all__ = [
    "SimConfig",
    "NetworkScenario",
    "REGIMES",
    "generate",
    "path_loss_db",
    "path_loss_gain",
    "backhaul_power",
    "dbm_to_watts",
    "noise_power",
]

REGIMES = ("full", "limited", "noncoop")
MAX_PLACEMENT_ATTEMPTS = 1_000_000


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def path_loss_db(distance_m):
    """Path loss ``38.46 + 35 log10(d)`` in dB, ``d`` in meters."""
    return 38.46 + 35.0 * np.log10(distance_m)


def path_loss_gain(distance_m):
    """Linear channel power gain ``10^(-PL/10)``."""
    return 10.0 ** (-path_loss_db(distance_m) / 10.0)


def noise_power(noise_psd_dbm_hz: float, bandwidth_hz: float) -> float:
    return float(10.0 ** ((noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz)


def backhaul_power(gamma_snr_db: float, noise_w, distance_m):
    """Power needed to reach ``distance_m`` at target SNR ``gamma_snr_db``.

    Returns ``gamma * noise * PL`` with the path loss taken as a linear
    attenuation factor.
    """
    gamma = 10.0 ** (gamma_snr_db / 10.0)
    return gamma * np.asarray(noise_w) * 10.0 ** (path_loss_db(distance_m) / 10.0)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation point.

    Defaults follow the usual setup: 4 antennas, -174 dBm/Hz noise over
    20 MHz, amplifier efficiency 0.35, 4 dB backhaul SNR, 1e-3 tolerance,
    a 350 m square and equal weights.
    """

    num_pairs: int = 4
    num_antennas: int = 4
    pmax_dbm: float = 33.0
    dlen_m: float = 350.0
    dth_m: float = 100.0
    bandwidth_hz: float = 20e6
    noise_psd_dbm_hz: float = -174.0
    amp_inefficiency: float = 1.0 / 0.35
    gamma_snr_db: float = 4.0
    tolerance: float = 1e-3
    max_outer_iters: int = 100
    weights: tuple[float, ...] | None = None
    circuit_tx_range_mw: tuple[float, float] = (50.0, 200.0)
    circuit_rx_range_mw: tuple[float, float] = (200.0, 400.0)
    link_range_m: tuple[float, float] = (30.0, 60.0)
    min_cross_distance_m: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        for name in ("circuit_tx_range_mw", "circuit_rx_range_mw", "link_range_m"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        self.validate()

    def validate(self):
        if self.num_pairs < 1:
            raise ConfigError("num_pairs must be >= 1")
        if self.num_antennas < 1:
            raise ConfigError("num_antennas must be >= 1")
        if not self.dlen_m > 0:
            raise ConfigError("dlen_m must be positive")
        if not self.dth_m >= 0:
            raise ConfigError("dth_m must be nonnegative")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if not self.amp_inefficiency >= 1:
            raise ConfigError("amp_inefficiency must be >= 1")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be positive")
        if self.max_outer_iters < 1:
            raise ConfigError("max_outer_iters must be >= 1")
        for name in ("circuit_tx_range_mw", "circuit_rx_range_mw", "link_range_m"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ConfigError(f"{name} must satisfy 0 < low <= high")
        if self.weights is not None:
            if len(self.weights) != self.num_pairs:
                raise ConfigError(
                    f"{len(self.weights)} weights given for {self.num_pairs} pairs"
                )
            if any(not (w >= 0 and math.isfinite(w)) for w in self.weights):
                raise ConfigError("weights must be finite and nonnegative")

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, mapping) -> "SimConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(mapping))

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        """Load from JSON, YAML, or ``key = value`` text (values parsed as JSON)."""
        return cls.from_mapping(read_config_mapping(path))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def read_config_mapping(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(text)
        elif suffix in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text) or {}
        else:
            data = {}
            for lineno, line in enumerate(text.splitlines(), 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, value = (s.strip() for s in line.split("=", 1))
                try:
                    data[key] = json.loads(value)
                except json.JSONDecodeError:
                    data[key] = value
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


@dataclass(eq=False)
class NetworkScenario:
    """One realisation of the network.

    ``channels[j, k]`` is the length-``M`` channel from transmitter ``j``
    to receiver ``k``.  Powers are in watts, positions in meters.
    """

    tx_positions: np.ndarray
    rx_positions: np.ndarray
    channels: np.ndarray
    noise_power: np.ndarray
    pmax_w: np.ndarray
    circuit_tx: np.ndarray
    circuit_rx: np.ndarray
    backhaul_full_w: np.ndarray
    backhaul_limited_w: np.ndarray
    backhaul_noncoop_w: np.ndarray
    weights: np.ndarray
    amp_inefficiency: float
    dth_m: float
    init_seed: int = 0
    trial_index: int = 0
    config: SimConfig | None = field(default=None, repr=False)

    @property
    def num_pairs(self) -> int:
        return self.channels.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.channels.shape[2]

    @property
    def direct_channels(self) -> np.ndarray:
        """``(K, M)`` array of own-link channels ``h_{k,k}``."""
        k = np.arange(self.num_pairs)
        return self.channels[k, k]

    def distances(self) -> np.ndarray:
        """``(K, K)`` matrix of transmitter ``j`` to receiver ``k`` distances."""
        return np.linalg.norm(
            self.tx_positions[:, None, :] - self.rx_positions[None, :, :], axis=-1
        )

    def backhaul(self, regime: str) -> np.ndarray:
        if regime == "full":
            return self.backhaul_full_w
        if regime == "limited":
            return self.backhaul_limited_w
        if regime == "noncoop":
            return self.backhaul_noncoop_w
        raise ValueError(f"unknown backhaul regime {regime!r}; expected one of {REGIMES}")

    def static_power(self, regime: str) -> np.ndarray:
        """Beam-independent part of the power budget, ``M P_ct + P_cr + P_bh``."""
        return self.num_antennas * self.circuit_tx + self.circuit_rx + self.backhaul(regime)

    def feedback_mask(self, regime: str) -> np.ndarray:
        """Boolean ``(K, K)`` mask; entry ``[k, j]`` says receiver ``j`` feeds transmitter ``k``.

        Receiver ``k`` always feeds its own transmitter (IPNP).  Under the
        limited regime other receivers feed only transmitters within
        ``dth_m``; under the noncooperative regime nobody else does.
        """
        K = self.num_pairs
        if regime == "full":
            return np.ones((K, K), dtype=bool)
        if regime == "limited":
            mask = self.distances() <= self.dth_m
        elif regime == "noncoop":
            mask = np.zeros((K, K), dtype=bool)
        else:
            raise ValueError(f"unknown regime {regime!r}")
        mask[np.arange(K), np.arange(K)] = True
        return mask

    def fingerprint(self) -> str:
        """SHA-256 over every numeric field; equal for identical scenarios."""
        h = hashlib.sha256()
        for name in (
            "tx_positions", "rx_positions", "channels", "noise_power", "pmax_w",
            "circuit_tx", "circuit_rx", "backhaul_full_w", "backhaul_limited_w",
            "backhaul_noncoop_w", "weights",
        ):
            h.update(np.ascontiguousarray(getattr(self, name)).tobytes())
        h.update(repr((self.amp_inefficiency, self.dth_m, self.init_seed)).encode())
        return h.hexdigest()

    def with_pmax(self, pmax_w) -> "NetworkScenario":
        pmax = np.broadcast_to(np.asarray(pmax_w, dtype=float), (self.num_pairs,)).copy()
        return dataclasses.replace(self, pmax_w=pmax)

    def with_weights(self, weights) -> "NetworkScenario":
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.num_pairs,):
            raise ValueError(f"expected {self.num_pairs} weights, got shape {w.shape}")
        return dataclasses.replace(self, weights=w.copy())

    @classmethod
    def from_arrays(
        cls,
        channels,
        noise_power,
        pmax_w,
        *,
        circuit_tx=0.0,
        circuit_rx=0.0,
        backhaul_w=0.0,
        weights=1.0,
        amp_inefficiency=1.0,
        tx_positions=None,
        rx_positions=None,
        dth_m=np.inf,
        init_seed=0,
    ) -> "NetworkScenario":
        """Build a scenario directly from channel and power arrays.

        Scalars broadcast over users; the same backhaul value is used for
        every regime.  Handy for hand-built test cases.
        """
        channels = np.asarray(channels, dtype=np.complex128)
        if channels.ndim != 3 or channels.shape[0] != channels.shape[1]:
            raise ValueError("channels must have shape (K, K, M)")
        K = channels.shape[0]

        def vec(x):
            return np.broadcast_to(np.asarray(x, dtype=float), (K,)).copy()

        pos = np.zeros((K, 2)) if tx_positions is None else np.asarray(tx_positions, float)
        rpos = np.zeros((K, 2)) if rx_positions is None else np.asarray(rx_positions, float)
        bh = vec(backhaul_w)
        return cls(
            tx_positions=pos,
            rx_positions=rpos,
            channels=channels,
            noise_power=vec(noise_power),
            pmax_w=vec(pmax_w),
            circuit_tx=vec(circuit_tx),
            circuit_rx=vec(circuit_rx),
            backhaul_full_w=bh,
            backhaul_limited_w=bh.copy(),
            backhaul_noncoop_w=bh.copy(),
            weights=vec(weights),
            amp_inefficiency=float(amp_inefficiency),
            dth_m=float(dth_m),
            init_seed=int(init_seed),
        )


def _place_pairs(config: SimConfig, rng: np.random.Generator):
    K = config.num_pairs
    side = config.dlen_m
    d_lo, d_hi = config.link_range_m
    dmin = config.min_cross_distance_m
    if side * math.sqrt(2.0) < d_lo:
        raise GenerationError(f"a {side} m square cannot hold a link of {d_lo} m")
    tx = np.empty((K, 2))
    rx = np.empty((K, 2))
    attempts = 0
    placed = 0
    while placed < K:
        attempts += 1
        if attempts > MAX_PLACEMENT_ATTEMPTS:
            raise GenerationError(
                f"could not place {K} pairs in a {side} m square after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts"
            )
        t = rng.uniform(0.0, side, size=2)
        d = rng.uniform(d_lo, d_hi)
        theta = rng.uniform(0.0, 2.0 * np.pi)
        r = t + d * np.array([np.cos(theta), np.sin(theta)])
        if np.any(r < 0.0) or np.any(r > side):
            continue
        if placed:
            # new tx against existing rx, existing tx against new rx
            if np.any(np.linalg.norm(rx[:placed] - t, axis=1) < dmin):
                continue
            if np.any(np.linalg.norm(tx[:placed] - r, axis=1) < dmin):
                continue
        tx[placed] = t
        rx[placed] = r
        placed += 1
    return tx, rx


def generate(config: SimConfig, trial_index: int = 0) -> NetworkScenario:
    """Draw one network realisation.

    Pairs are placed one at a time by rejection sampling inside the
    ``dlen_m`` square: link length uniform in ``link_range_m`` and every
    cross transmitter-receiver distance at least ``min_cross_distance_m``.
    Channels are path-loss scaled ``CN(0, I)`` vectors; circuit powers are
    redrawn uniformly per trial.  The random stream is seeded from
    ``(config.seed, trial_index)``.

    Raises
    ------
    GenerationError
        If placement needs more than a million attempts.
    """
    if trial_index < 0:
        raise ConfigError("trial_index must be nonnegative")
    rng = np.random.default_rng([int(config.seed), int(trial_index)])
    K, M = config.num_pairs, config.num_antennas

    tx, rx = _place_pairs(config, rng)
    dist = np.linalg.norm(tx[:, None, :] - rx[None, :, :], axis=-1)

    fading = (rng.standard_normal((K, K, M)) + 1j * rng.standard_normal((K, K, M))) / np.sqrt(2.0)
    channels = np.sqrt(path_loss_gain(dist))[:, :, None] * fading

    sigma2 = noise_power(config.noise_psd_dbm_hz, config.bandwidth_hz)
    noise = np.full(K, sigma2)
    lo, hi = config.circuit_tx_range_mw
    circuit_tx = rng.uniform(lo, hi, size=K) * 1e-3
    lo, hi = config.circuit_rx_range_mw
    circuit_rx = rng.uniform(lo, hi, size=K) * 1e-3
    init_seed = int(rng.integers(0, 2**63 - 1))

    # full exchange reaches the farthest receiver, limited reaches dth,
    # noncooperative only its own receiver
    far = np.maximum(dist.max(axis=1), 1.0)
    bh_full = backhaul_power(config.gamma_snr_db, noise, far)
    bh_limited = backhaul_power(config.gamma_snr_db, noise, np.full(K, max(config.dth_m, 1.0)))
    bh_noncoop = backhaul_power(config.gamma_snr_db, noise, np.maximum(np.diag(dist), 1.0))

    weights = np.ones(K) if config.weights is None else np.asarray(config.weights, float)
    return NetworkScenario(
        tx_positions=tx,
        rx_positions=rx,
        channels=channels,
        noise_power=noise,
        pmax_w=np.full(K, float(dbm_to_watts(config.pmax_dbm))),
        circuit_tx=circuit_tx,
        circuit_rx=circuit_rx,
        backhaul_full_w=bh_full,
        backhaul_limited_w=bh_limited,
        backhaul_noncoop_w=bh_noncoop,
        weights=weights,
        amp_inefficiency=float(config.amp_inefficiency),
        dth_m=float(config.dth_m),
        init_seed=init_seed,
        trial_index=int(trial_index),
        config=config,
    )
