"""Fog task-offloading cost model and a synthetic testbed.

Both environments are oblivious: the whole T x K loss matrix is drawn from the
seed at construction, independently of whatever policy later plays on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_CPU_GHZ = (6.0, 6.0, 5.0, 4.0, 3.5)
ADVERSARY_MODES = ("iid-uniform", "sinusoidal", "switching")
FRAC_LO, FRAC_HI = 0.2, 0.5


@dataclass
class ChannelParams:
    tx_power_dbm: float = 24.0
    bandwidth_hz: float = 1e7
    noise_dbm_per_hz: float = -174.0

    @property
    def noise_dbm(self) -> float:
        return self.noise_dbm_per_hz + 10.0 * math.log10(self.bandwidth_hz)


@dataclass
class TaskSpec:
    q_bits: float = 1e6
    complexity_cycles_per_bit: float = 1e3
    output_ratio: float = 0.2

    def __post_init__(self):
        if self.q_bits <= 0 or self.complexity_cycles_per_bit <= 0 or self.output_ratio < 0:
            raise ValueError("task sizes must be positive and output_ratio nonnegative")


@dataclass
class SpProfile:
    max_freq_hz: float
    distance_km: float
    alloc_fraction: float = FRAC_LO

    def __post_init__(self):
        if not 0.0 < self.distance_km <= 0.4 + 1e-12:
            raise ValueError(f"SP distance {self.distance_km} km outside (0, 0.4]")
        if not FRAC_LO - 1e-12 <= self.alloc_fraction <= FRAC_HI + 1e-12:
            raise ValueError(f"allocation fraction {self.alloc_fraction} outside [0.2, 0.5]")


@dataclass
class AdversarySchedule:
    """How each SP's allocated CPU share moves over the horizon.

    ``switching`` splits the horizon into ``epochs`` equal blocks; in each block
    one SP (taken from a seeded permutation) draws from ``generous_band`` while
    the rest draw from ``base_band``.  ``sinusoidal`` phase-shifts a sine per SP;
    ``iid-uniform`` draws every share uniformly from [0.2, 0.5].
    """

    mode: str = "switching"
    epochs: int = 3
    generous_band: tuple[float, float] = (0.4, 0.5)
    base_band: tuple[float, float] = (0.2, 0.35)
    period: int = 1000

    def __post_init__(self):
        if self.mode not in ADVERSARY_MODES:
            raise ValueError(f"unknown adversary mode {self.mode!r}")
        for lo, hi in (self.generous_band, self.base_band):
            if not FRAC_LO <= lo <= hi <= FRAC_HI:
                raise ValueError("allocation bands must sit inside [0.2, 0.5]")
        if self.epochs < 1 or self.period < 1:
            raise ValueError("epochs and period must be positive")

    def fractions(self, horizon: int, k: int, rng: np.random.Generator) -> np.ndarray:
        if self.mode == "iid-uniform":
            return rng.uniform(FRAC_LO, FRAC_HI, size=(horizon, k))
        if self.mode == "sinusoidal":
            t = np.arange(horizon)[:, None]
            shift = 2.0 * np.pi * np.arange(k)[None, :] / k
            mid, amp = (FRAC_LO + FRAC_HI) / 2, (FRAC_HI - FRAC_LO) / 2
            return mid + amp * np.sin(2.0 * np.pi * t / self.period + shift)
        order = rng.permutation(k)
        out = rng.uniform(*self.base_band, size=(horizon, k))
        bounds = np.linspace(0, horizon, self.epochs + 1).round().astype(int)
        for e in range(self.epochs):
            lo, hi = bounds[e], bounds[e + 1]
            out[lo:hi, order[e % k]] = rng.uniform(*self.generous_band, size=hi - lo)
        return out


def pathloss_db(d_km):
    d_km = np.asarray(d_km, dtype=float)
    if np.any(d_km <= 0):
        raise ValueError("distance must be positive")
    out = 128.1 + 37.6 * np.log10(d_km)
    return float(out) if out.ndim == 0 else out


def link_rate(d_km, fading_gain, params: ChannelParams | None = None):
    """Shannon rate B log2(1 + SNR) in bits/s for a link at ``d_km`` with power gain ``fading_gain``."""
    params = params or ChannelParams()
    snr_db = params.tx_power_dbm - pathloss_db(d_km) - params.noise_dbm
    snr = 10.0 ** (snr_db / 10.0) * np.asarray(fading_gain, dtype=float)
    out = params.bandwidth_hz * np.log2(1.0 + snr)
    return float(out) if np.ndim(out) == 0 else out


def offload_cost_seconds(task: TaskSpec, sp: SpProfile, r_up, r_down):
    """Upload + execute + download time for one task."""
    compute = task.q_bits * task.complexity_cycles_per_bit / (sp.alloc_fraction * sp.max_freq_hz)
    return task.q_bits / r_up + compute + task.q_bits * task.output_ratio / r_down


def cpu_list(k: int, base=DEFAULT_CPU_GHZ) -> list[float]:
    """Extend the base CPU list cyclically: F_k = F_{k mod len(base)}."""
    return [float(base[i % len(base)]) for i in range(k)]


class Environment:
    """Common surface: ``k``, ``horizon``, and the oblivious ``losses`` matrix (T x K)."""

    k: int
    horizon: int
    losses: np.ndarray

    def unit_loss(self, t: int, arm: int) -> float:
        return float(self.losses[t, arm])

    def best_arm(self) -> int:
        return int(self.losses.sum(axis=0).argmin())


@dataclass
class FogConfig:
    k: int = 5
    cpu_ghz: list = field(default_factory=lambda: list(DEFAULT_CPU_GHZ))
    range_km: float = 0.4
    task: TaskSpec = field(default_factory=TaskSpec)
    channel: ChannelParams = field(default_factory=ChannelParams)
    adversary: AdversarySchedule = field(default_factory=AdversarySchedule)
    l_cap: float | None = None
    cap_fading_quantile: float = 0.05

    @classmethod
    def from_dict(cls, d: dict) -> "FogConfig":
        d = dict(d)
        d.pop("kind", None)
        if "output_ratio" in d:
            d.setdefault("task", {})["output_ratio"] = d.pop("output_ratio")
        task = TaskSpec(**d.pop("task", {}))
        channel = ChannelParams(**d.pop("channel", {}))
        adv = dict(d.pop("adversary", {}))
        for key in ("generous_band", "base_band"):
            if key in adv:
                adv[key] = tuple(adv[key])
        return cls(task=task, channel=channel, adversary=AdversarySchedule(**adv), **d)


class FogEnvironment(Environment):
    """Per-bit offloading cost to K service providers, normalized into [0, 1].

    Distances are drawn once; allocation fractions follow the adversary
    schedule; Rayleigh fading power is redrawn per round, arm and direction.
    """

    def __init__(self, config: FogConfig, horizon: int, seed):
        if config.k < 2:
            raise ValueError("need at least two service providers")
        self.config = config
        self.k = config.k
        self.horizon = horizon
        rng = np.random.default_rng(seed)
        freqs = np.array(cpu_list(config.k, config.cpu_ghz)) * 1e9
        self.max_freq_hz = freqs
        # U(0, range]: 1 - U[0, 1) never hits 0
        self.distance_km = config.range_km * (1.0 - rng.random(config.k))
        self.fractions = config.adversary.fractions(horizon, config.k, rng)
        fading = rng.exponential(1.0, size=(horizon, config.k, 2))
        self.fading = fading

        task, ch = config.task, config.channel
        with np.errstate(divide="ignore"):
            r_up = link_rate(self.distance_km[None, :], fading[:, :, 0], ch)
            r_down = link_rate(self.distance_km[None, :], fading[:, :, 1], ch)
            per_bit = (
                1.0 / r_up
                + task.complexity_cycles_per_bit / (self.fractions * freqs[None, :])
                + task.output_ratio / r_down
            )
        self.l_cap = config.l_cap if config.l_cap is not None else default_l_cap(config)
        raw = per_bit / self.l_cap
        self.clamp_events = int(np.count_nonzero(raw > 1.0))
        self.losses = np.minimum(raw, 1.0) if horizon else np.zeros((0, config.k))

    def sp_profile(self, t: int, arm: int) -> SpProfile:
        return SpProfile(self.max_freq_hz[arm], self.distance_km[arm], self.fractions[t, arm])

    @property
    def clamp_rate(self) -> float:
        return self.clamp_events / max(1, self.losses.size)


def default_l_cap(config: FogConfig) -> float:
    """Worst-case compute time per bit plus link time at the cell edge under a low fading quantile."""
    task = config.task
    f_min = min(cpu_list(config.k, config.cpu_ghz)) * 1e9
    compute = task.complexity_cycles_per_bit / (FRAC_LO * f_min)
    gain = -math.log(1.0 - config.cap_fading_quantile)
    r_edge = link_rate(config.range_km, gain, config.channel)
    return compute + (1.0 + task.output_ratio) / r_edge


class SyntheticEnvironment(Environment):
    """Piecewise-constant arm means, either emitted directly or as Bernoulli draws.

    ``means`` is a list of per-phase mean vectors; ``switch_at`` holds the round
    indices where each later phase begins.
    """

    def __init__(self, means, horizon: int, switch_at=(), bernoulli: bool = False, seed=None):
        means = np.atleast_2d(np.asarray(means, dtype=float))
        if len(switch_at) != len(means) - 1:
            raise ValueError("need one switch point per extra phase")
        if np.any(means < 0) or np.any(means > 1):
            raise ValueError("means must lie in [0, 1]")
        self.k = means.shape[1]
        self.horizon = horizon
        phase = np.searchsorted(np.asarray(switch_at, dtype=int), np.arange(horizon), side="right")
        mu = means[phase]
        if bernoulli:
            rng = np.random.default_rng(seed)
            self.losses = (rng.random(mu.shape) < mu).astype(float)
        else:
            self.losses = mu.copy()
        self.clamp_events = 0


def build_environment(env_cfg: dict, horizon: int, seed) -> Environment:
    env_cfg = dict(env_cfg)
    kind = env_cfg.pop("kind", "fog")
    if kind == "fog":
        return FogEnvironment(FogConfig.from_dict(env_cfg), horizon, seed)
    if kind == "synthetic":
        env_cfg.pop("k", None)
        return SyntheticEnvironment(
            env_cfg["means"], horizon, env_cfg.get("switch_at", ()),
            env_cfg.get("bernoulli", False), seed,
        )
    raise ValueError(f"unknown environment kind {kind!r}")
