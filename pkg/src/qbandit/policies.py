"""Bandit policies over a common ``select()`` / ``observe(loss)`` interface.

The score-based family keeps cumulative weighted loss estimates ``lhat`` and
samples from ``p ~ exp(-lhat)``.  The amplified policy (``qb``) reshapes that
distribution with one matched-phase Grover iteration before sampling; the
Exp3 and Exp3-IX baselines are the same machinery with the phase held at 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import amplitude as amp

log = logging.getLogger(__name__)

POLICY_IDS = ("qb", "qb-sole", "exp3ix", "exp3p", "exp3", "ucb1", "eps-greedy")
DBAR_MODES = ("exclude-target", "all-arms")
PHASE_MODES = ("matched", "zero", "sole")


@dataclass
class ScoreState:
    """Cumulative weighted loss estimates, one per arm, and the round counter."""

    lhat: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, k: int) -> "ScoreState":
        return cls(np.zeros(k))

    def __post_init__(self):
        self.lhat = np.asarray(self.lhat, dtype=float)
        if not np.all(np.isfinite(self.lhat)) or np.any(self.lhat < 0):
            raise ValueError("scores must be finite and nonnegative")


@dataclass
class PolicyTrace:
    t: int
    p: np.ndarray
    m: int
    dbar: float
    phi: float
    rho: float
    sigma: float
    p_amp: np.ndarray
    arm: int
    loss: float = math.nan
    estimate: float = math.nan


@dataclass
class ScheduleParams:
    """Learning-rate and implicit-exploration schedules, indexed by round t >= 1."""

    eta: Callable[[int], float]
    gamma: Callable[[int], float]
    horizon: int
    k: int

    def violations(self) -> list[int]:
        """Rounds where eta_t <= 1/t or gamma_t <= 1/(2t)."""
        return [
            t
            for t in range(1, self.horizon + 1)
            if self.eta(t) <= 1.0 / t or self.gamma(t) <= 1.0 / (2 * t)
        ]

    def validate(self) -> None:
        for t in range(1, self.horizon + 1):
            e, g = self.eta(t), self.gamma(t)
            if not (0.0 < e <= 1.0 and 0.0 <= g <= 1.0):
                raise ValueError(f"schedule out of range at t={t}: eta={e}, gamma={g}")
        bad = self.violations()
        if bad:
            log.warning(
                "improvement conditions eta_t > 1/t, gamma_t > 1/(2t) fail on %d of %d rounds (first t=%d)",
                len(bad), self.horizon, bad[0],
            )


def anytime_eta(k: int) -> Callable[[int], float]:
    c = 2.0 * math.log(k) / k
    return lambda t: min(1.0, math.sqrt(c / t))


def schedules_default(k: int, horizon: int, warn: bool = True) -> ScheduleParams:
    """Anytime Exp3-IX schedule, eta_t = 2 gamma_t = sqrt(2 ln K / (K t)), capped at 1."""
    if k < 2 or horizon < 1:
        raise ValueError("need K >= 2 and T >= 1")
    eta = anytime_eta(k)
    sched = ScheduleParams(eta=eta, gamma=lambda t: eta(t) / 2.0, horizon=horizon, k=k)
    if warn:
        sched.validate()
    return sched


def schedules_fixed(k: int, horizon: int, gamma: float = 0.0) -> ScheduleParams:
    """Fixed-horizon Exp3 rate eta = sqrt(2 ln K / (T K))."""
    eta = min(1.0, math.sqrt(2.0 * math.log(k) / (horizon * k)))
    return ScheduleParams(eta=lambda t: eta, gamma=lambda t: gamma, horizon=horizon, k=k)


def probabilities_from_scores(scores) -> np.ndarray:
    lhat = scores.lhat if isinstance(scores, ScoreState) else np.asarray(scores, dtype=float)
    w = np.exp(lhat.min() - lhat)
    return w / w.sum()


def relative_disparity(scores, m: int, mode: str = "exclude-target") -> tuple[np.ndarray, float]:
    """Per-arm disparity ``exp(-(L_k - min L))`` and its average.

    The default average skips the target arm; ``mode="all-arms"`` includes it.
    """
    lhat = scores.lhat if isinstance(scores, ScoreState) else np.asarray(scores, dtype=float)
    d = np.exp(lhat.min() - lhat)
    if mode == "exclude-target":
        dbar = (d.sum() - d[m]) / (d.size - 1)
    elif mode == "all-arms":
        dbar = d.mean()
    else:
        raise ValueError(f"unknown disparity mode {mode!r}")
    return d, min(1.0, float(dbar))


def ix_estimate(loss: float, chosen: bool, p_used: float, gamma: float) -> float:
    """Implicit-exploration loss estimate ``loss / (p + gamma)`` for the played arm, else 0."""
    if p_used + gamma <= 0.0:
        raise ValueError("p + gamma must be positive")
    if not chosen:
        return 0.0
    return loss / (p_used + gamma)


def qb_select(
    scores: ScoreState,
    schedules: ScheduleParams | None,
    rng: np.random.Generator,
    phase_mode: str = "matched",
    dbar_mode: str = "exclude-target",
) -> tuple[int, PolicyTrace]:
    """Draw one arm from the amplified score distribution.

    ``phase_mode`` is ``"matched"`` for the full two-sided update, ``"zero"`` to
    skip amplification, or ``"sole"`` to scale only the target and renormalize.
    """
    lhat = scores.lhat
    w = np.exp(lhat.min() - lhat)
    total = w.sum()
    p = w / total
    m = int(w.argmax())
    k = w.size
    if dbar_mode == "exclude-target":
        dbar = min(1.0, (total - w[m]) / (k - 1))
    else:
        dbar = min(1.0, total / k)
    p_m = float(p[m])

    if phase_mode == "zero" or p_m >= 1.0:
        phi, rho, sigma = 0.0, 1.0, 1.0
        p_amp = p
    else:
        phi = amp.phi_from_disparity(p_m, dbar)
        rho, sigma = amp.update_ratios(p_m, phi, phi)
        if phase_mode == "matched":
            p_amp = p * sigma
            p_amp[m] = rho * p_m
        elif phase_mode == "sole":
            p_amp = p.copy()
            p_amp[m] = min(rho * p_m, 1.0)
            p_amp /= p_amp.sum()
        else:
            raise ValueError(f"unknown phase mode {phase_mode!r}")

    arm = amp.measure(p_amp, rng)
    trace = PolicyTrace(scores.t + 1, p, m, dbar, phi, rho, sigma, p_amp, arm)
    return arm, trace


def qb_observe(
    scores: ScoreState,
    trace: PolicyTrace,
    loss: float,
    schedules: ScheduleParams,
    ix_probability: str = "post",
) -> ScoreState:
    """Add ``eta_t * loss / (p_t + gamma_t)`` to the played arm's score, in place.

    ``ix_probability`` picks the sampling distribution (``"post"``) or the
    pre-amplification one (``"pre"``) for the estimate's denominator.
    """
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"loss {loss!r} outside [0, 1]; normalize in the environment")
    t = trace.t
    p_used = trace.p_amp[trace.arm] if ix_probability == "post" else trace.p[trace.arm]
    est = ix_estimate(loss, True, float(p_used), schedules.gamma(t))
    trace.loss = loss
    trace.estimate = est
    scores.lhat[trace.arm] += schedules.eta(t) * est
    scores.t = t
    return scores


class Policy:
    """Base class; subclasses implement ``select`` and ``observe``."""

    name = "policy"
    last_trace: PolicyTrace | None = None

    def select(self) -> int:
        raise NotImplementedError

    def observe(self, loss: float) -> None:
        raise NotImplementedError


class ScorePolicy(Policy):
    """Exponential-weights policy with optional amplification (qb, qb-sole, exp3ix, exp3)."""

    def __init__(
        self,
        k: int,
        schedules: ScheduleParams,
        rng: np.random.Generator,
        phase_mode: str = "matched",
        dbar_mode: str = "exclude-target",
        ix_probability: str = "post",
        name: str = "qb",
    ):
        if phase_mode not in PHASE_MODES:
            raise ValueError(f"unknown phase mode {phase_mode!r}")
        if dbar_mode not in DBAR_MODES:
            raise ValueError(f"unknown disparity mode {dbar_mode!r}")
        if ix_probability not in ("pre", "post"):
            raise ValueError(f"ix_probability must be 'pre' or 'post', got {ix_probability!r}")
        self.scores = ScoreState.zeros(k)
        self.schedules = schedules
        self.rng = rng
        self.phase_mode = phase_mode
        self.dbar_mode = dbar_mode
        self.ix_probability = ix_probability
        self.name = name
        self.last_trace = None

    def select(self) -> int:
        arm, self.last_trace = qb_select(
            self.scores, self.schedules, self.rng, self.phase_mode, self.dbar_mode
        )
        return arm

    def observe(self, loss: float) -> None:
        qb_observe(self.scores, self.last_trace, loss, self.schedules, self.ix_probability)


class Exp3P(Policy):
    """Exp3.P on gains ``1 - loss`` with uniform mixing and an optimistic bias.

    Defaults follow the any-confidence tuning: beta = sqrt(ln K / (T K)),
    eta = 0.95 sqrt(ln K / (T K)), gamma = 1.05 sqrt(K ln K / T).
    """

    name = "exp3p"

    def __init__(self, k, horizon, rng, eta_scale=0.95, gamma_scale=1.05, beta_scale=1.0):
        base = math.log(k) / (horizon * k)
        self.k = k
        self.rng = rng
        self.beta = beta_scale * math.sqrt(base)
        self.eta = eta_scale * math.sqrt(base)
        self.gamma = min(1.0, gamma_scale * math.sqrt(k * math.log(k) / horizon))
        self.gains = np.zeros(k)
        self.p = np.full(k, 1.0 / k)
        self.arm = -1

    def select(self) -> int:
        w = np.exp(self.eta * (self.gains - self.gains.max()))
        self.p = (1.0 - self.gamma) * w / w.sum() + self.gamma / self.k
        self.arm = amp.measure(self.p, self.rng)
        return self.arm

    def observe(self, loss: float) -> None:
        est = self.beta / self.p
        est[self.arm] += (1.0 - loss) / self.p[self.arm]
        self.gains += est


class UCB1(Policy):
    """Lower-confidence-bound play on losses; each arm is tried once first."""

    name = "ucb1"

    def __init__(self, k):
        self.k = k
        self.n = np.zeros(k)
        self.sums = np.zeros(k)
        self.t = 0
        self.arm = -1

    def select(self) -> int:
        if self.t < self.k:
            self.arm = self.t
        else:
            index = self.sums / self.n - np.sqrt(2.0 * math.log(self.t) / self.n)
            self.arm = int(index.argmin())
        return self.arm

    def observe(self, loss: float) -> None:
        self.n[self.arm] += 1
        self.sums[self.arm] += loss
        self.t += 1


class EpsGreedy(Policy):
    name = "eps-greedy"

    def __init__(self, k, rng, eps=0.1):
        if not 0.0 <= eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")
        self.k = k
        self.rng = rng
        self.eps = eps
        self.n = np.zeros(k)
        self.sums = np.zeros(k)
        self.arm = -1

    def select(self) -> int:
        if self.eps > 0.0 and self.rng.random() < self.eps:
            self.arm = int(self.rng.integers(self.k))
        else:
            # unplayed arms count as zero loss so each gets tried
            means = np.divide(self.sums, self.n, out=np.zeros(self.k), where=self.n > 0)
            self.arm = int(means.argmin())
        return self.arm

    def observe(self, loss: float) -> None:
        self.n[self.arm] += 1
        self.sums[self.arm] += loss


@dataclass
class PolicyParams:
    eps: float = 0.1
    dbar_mode: str = "exclude-target"
    ix_probability: str = "post"
    schedule: str = "anytime"
    exp3p: dict = field(default_factory=lambda: {"eta_scale": 0.95, "gamma_scale": 1.05, "beta_scale": 1.0})

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")
        if self.dbar_mode not in DBAR_MODES:
            raise ValueError(f"unknown disparity mode {self.dbar_mode!r}")
        if self.ix_probability not in ("pre", "post"):
            raise ValueError(f"ix_probability must be 'pre' or 'post', got {self.ix_probability!r}")
        if self.schedule not in ("anytime", "fixed"):
            raise ValueError(f"unknown schedule {self.schedule!r}")

    @classmethod
    def from_dict(cls, d: dict | None) -> "PolicyParams":
        return cls(**(d or {}))


def make_policy(
    policy_id: str,
    k: int,
    horizon: int,
    rng: np.random.Generator,
    params: PolicyParams | None = None,
    force_zero_phase: bool = False,
) -> Policy:
    """Build a policy from its identifier (see ``POLICY_IDS``)."""
    params = params or PolicyParams()
    if policy_id in ("qb", "qb-sole", "exp3ix"):
        if params.schedule == "anytime":
            sched = schedules_default(k, horizon, warn=False)
        elif params.schedule == "fixed":
            eta = min(1.0, math.sqrt(2.0 * math.log(k) / (horizon * k)))
            sched = ScheduleParams(lambda t: eta, lambda t: eta / 2.0, horizon, k)
        else:
            raise ValueError(f"unknown schedule {params.schedule!r}")
        mode = {"qb": "matched", "qb-sole": "sole", "exp3ix": "zero"}[policy_id]
        if force_zero_phase:
            mode = "zero"
        return ScorePolicy(k, sched, rng, mode, params.dbar_mode, params.ix_probability, policy_id)
    if policy_id == "exp3":
        return ScorePolicy(k, schedules_fixed(k, horizon), rng, "zero", name="exp3")
    if policy_id == "exp3p":
        return Exp3P(k, horizon, rng, **params.exp3p)
    if policy_id == "ucb1":
        return UCB1(k)
    if policy_id == "eps-greedy":
        return EpsGreedy(k, rng, params.eps)
    raise ValueError(f"unknown policy {policy_id!r}; expected one of {', '.join(POLICY_IDS)}")
