"""Seeded runs, regret curves, cross-seed aggregation, K sweeps and phase traces."""

from __future__ import annotations

import copy
import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import amplitude as amp
from .env import Environment, build_environment
from .policies import POLICY_IDS, PolicyParams, PolicyTrace, make_policy


@dataclass
class ExperimentConfig:
    policies: list = field(default_factory=lambda: list(POLICY_IDS))
    env: dict = field(default_factory=lambda: {"kind": "fog", "k": 5})
    horizon: int = 3000
    reps: int = 50
    seed: int = 2024
    k_list: list = field(default_factory=lambda: [5, 10, 15])
    policy_params: dict = field(default_factory=dict)
    out_dir: str = "results"
    trace: bool = False
    figures: bool = True

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        unknown = [p for p in self.policies if p not in POLICY_IDS]
        if unknown:
            raise ValueError(f"unknown policy ids: {', '.join(unknown)}")
        if not self.policies:
            raise ValueError("policy list is empty")
        if any(int(k) < 2 for k in self.k_list):
            raise ValueError("every K in k_list must be >= 2")
        PolicyParams.from_dict(self.policy_params)


@dataclass
class Trajectory:
    arms: np.ndarray
    losses: np.ndarray
    traces: list[PolicyTrace] | None = None

    def __len__(self):
        return len(self.arms)


@dataclass
class AggregateResult:
    """Per-policy cumulative-regret statistics across repetitions (population std)."""

    k: int
    horizon: int
    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    final: dict[str, np.ndarray]

    def final_mean(self, policy: str) -> float:
        return float(self.final[policy].mean())

    def final_std(self, policy: str) -> float:
        return float(self.final[policy].std())

    def final_sem(self, policy: str) -> float:
        f = self.final[policy]
        return float(f.std(ddof=1) / np.sqrt(f.size)) if f.size > 1 else 0.0


def rep_streams(base_seed: int, rep: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Environment and policy seed sequences for repetition ``rep``.

    Keyed on (base seed, rep) only, so every policy in a repetition faces the
    same loss matrix and adding policies never perturbs existing runs.
    """
    return (
        np.random.SeedSequence(base_seed, spawn_key=(rep, 0)),
        np.random.SeedSequence(base_seed, spawn_key=(rep, 1)),
    )


def env_k(env_cfg: dict) -> int:
    if env_cfg.get("kind", "fog") == "synthetic":
        return len(env_cfg["means"][0])
    return int(env_cfg.get("k", 5))


def regret_series(arms, loss_matrix) -> np.ndarray:
    """Cumulative regret against the best fixed arm over the whole horizon."""
    loss_matrix = np.asarray(loss_matrix, dtype=float)
    arms = np.asarray(arms, dtype=int)
    if loss_matrix.shape[0] == 0:
        return np.zeros(0)
    best = int(loss_matrix.sum(axis=0).argmin())
    played = loss_matrix[np.arange(len(arms)), arms]
    return np.cumsum(played - loss_matrix[:, best])


def play(policy, env: Environment, record: bool = False) -> Trajectory:
    horizon = env.horizon
    arms = np.empty(horizon, dtype=int)
    losses = env.losses
    traces = [] if record else None
    select, observe = policy.select, policy.observe
    for t in range(horizon):
        arm = select()
        observe(float(losses[t, arm]))
        arms[t] = arm
        if record and policy.last_trace is not None:
            traces.append(policy.last_trace)
    realized = losses[np.arange(horizon), arms] if horizon else np.zeros(0)
    return Trajectory(arms, realized, traces)


def run_single(
    policy_id: str,
    config: ExperimentConfig,
    seed: int,
    rep: int = 0,
    record: bool = False,
    force_zero_phase: bool = False,
) -> tuple[Trajectory, Environment]:
    env_ss, pol_ss = rep_streams(seed, rep)
    env = build_environment(config.env, config.horizon, env_ss)
    policy = make_policy(
        policy_id, env.k, max(config.horizon, 1), np.random.default_rng(pol_ss),
        PolicyParams.from_dict(config.policy_params), force_zero_phase,
    )
    return play(policy, env, record), env


def _run_rep(args) -> dict[str, np.ndarray]:
    config, rep = args
    env_ss, pol_ss = rep_streams(config.seed, rep)
    env = build_environment(config.env, config.horizon, env_ss)
    params = PolicyParams.from_dict(config.policy_params)
    out = {}
    for pid in config.policies:
        rng = np.random.default_rng(pol_ss)
        policy = make_policy(pid, env.k, max(config.horizon, 1), rng, params)
        traj = play(policy, env)
        out[pid] = regret_series(traj.arms, env.losses)
    return out


def worker_count() -> int:
    env = os.environ.get("QBANDIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> AggregateResult:
    """Run every policy for ``config.reps`` repetitions and aggregate regret curves.

    Repetitions may run in worker processes; results are reduced in repetition
    order so the aggregate does not depend on scheduling.
    """
    workers = worker_count() if workers is None else workers
    jobs = [(config, i) for i in range(config.reps)]
    if workers > 1 and config.reps > 1:
        with ProcessPoolExecutor(max_workers=min(workers, config.reps)) as pool:
            runs = list(pool.map(_run_rep, jobs))
    else:
        runs = [_run_rep(j) for j in jobs]

    mean, std, final = {}, {}, {}
    for pid in config.policies:
        curves = np.stack([r[pid] for r in runs]) if config.horizon else np.zeros((config.reps, 0))
        mean[pid] = curves.mean(axis=0)
        std[pid] = curves.std(axis=0)
        final[pid] = curves[:, -1] if config.horizon else np.zeros(config.reps)
    return AggregateResult(env_k(config.env), config.horizon, mean, std, final)


def with_k(config: ExperimentConfig, k: int) -> ExperimentConfig:
    cfg = copy.deepcopy(config)
    cfg.env = dict(cfg.env, k=int(k))
    return cfg


def sweep_k(config: ExperimentConfig, k_list=None, workers: int | None = None) -> dict[int, AggregateResult]:
    """Final-regret statistics per K; CPU lists extend cyclically with K."""
    k_list = config.k_list if k_list is None else k_list
    return {int(k): run_experiment(with_k(config, k), workers) for k in k_list}


def phase_trace(config: ExperimentConfig, rep: int = 0) -> list[tuple]:
    """Per-round (t, p_m, dbar, phi, sigma) rows from one traced ``qb`` run."""
    traj, _ = run_single("qb", config, config.seed, rep=rep, record=True)
    return [(tr.t, float(tr.p[tr.m]), float(tr.dbar), float(tr.phi), float(tr.sigma)) for tr in traj.traces]


def trace_row_ok(p_m: float, phi: float, sigma: float, tol: float = 1e-9) -> bool:
    if p_m >= 1.0:
        return phi == 0.0 and sigma == 1.0
    return (
        amp.phi_min(p_m) - tol <= phi <= 0.0
        and amp.sigma_min(p_m) - tol <= sigma <= 1.0 + tol
    )


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_rows(path: Path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())
    return path


def write_regret_csv(result: AggregateResult, path) -> Path:
    rows = (
        (pid, t + 1, result.mean[pid][t], result.std[pid][t])
        for pid in result.mean
        for t in range(result.horizon)
    )
    return _write_rows(Path(path), ("policy", "t", "mean_cum_regret", "std_cum_regret"), rows)


def write_final_csv(results: dict[int, AggregateResult], path) -> Path:
    rows = (
        (pid, k, res.final_mean(pid), res.final_std(pid))
        for k, res in results.items()
        for pid in res.final
    )
    return _write_rows(Path(path), ("policy", "K", "mean", "std"), rows)


def write_phase_trace_csv(rows, path) -> Path:
    return _write_rows(Path(path), ("t", "p_m", "dbar", "phi", "sigma"), rows)
