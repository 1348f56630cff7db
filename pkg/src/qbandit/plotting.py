"""Figures written next to the CSV outputs: regret curves, final regret vs K, phase scatter."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import amplitude as amp  # noqa: E402

# fixed metadata keeps PNG bytes stable across runs
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}

STYLE = {
    "qb": ("C3", "-"),
    "qb-sole": ("C1", "--"),
    "exp3ix": ("C0", "-"),
    "exp3p": ("C4", "-."),
    "exp3": ("C2", ":"),
    "ucb1": ("C5", "--"),
    "eps-greedy": ("C7", ":"),
}


def get_plot(width=6.0, height=None):
    """Figure and axes at a golden-ratio aspect by default."""
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    height = height or width * golden_ratio
    fig, ax = plt.subplots(figsize=(width, height))
    ax.tick_params(labelsize=9)
    return fig, ax


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def plot_regret(result, path) -> Path:
    """Mean cumulative regret against t with a one-std band per policy."""
    fig, ax = get_plot()
    t = np.arange(1, result.horizon + 1)
    for pid, mean in result.mean.items():
        color, ls = STYLE.get(pid, (None, "-"))
        std = result.std[pid]
        ax.plot(t, mean, color=color, linestyle=ls, label=pid, linewidth=1.2)
        ax.fill_between(t, mean - std, mean + std, color=color, alpha=0.12, linewidth=0)
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative regret")
    ax.set_title(f"K = {result.k}", fontsize=10)
    ax.legend(fontsize=8, ncol=2)
    return _save(fig, path)


def plot_final(results, path) -> Path:
    """Final regret (mean with std error bars) for each K."""
    fig, ax = get_plot()
    ks = sorted(results)
    policies = list(results[ks[0]].final)
    width = 0.8 / len(policies)
    x = np.arange(len(ks))
    for i, pid in enumerate(policies):
        color, _ = STYLE.get(pid, (None, "-"))
        means = [results[k].final_mean(pid) for k in ks]
        stds = [results[k].final_std(pid) for k in ks]
        ax.bar(x + (i - (len(policies) - 1) / 2) * width, means, width, yerr=stds,
               color=color, label=pid, capsize=2, error_kw={"linewidth": 0.8})
    ax.set_xticks(x, [str(k) for k in ks])
    ax.set_xlabel("K")
    ax.set_ylabel("regret at T")
    ax.legend(fontsize=8, ncol=2)
    return _save(fig, path)


def plot_phase_trace(rows, path) -> Path:
    """Selected phi and sigma against p_m, with the feasible boundaries."""
    rows = np.asarray(rows, dtype=float).reshape(-1, 5)
    p_m, phi, sigma = rows[:, 1], rows[:, 3], rows[:, 4]
    fig, (ax_phi, ax_sig) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax_phi.scatter(p_m, phi, s=3, c=rows[:, 0], cmap="viridis", rasterized=True)
    ax_sig.scatter(p_m, sigma, s=3, c=rows[:, 0], cmap="viridis", rasterized=True)
    grid = np.linspace(0.005, 0.995, 300)
    ax_phi.plot(grid, [amp.phi_min(p) for p in grid], "k--", linewidth=0.8, label="phi_min")
    ax_sig.plot(grid, [amp.sigma_min(p) for p in grid], "k--", linewidth=0.8, label="sigma_min")
    ax_phi.set_ylabel("phi (rad)")
    ax_sig.set_ylabel("sigma")
    for ax in (ax_phi, ax_sig):
        ax.set_xlabel("p_m")
        ax.set_xlim(0, 1)
        ax.legend(fontsize=8)
    return _save(fig, path)
