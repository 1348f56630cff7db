"""Adversarial bandits with amplitude-amplified exploration, plus a fog offloading simulator."""

from .amplitude import (
    amplified_distribution,
    grover_apply,
    kappa,
    measure,
    phi_from_disparity,
    phi_min,
    sigma_min,
    solve_phi,
    update_ratios,
)
from .harness import ExperimentConfig, run_experiment, run_single, sweep_k
from .policies import POLICY_IDS, make_policy

__version__ = "0.1.0"
