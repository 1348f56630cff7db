"""Randomized property checks for the amplitude core and the policies.

Each check returns ``(passed, detail)``.  ``run_all`` is what ``qbandit selftest``
executes; it is seeded, so a pristine build gives the same verdicts every time.
"""

from __future__ import annotations

import math

import numpy as np

from . import amplitude as amp
from .policies import (
    ScoreState,
    ix_estimate,
    make_policy,
    probabilities_from_scores,
    qb_select,
    schedules_default,
)

TOL = 1e-9


def check_unitarity(rng, n=10_000):
    p = rng.uniform(1e-6, 1 - 1e-6, n)
    phases = rng.uniform(-math.pi, math.pi, (n, 2))
    worst = max(
        abs(r.rho * pm + r.sigma * (1 - pm) - 1)
        for pm, (a, b) in zip(p, phases)
        for r in [amp.update_ratios(pm, a, b)]
    )
    return worst <= TOL, f"max |rho p + sigma (1-p) - 1| = {worst:.2e}"


def check_oracle_equivalence(rng, n=250):
    worst = 0.0
    for k in (2, 4, 8, 16):
        for _ in range(n):
            p = rng.dirichlet(np.ones(k))
            amps = np.sqrt(p) * np.exp(1j * rng.uniform(-math.pi, math.pi, k))
            m = int(rng.integers(k))
            phi = rng.uniform(-math.pi, 0)
            if not 0 < p[m] < 1:
                continue
            a = np.abs(amp.grover_apply(amps, m, phi)) ** 2
            b = amp.amplified_distribution(p, m, phi)
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst <= TOL, f"max deviation = {worst:.2e}"


def check_sign_law(rng, n=10_000):
    bad, worst = 0, 0.0
    for pm, phi in zip(rng.uniform(1e-4, 1 - 1e-4, n), rng.uniform(-math.pi, math.pi, n)):
        rho, sigma = amp.update_ratios(pm, phi)
        kap = amp.kappa(pm, phi)
        if (1 - rho) * (1 - sigma) > TOL:
            bad += 1
        worst = max(worst, abs((1 - rho) - (pm - 1) * kap), abs((1 - sigma) - pm * kap))
    return bad == 0 and worst <= TOL, f"{bad} sign violations, identity error {worst:.2e}"


def check_round_trip(rng, n=2000):
    worst = 0.0
    for pm in rng.uniform(0.01, 0.99, n):
        x = rng.uniform(amp.sigma_min(pm), 1.0)
        worst = max(worst, abs(amp.sigma_of_phi(pm, amp.solve_phi(pm, x)) - x))
    return worst <= TOL, f"max round-trip error = {worst:.2e}"


def check_monotone(rng=None):
    for pm in (0.05, 0.1, 0.25, 0.26, 0.5, 0.75, 0.9):
        grid = np.linspace(amp.phi_min(pm), 0.0, 1000)
        s = np.array([amp.sigma_of_phi(pm, g) for g in grid])
        if np.any(np.diff(s) < -TOL):
            return False, f"sigma decreases for p_m={pm}"
    return True, "sigma nondecreasing on [phi_min, 0]"


def check_reduction(rng, horizon=500):
    k = 5
    losses = rng.random((horizon, k))
    seqs = []
    for pid, zero in (("qb", True), ("exp3ix", False)):
        pol = make_policy(pid, k, horizon, np.random.default_rng(7), force_zero_phase=zero)
        arms = []
        for t in range(horizon):
            a = pol.select()
            pol.observe(float(losses[t, a]))
            arms.append(a)
        seqs.append(arms)
    return seqs[0] == seqs[1], "phi=0 amplified policy matches exp3ix"


def check_dominance(rng, n=2000):
    sched = schedules_default(4, 10, warn=False)
    for _ in range(n):
        scores = ScoreState(rng.exponential(2.0, 4))
        _, tr = qb_select(scores, sched, rng)
        if tr.phi < 0:
            others = np.delete(np.arange(4), tr.m)
            if not (tr.p_amp[tr.m] > tr.p[tr.m] and np.all(tr.p_amp[others] < tr.p[others])):
                return False, f"no dominance shift at lhat={scores.lhat}"
        if abs(tr.p_amp.sum() - 1) > TOL or np.any(tr.p_amp < 0):
            return False, "amplified distribution invalid"
    return True, "target gains, others lose whenever phi < 0"


def check_ix_bias(rng, n=500):
    for _ in range(n):
        p = probabilities_from_scores(rng.exponential(1.0, 3))
        loss = rng.random(3)
        gamma = rng.uniform(0, 0.5)
        for k in range(3):
            expect = sum(p[j] * ix_estimate(loss[k], j == k, p[j], gamma) for j in range(3))
            if expect > loss[k] + TOL:
                return False, "IX estimate exceeds true loss in expectation"
    return True, "E[IX estimate] <= loss"


CHECKS = {
    "amplitude.unitarity": check_unitarity,
    "amplitude.oracle_equivalence": check_oracle_equivalence,
    "amplitude.sign_law": check_sign_law,
    "amplitude.round_trip": check_round_trip,
    "amplitude.monotone": check_monotone,
    "policies.reduction": check_reduction,
    "policies.dominance": check_dominance,
    "policies.ix_bias": check_ix_bias,
}


def run_all(seed: int = 0, echo=print) -> tuple[int, int]:
    passed = failed = 0
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(np.random.default_rng(seed))
        except Exception as exc:  # a crash counts as a failure
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        passed += ok
        failed += not ok
    echo(f"{passed} passed, {failed} failed")
    return passed, failed
