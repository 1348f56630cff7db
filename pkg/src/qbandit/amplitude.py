"""Classical simulation of a single phase-controlled Grover iteration.

An arm distribution ``p`` is viewed as the squared magnitudes of an amplitude
vector.  One iteration ``G = -U(phi2, psi0) U(phi1, m)`` multiplies the target
arm's probability by ``rho`` and every other arm's probability by ``sigma``.
With matched phases (``phi1 == phi2 == phi``) the two ratios move in opposite
directions, and on ``[phi_min(p_m), 0]`` the non-target ratio is a monotone
function of ``phi`` that can be inverted in closed form.
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np

NORM_TOL = 1e-9


class UpdateRatios(NamedTuple):
    rho: float
    sigma: float


def _check_pm(p_m: float) -> None:
    if not 0.0 < p_m < 1.0:
        raise ValueError(f"target probability must lie in (0, 1), got {p_m!r}")


def validate_amplitudes(amps) -> np.ndarray:
    """Return ``amps`` as a complex array after checking K >= 2 and unit norm."""
    amps = np.asarray(amps, dtype=complex)
    if amps.ndim != 1 or amps.size < 2:
        raise ValueError("amplitude state needs at least two arms")
    norm = float(np.sum(np.abs(amps) ** 2))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"amplitude state is not normalized (sum |g|^2 = {norm!r})")
    return amps


def target_arm(p) -> int:
    """Index of the largest probability; ties go to the lowest index."""
    return int(np.argmax(p))


def grover_apply(amps, m: int, phi1: float, phi2: float | None = None) -> np.ndarray:
    """Apply one iteration of ``G = -U(phi2, psi0) U(phi1, m)`` to ``amps``.

    ``phi2`` defaults to ``phi1`` (phase matching).  The reflections are applied
    as rank-one updates, so the cost is O(K).  The global minus sign is kept.
    """
    psi0 = validate_amplitudes(amps)
    if not 0 <= m < psi0.size:
        raise ValueError(f"target arm {m} out of range for K={psi0.size}")
    if phi2 is None:
        phi2 = phi1
    e1 = cmath.exp(1j * phi1)
    e2 = cmath.exp(1j * phi2)

    # oracle: I - (1 - e^{j phi1}) |m><m|
    v = psi0.copy()
    v[m] -= (1.0 - e1) * psi0[m]
    # diffusion: I - (1 - e^{j phi2}) |psi0><psi0|
    overlap = np.vdot(psi0, v)
    v -= (1.0 - e2) * overlap * psi0
    return -v


def update_ratios(p_m: float, phi1: float, phi2: float | None = None) -> UpdateRatios:
    """Probability multipliers for the target and non-target arms after one iteration."""
    _check_pm(p_m)
    if phi2 is None:
        phi2 = phi1
    e1 = cmath.exp(1j * phi1)
    e2 = cmath.exp(1j * phi2)
    cross = (1.0 - e1) * (1.0 - e2) * p_m
    rho = abs((1.0 - e1 - e2) - cross) ** 2
    sigma = abs(-e2 - cross) ** 2
    return UpdateRatios(rho, sigma)


def sigma_of_phi(p_m: float, phi: float) -> float:
    return update_ratios(p_m, phi, phi).sigma


def kappa(p_m: float, phi: float) -> float:
    """Shared factor with ``1 - rho = (p_m - 1) kappa`` and ``1 - sigma = p_m kappa``."""
    _check_pm(p_m)
    s = math.sin(phi / 2.0)
    return 4.0 * (2.0 * p_m - 1.0) * s * s * (math.cos(phi) - 1.0) + 2.0 * math.sin(phi) ** 2


def sigma_min(p_m: float) -> float:
    """Smallest non-target ratio reachable on the monotone phase range."""
    _check_pm(p_m)
    return max(1.0 - 4.0 * p_m, 0.0) ** 2


def _w(p_m: float, x: float) -> float:
    return 1.0 - (1.0 - math.sqrt(x)) / (2.0 * p_m)


def _clamped_acos(w: float) -> float:
    return math.acos(min(1.0, max(-1.0, w)))


def phi_min(p_m: float) -> float:
    """Left end of the phase range on which ``sigma`` increases with ``phi``."""
    _check_pm(p_m)
    return -min(_clamped_acos(_w(p_m, 0.0)), math.pi)


def solve_phi(p_m: float, sigma_target: float) -> float:
    """Matched phase in ``[phi_min(p_m), 0]`` whose non-target ratio is ``sigma_target``.

    Raises ValueError when the target is above 1 or below ``sigma_min(p_m)``;
    callers wanting the closest feasible phase should clamp the target first.
    """
    _check_pm(p_m)
    if sigma_target > 1.0:
        raise ValueError(f"sigma target {sigma_target!r} exceeds 1")
    lo = sigma_min(p_m)
    if sigma_target < lo - 1e-12:
        raise ValueError(f"sigma target {sigma_target!r} is below sigma_min={lo!r} for p_m={p_m!r}")
    return 0.0 - _clamped_acos(_w(p_m, max(sigma_target, 0.0)))


def phi_from_disparity(p_m: float, dbar: float) -> float:
    """Map an average relative disparity in [0, 1] linearly onto ``[sigma_min, 1]`` and solve for phi."""
    if not 0.0 <= dbar <= 1.0:
        raise ValueError(f"disparity must lie in [0, 1], got {dbar!r}")
    lo = sigma_min(p_m)
    return solve_phi(p_m, (1.0 - lo) * dbar + lo)


def amplified_distribution(p, m: int, phi: float) -> np.ndarray:
    """Closed-form probabilities after one matched-phase iteration targeting ``m``.

    No renormalization is applied; unitarity keeps the sum at one.  A degenerate
    target (``p[m]`` equal to 0 or 1) leaves ``p`` unchanged.
    """
    p = np.asarray(p, dtype=float)
    if abs(p.sum() - 1.0) > NORM_TOL:
        raise ValueError("probability vector does not sum to 1")
    p_m = float(p[m])
    if p_m <= 0.0 or p_m >= 1.0:
        return p.copy()
    rho, sigma = update_ratios(p_m, phi, phi)
    out = p * sigma
    out[m] = rho * p_m
    return out


def measure(p, rng: np.random.Generator) -> int:
    """Collapse onto one arm: inverse-CDF draw over arms in ascending index order."""
    cdf = np.cumsum(p)
    # scaling by cdf[-1] keeps zero-probability tail arms unreachable
    u = rng.random() * cdf[-1]
    k = int(np.searchsorted(cdf, u, side="right"))
    if k == len(cdf):
        k = int(np.flatnonzero(np.asarray(p) > 0)[-1])
    return k
