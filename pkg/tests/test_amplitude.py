import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbandit import amplitude as amp

SQ = math.sqrt


def grover_matrix(amps, m, phi1, phi2):
    """Dense K x K oracle: G = -U(phi2, psi0) U(phi1, m)."""
    psi = np.asarray(amps, dtype=complex).reshape(-1, 1)
    k = psi.shape[0]
    eye = np.eye(k, dtype=complex)
    ket_m = eye[:, [m]]
    u1 = eye - (1 - np.exp(1j * phi1)) * (ket_m @ ket_m.conj().T)
    u2 = eye - (1 - np.exp(1j * phi2)) * (psi @ psi.conj().T)
    return -u2 @ u1


def oracle_probs(amps, m, phi1, phi2):
    return np.abs(grover_matrix(amps, m, phi1, phi2) @ np.asarray(amps, dtype=complex)) ** 2


pm_st = st.floats(min_value=1e-4, max_value=1 - 1e-4)
phase_st = st.floats(min_value=-math.pi, max_value=math.pi)


class TestGroverApply:
    def test_identity_phases(self):
        amps = [SQ(0.5), SQ(0.25), SQ(0.25)]
        out = amp.grover_apply(amps, 0, 0.0, 0.0)
        np.testing.assert_allclose(np.abs(out) ** 2, [0.5, 0.25, 0.25], atol=1e-12)
        # equal to the input up to a global phase
        phase = out[0] / amps[0]
        np.testing.assert_allclose(out, phase * np.asarray(amps), atol=1e-12)

    @pytest.mark.parametrize(
        "amps,m,phi,expected",
        [
            ([SQ(0.5), SQ(0.25), SQ(0.25)], 0, -math.pi / 2, [1.0, 0.0, 0.0]),
            ([SQ(0.125), SQ(0.875)], 0, -math.pi, [0.78125, 0.21875]),
        ],
    )
    def test_examples_against_matrix(self, amps, m, phi, expected):
        np.testing.assert_allclose(oracle_probs(amps, m, phi, phi), expected, atol=1e-12)
        np.testing.assert_allclose(np.abs(amp.grover_apply(amps, m, phi)) ** 2, expected, atol=1e-12)

    def test_matches_matrix_including_phase(self):
        rng = np.random.default_rng(3)
        for k in (2, 3, 7):
            p = rng.dirichlet(np.ones(k))
            amps = np.sqrt(p) * np.exp(1j * rng.uniform(-3, 3, k))
            phi1, phi2 = rng.uniform(-3, 3, 2)
            expected = grover_matrix(amps, 1, phi1, phi2) @ amps
            np.testing.assert_allclose(amp.grover_apply(amps, 1, phi1, phi2), expected, atol=1e-12)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            amp.grover_apply([0.5, 0.5], 0, 0.1)

    def test_rejects_bad_target(self):
        with pytest.raises(ValueError):
            amp.grover_apply([SQ(0.5), SQ(0.5)], 2, 0.1)

    def test_rejects_single_arm(self):
        with pytest.raises(ValueError):
            amp.grover_apply([1.0], 0, 0.1)


class TestUpdateRatios:
    @pytest.mark.parametrize(
        "pm,phi,rho,sigma",
        [
            (0.5, 0.0, 1.0, 1.0),
            (0.5, -math.pi / 2, 2.0, 0.0),
            (0.125, -math.pi, 6.25, 0.25),
        ],
    )
    def test_examples(self, pm, phi, rho, sigma):
        r = amp.update_ratios(pm, phi, phi)
        assert r.rho == pytest.approx(rho, abs=1e-12)
        assert r.sigma == pytest.approx(sigma, abs=1e-12)

    @pytest.mark.parametrize("pm", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_degenerate(self, pm):
        with pytest.raises(ValueError):
            amp.update_ratios(pm, 0.1)

    @given(pm_st, phase_st, phase_st)
    def test_unitarity(self, pm, phi1, phi2):
        r = amp.update_ratios(pm, phi1, phi2)
        assert r.rho * pm + r.sigma * (1 - pm) == pytest.approx(1.0, abs=1e-9)

    @given(st.integers(2, 16), st.integers(0, 10_000), phase_st, phase_st)
    @settings(max_examples=60)
    def test_ratios_match_matrix(self, k, seed, phi1, phi2):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(k))
        m = int(rng.integers(k))
        out = oracle_probs(np.sqrt(p), m, phi1, phi2)
        r = amp.update_ratios(p[m], phi1, phi2)
        assert out[m] == pytest.approx(r.rho * p[m], abs=1e-9)
        others = np.delete(np.arange(k), m)
        np.testing.assert_allclose(out[others], r.sigma * p[others], atol=1e-9)


class TestKappa:
    @pytest.mark.parametrize("pm,phi,expected", [(0.5, 0.0, 0.0), (0.5, -math.pi / 2, 2.0), (0.125, -math.pi, 6.0)])
    def test_examples(self, pm, phi, expected):
        assert amp.kappa(pm, phi) == pytest.approx(expected, abs=1e-12)

    @given(pm_st, phase_st)
    def test_identities_and_sign_law(self, pm, phi):
        rho, sigma = amp.update_ratios(pm, phi)
        k = amp.kappa(pm, phi)
        assert 1 - rho == pytest.approx((pm - 1) * k, abs=1e-9)
        assert 1 - sigma == pytest.approx(pm * k, abs=1e-9)
        assert (1 - rho) * (1 - sigma) <= 1e-12


class TestPhaseRange:
    @pytest.mark.parametrize("pm,expected", [(0.25, 0.0), (0.125, 0.25), (0.5, 0.0), (0.1, 0.36)])
    def test_sigma_min(self, pm, expected):
        assert amp.sigma_min(pm) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("pm,expected", [(0.5, -math.pi / 2), (0.25, -math.pi), (0.125, -math.pi)])
    def test_phi_min(self, pm, expected):
        assert amp.phi_min(pm) == pytest.approx(expected, abs=1e-12)

    @given(pm_st)
    def test_sigma_min_is_attained_at_phi_min(self, pm):
        assert amp.sigma_of_phi(pm, amp.phi_min(pm)) == pytest.approx(amp.sigma_min(pm), abs=1e-9)
        assert -math.pi <= amp.phi_min(pm) < 0

    def test_literal_max_form_would_be_wrong(self):
        # (1 - 4p)^2 at p = 1/2 is 1, but the reachable minimum there is 0
        assert amp.sigma_of_phi(0.5, amp.phi_min(0.5)) == pytest.approx(0.0, abs=1e-12)
        assert max((1 - 4 * 0.5) ** 2, 0) == 1.0

    @pytest.mark.parametrize("pm", [0.05, 0.1, 0.25, 0.26, 0.5, 0.75, 0.9])
    def test_sigma_monotone(self, pm):
        grid = np.linspace(amp.phi_min(pm), 0.0, 1000)
        s = np.array([amp.sigma_of_phi(pm, g) for g in grid])
        assert np.all(np.diff(s) >= -1e-12)
        assert s[-1] == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0.02, 0.98), st.floats(0.0, 1.0))
    def test_attenuation_decreases_with_pm(self, pm, frac):
        lo = amp.phi_min(pm)
        phi = lo + frac * (0 - lo)
        if phi >= 0 or phi <= lo:
            return
        assert amp.sigma_of_phi(pm, phi) < 1
        h = 1e-6
        if phi >= amp.phi_min(pm + h):
            assert amp.sigma_of_phi(pm + h, phi) < amp.sigma_of_phi(pm, phi)


class TestSolvePhi:
    @pytest.mark.parametrize("pm,target,expected", [(0.3, 1.0, 0.0), (0.5, 0.0, -math.pi / 2), (0.25, 0.0, -math.pi)])
    def test_examples(self, pm, target, expected):
        assert amp.solve_phi(pm, target) == pytest.approx(expected, abs=1e-12)

    @given(pm_st, st.floats(0.0, 1.0))
    def test_round_trip(self, pm, frac):
        lo = amp.sigma_min(pm)
        x = lo + frac * (1 - lo)
        phi = amp.solve_phi(pm, x)
        assert amp.phi_min(pm) - 1e-12 <= phi <= 0.0
        assert amp.sigma_of_phi(pm, phi) == pytest.approx(x, abs=1e-9)

    def test_infeasible_target(self):
        with pytest.raises(ValueError):
            amp.solve_phi(0.1, 0.1)  # sigma_min(0.1) = 0.36

    def test_target_above_one(self):
        with pytest.raises(ValueError):
            amp.solve_phi(0.3, 1.01)

    @pytest.mark.parametrize("pm,dbar,expected", [(0.5, 1.0, 0.0), (0.5, 0.0, -math.pi / 2), (0.125, 0.0, -math.pi)])
    def test_phi_from_disparity(self, pm, dbar, expected):
        assert amp.phi_from_disparity(pm, dbar) == pytest.approx(expected, abs=1e-12)

    def test_phi_from_disparity_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            amp.phi_from_disparity(0.5, 1.5)


class TestAmplifiedDistribution:
    @pytest.mark.parametrize(
        "p,phi,expected",
        [
            ([0.5, 0.25, 0.25], 0.0, [0.5, 0.25, 0.25]),
            ([0.5, 0.25, 0.25], -math.pi / 2, [1.0, 0.0, 0.0]),
            ([0.125, 0.4375, 0.4375], -math.pi, [0.78125, 0.109375, 0.109375]),
        ],
    )
    def test_examples(self, p, phi, expected):
        out = amp.amplified_distribution(p, 0, phi)
        np.testing.assert_allclose(out, expected, atol=1e-12)
        assert out.sum() == pytest.approx(1.0, abs=1e-9)

    def test_degenerate_target_passthrough(self):
        np.testing.assert_array_equal(amp.amplified_distribution([1.0, 0.0], 0, -1.0), [1.0, 0.0])
        np.testing.assert_array_equal(amp.amplified_distribution([0.0, 1.0], 0, -1.0), [0.0, 1.0])

    @pytest.mark.parametrize("k", [2, 4, 8, 16])
    def test_equals_grover_apply(self, k):
        rng = np.random.default_rng(k)
        for _ in range(50):
            p = rng.dirichlet(np.ones(k))
            m = int(rng.integers(k))
            phi = rng.uniform(-math.pi, 0)
            amps = np.sqrt(p) * np.exp(1j * rng.uniform(-math.pi, math.pi, k))
            np.testing.assert_allclose(
                np.abs(amp.grover_apply(amps, m, phi)) ** 2,
                amp.amplified_distribution(p, m, phi),
                atol=1e-9,
            )


class TestMeasure:
    def test_point_masses(self):
        rng = np.random.default_rng(0)
        assert all(amp.measure([1.0, 0.0, 0.0], rng) == 0 for _ in range(200))
        assert all(amp.measure([0.0, 0.0, 1.0], rng) == 2 for _ in range(200))

    def test_zero_probability_tail_never_drawn(self):
        rng = np.random.default_rng(1)
        assert {amp.measure([0.5, 0.5, 0.0], rng) for _ in range(2000)} == {0, 1}

    def test_fair_coin_frequency(self):
        rng = np.random.default_rng(5)
        draws = [amp.measure([0.5, 0.5], rng) for _ in range(100_000)]
        assert abs(draws.count(0) / 1e5 - 0.5) < 0.01

    def test_inverse_cdf_is_deterministic(self):
        a = [amp.measure([0.2, 0.3, 0.5], np.random.default_rng(9)) for _ in range(3)]
        assert len(set(a)) == 1
        # u -> first arm whose cumulative probability exceeds u
        u = np.random.default_rng(9).random()
        assert a[0] == int(np.searchsorted([0.2, 0.5, 1.0], u, side="right"))

    def test_target_arm_ties_lowest(self):
        assert amp.target_arm([0.3, 0.3, 0.4]) == 2
        assert amp.target_arm([0.4, 0.2, 0.4]) == 0
