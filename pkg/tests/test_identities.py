"""Spectral identities: shift equation, asymptotic fits, sums and products.

q = 0 with alpha = beta = pi/2 provides exact values throughout: the
characteristic function is -sqrt(mu) sin(pi sqrt(mu)), whose derivative at
mu = n^2 is -pi at n = 0 and (-1)^(n+1) pi/2 for n >= 1; every infinite
product collapses to (-1)^(n+1)/2.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slspec import (
    BoundaryAngles,
    DomainError,
    InsufficientDataError,
    Potential,
    b_tilde_from_data,
    eigenvalues,
    extend_mus,
    fit_asymptotics,
    phidot_finite_difference,
    phidot_product,
    reflect_problem,
    solve_delta_n,
    sum_identity_a,
    sum_identity_b,
    verify_cn_relation,
)
from slspec.identities import _delta_rhs, delta_sequence

from conftest import corpus_angles, corpus_potential, truncated

PI = math.pi


def delta_bisection_oracle(angles, n, lo=-0.5, hi=0.5, tol=1e-13):
    """Brute-force bisection of the shift-equation residual."""
    resid = lambda d: d - float(_delta_rhs(angles, n + d))
    fa, fb = resid(lo), resid(hi)
    assert fa * fb <= 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if resid(lo) * resid(mid) <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


class TestDelta:
    @given(alpha=st.floats(min_value=0.05, max_value=PI - 0.05),
           n=st.integers(min_value=0, max_value=50))
    @settings(max_examples=40, deadline=None)
    def test_equal_angles_give_zero(self, alpha, n):
        assert solve_delta_n(BoundaryAngles(alpha, alpha), n) == 0.0

    def test_against_bisection_oracle(self):
        angles = BoundaryAngles(PI / 3, 2 * PI / 3)
        for n in (1, 3, 10):
            assert solve_delta_n(angles, n) == pytest.approx(
                delta_bisection_oracle(angles, n), abs=1e-10)

    def test_large_n_asymptote(self):
        # n delta_n -> (cot b - cot a)/pi, with deviation O(1/n)
        angles = BoundaryAngles(PI / 3, 2 * PI / 3)
        d_limit = (1 / math.tan(angles.beta) - 1 / math.tan(angles.alpha)) / PI
        deltas = delta_sequence(angles, 101)
        ns = np.arange(10, 101)
        dev = np.abs(ns * deltas[10:] - d_limit)
        c = np.max(ns * dev)
        assert np.isfinite(c)
        assert c < 1.0  # bounded constant in the C/n envelope
        assert dev[-1] < dev[0]

    def test_ground_state_bisection_fallback(self):
        angles = BoundaryAngles(PI / 3, 2 * PI / 3)
        d0 = solve_delta_n(angles, 0)
        assert d0 == pytest.approx(d0 and float(_delta_rhs(angles, d0)), abs=1e-10)

    def test_sequence_matches_scalar(self):
        angles = BoundaryAngles(PI / 4, PI / 3)
        seq = delta_sequence(angles, 6)
        for n in range(6):
            assert seq[n] == pytest.approx(solve_delta_n(angles, n), abs=1e-11)


class TestFitAsymptotics:
    def test_free_problem(self, corpus):
        model = fit_asymptotics(corpus("zero", "neumann", 100))
        assert abs(model.omega) < 1e-6
        assert np.max(np.abs(model.kappa_resid)) < 1e-6

    def test_constant_shift(self, corpus):
        # lambda_n = sqrt(n^2 + 1) ~ n + 1/(2n): omega = 1/2
        model = fit_asymptotics(corpus("one", "neumann", 100))
        assert model.omega == pytest.approx(0.5, abs=2e-2)

    def test_two_cos_omega_target(self, corpus):
        model = fit_asymptotics(corpus("two_cos_2x", "third_twothirds", 100))
        expected = (1 / math.tan(2 * PI / 3) - 1 / math.tan(PI / 3)) / PI
        assert model.omega == pytest.approx(expected, abs=5e-2)
        assert abs(model.omega_target_residual) < 5e-2

    def test_requires_sixteen_records(self, corpus):
        with pytest.raises(InsufficientDataError):
            fit_asymptotics(corpus("one", "neumann", 15))

    def test_partial_norms_monotone(self, corpus):
        model = fit_asymptotics(corpus("parabolic", "quarter_third", 100))
        assert np.all(np.diff(model.omega_resid_l2_partial) >= 0)
        assert np.all(np.diff(model.kappa_resid_l2_partial) >= 0)


class TestSumIdentities:
    def test_free_neumann_exact_zero(self, corpus):
        ev = sum_identity_a(corpus("zero", "neumann", 60))
        assert ev.partial == pytest.approx(0.0, abs=1e-10)
        assert ev.tail_estimate == 0.0
        assert ev.value == pytest.approx(math.cos(PI / 2) / math.sin(PI / 2), abs=1e-10)

    def test_constant_potential_zero(self, corpus):
        ev = sum_identity_a(corpus("one", "neumann", 60))
        assert ev.value == pytest.approx(0.0, abs=1e-9)

    def test_two_cos_brackets_cot_alpha(self, corpus):
        spectrum = corpus("two_cos_2x", "third_twothirds", 200)
        ev = sum_identity_a(spectrum)
        target = 1 / math.tan(PI / 3)
        assert ev.uncertainty < 5e-2
        assert ev.brackets(target)

    def test_two_cos_brackets_minus_cot_beta(self, corpus):
        spectrum = corpus("two_cos_2x", "third_twothirds", 200)
        ev = sum_identity_b(spectrum)
        target = -1 / math.tan(2 * PI / 3)
        assert ev.uncertainty < 5e-2
        assert ev.brackets(target)

    def test_reflected_a_equals_original_b(self):
        # identity sums of the reflected problem swap roles
        q = corpus_potential("two_cos_2x")
        angles = corpus_angles("quarter_third")
        q_r, angles_r = reflect_problem(q, angles)
        s1 = eigenvalues(q, angles, 100)
        s2 = eigenvalues(q_r, angles_r, 100)
        ev_b = sum_identity_b(s1)
        ev_a = sum_identity_a(s2)
        assert abs(ev_a.value - ev_b.value) <= ev_a.uncertainty + ev_b.uncertainty

    def test_nonpositive_values_rejected(self):
        from slspec.identities import sum_shell

        with pytest.raises(DomainError):
            sum_shell(np.array([1.0, -0.5, 2.0]))


class TestProducts:
    def test_free_phidot_ground_state(self, corpus):
        spectrum = corpus("zero", "neumann", 200)
        mus = extend_mus(spectrum.mus, 2001)
        pd = phidot_product(mus, spectrum.angles, 0, 2000)
        assert pd == pytest.approx(-PI, rel=1e-6)

    def test_free_phidot_excited(self, corpus):
        # closed form: Phi-dot(n^2) = (-1)^(n+1) pi / 2
        spectrum = corpus("zero", "neumann", 200)
        mus = extend_mus(spectrum.mus, 2001)
        for n in (1, 2, 5, 10):
            pd = phidot_product(mus, spectrum.angles, n, 2000)
            assert pd == pytest.approx((-1.0) ** (n + 1) * PI / 2, rel=1e-5)

    def test_product_matches_finite_difference(self, corpus):
        spectrum = corpus("two_cos_2x", "third_twothirds", 200)
        q = spectrum.potential
        mus = extend_mus(spectrum.mus, 2001)
        for n in (0, 1, 3, 7, 10):
            fd = phidot_finite_difference(q, spectrum.angles, spectrum.mus[n])
            pd = phidot_product(mus, spectrum.angles, n, 2000)
            assert pd == pytest.approx(fd, rel=1e-3)

    def test_free_b_tilde_closed_form(self, corpus):
        spectrum = corpus("zero", "neumann", 200)
        mus = extend_mus(spectrum.mus, 2001)
        inv0 = b_tilde_from_data(mus, spectrum.a_tildes, 0, 2000)
        assert inv0 == pytest.approx(1 / PI, rel=1e-6)
        for n in (1, 4, 9):
            inv = b_tilde_from_data(mus, spectrum.a_tildes, n, 2000)
            assert inv == pytest.approx(2 / PI, rel=1e-5)

    def test_b_tilde_conversion_closure(self, corpus):
        # product route times the forward-solver b~ should be 1
        spectrum = corpus("two_cos_2x", "third_twothirds", 200)
        mus = extend_mus(spectrum.mus, 2001)
        for n in range(11):
            inv = b_tilde_from_data(mus, spectrum.a_tildes, n, 2000)
            assert inv * spectrum.b_tildes[n] == pytest.approx(1.0, abs=1e-3)

    def test_repeated_mus_rejected(self):
        mus = np.arange(2001.0) ** 2
        mus[3] = mus[2]
        with pytest.raises(DomainError):
            phidot_product(mus, BoundaryAngles(PI / 2, PI / 2), 1, 2000)

    def test_short_input_rejected(self, corpus):
        spectrum = corpus("zero", "neumann", 50)
        with pytest.raises(DomainError):
            phidot_product(spectrum.mus, spectrum.angles, 1, 2000)


class TestCnRelation:
    def test_free_ground_state(self, corpus):
        residuals = verify_cn_relation(corpus("zero", "neumann", 5))
        assert residuals[0] < 1e-6

    def test_free_second_mode_closed_form(self, corpus):
        # a_2 = pi/2, c_2 = 1, Phi-dot(4) = -pi/2: residual vanishes
        spectrum = corpus("zero", "neumann", 5)
        rec = spectrum.records[2]
        assert rec.a_n == pytest.approx(PI / 2, abs=1e-9)
        assert rec.c_n == pytest.approx(1.0, abs=1e-9)
        pd = phidot_finite_difference(spectrum.potential, spectrum.angles, rec.mu)
        assert pd == pytest.approx(-PI / 2, rel=1e-6)
        assert verify_cn_relation(spectrum)[2] < 1e-6

    def test_corpus_residuals_small(self, corpus):
        residuals = verify_cn_relation(corpus("two_cos_2x", "third_twothirds", 11))
        assert np.max(residuals) < 1e-4

    def test_requires_potential(self, corpus):
        import dataclasses

        spectrum = corpus("zero", "neumann", 5)
        stripped = dataclasses.replace(spectrum, potential=None)
        with pytest.raises(DomainError):
            verify_cn_relation(stripped)
