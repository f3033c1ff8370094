"""Core numerics: grids, quadrature, differentiation, the IVP integrator.

Expected values are closed forms or independently computed oracles (plain
RK4 at refined steps with Richardson control).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slspec import (
    DimensionMismatchError,
    DomainError,
    Grid,
    IntegrationOverflowError,
    Potential,
    diff_central,
    integrate_ivp,
    load_potential_csv,
    quad_trapz,
    save_potential_csv,
)

PI = math.pi


class TestGrid:
    def test_spacing_spans_pi(self):
        g = Grid(513)
        assert g.spacing * (g.n_points - 1) == pytest.approx(PI, abs=1e-15)
        assert g.nodes[0] == 0.0
        assert g.nodes[-1] == pytest.approx(PI, abs=1e-15)

    def test_minimum_size_enforced(self):
        with pytest.raises(DomainError):
            Grid(32)

    def test_refined_nests(self):
        g = Grid(65)
        r = g.refined(4)
        assert r.n_points == 257
        np.testing.assert_allclose(r.nodes[::4], g.nodes, atol=1e-15)


class TestPotential:
    def test_mean_matches_trapezoid(self):
        g = Grid(201)
        p = Potential(g, g.nodes * (PI - g.nodes))
        assert p.mean == pytest.approx(quad_trapz(g, p.values) / PI, rel=1e-12)

    def test_rejects_nan(self):
        g = Grid(33)
        vals = np.zeros(33)
        vals[5] = np.nan
        with pytest.raises(DomainError):
            Potential(g, vals)

    def test_values_are_readonly(self):
        p = Potential.zero(Grid(33))
        with pytest.raises(ValueError):
            p.values[0] = 1.0

    def test_csv_roundtrip(self, tmp_path):
        g = Grid(129)
        p = Potential.from_callable(lambda x: np.sin(3 * x), g)
        path = tmp_path / "q.csv"
        save_potential_csv(path, p)
        p2 = load_potential_csv(path, g)
        np.testing.assert_allclose(p2.values, p.values, atol=1e-12)

    def test_csv_resamples_linear(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("x,q\n0.0,0.0\n%.17f,%.17f\n" % (PI, PI))
        p = load_potential_csv(path, Grid(65))
        np.testing.assert_allclose(p.values, p.grid.nodes, atol=1e-12)

    def test_nonmonotone_samples_rejected(self):
        with pytest.raises(DomainError):
            Potential.from_samples([0.0, 2.0, 1.0, PI], [0.0, 0.0, 0.0, 0.0])


class TestQuadTrapz:
    def test_constant_one(self):
        g = Grid(401)
        assert quad_trapz(g, np.ones(401)) == pytest.approx(PI, abs=1e-14)

    def test_cos_squared(self):
        g = Grid(1001)
        assert quad_trapz(g, np.cos(g.nodes) ** 2) == pytest.approx(PI / 2, abs=1e-6)

    def test_parabola_closed_form(self):
        # int_0^pi x (pi - x) dx = pi^3 / 6
        g = Grid(4097)
        vals = g.nodes * (PI - g.nodes)
        assert quad_trapz(g, vals) == pytest.approx(PI**3 / 6, abs=1e-6)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            quad_trapz(Grid(65), np.ones(64))


class TestDiffCentral:
    def test_exact_for_quadratic(self):
        g = Grid(101)
        d = diff_central(g, g.nodes**2)
        np.testing.assert_allclose(d, 2 * g.nodes, atol=1e-12)

    def test_constant_gives_zero(self):
        g = Grid(65)
        assert np.all(diff_central(g, np.full(65, 3.7)) == 0.0)

    def test_sine_interior_accuracy(self):
        g = Grid(501)
        d = diff_central(g, np.sin(g.nodes))
        assert np.max(np.abs(d[1:-1] - np.cos(g.nodes[1:-1]))) < 1e-4

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            diff_central(Grid(65), np.ones(3))


def _rk4_endpoint(qfun, mu, y0, dy0, n_steps):
    h = PI / n_steps
    y, dy = float(y0), float(dy0)
    x = 0.0
    for _ in range(n_steps):
        k1y, k1d = dy, (qfun(x) - mu) * y
        k2y = dy + 0.5 * h * k1d
        k2d = (qfun(x + 0.5 * h) - mu) * (y + 0.5 * h * k1y)
        k3y = dy + 0.5 * h * k2d
        k3d = (qfun(x + 0.5 * h) - mu) * (y + 0.5 * h * k2y)
        k4y = dy + h * k3d
        k4d = (qfun(x + h) - mu) * (y + h * k3y)
        y, dy = y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y), dy + h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
        x += h
    return y, dy


class TestIntegrateIvp:
    def test_free_cosine(self):
        sol = integrate_ivp(Potential.zero(), 1.0, 1.0, 0.0)
        assert sol.y[-1] == pytest.approx(-1.0, abs=1e-8)
        np.testing.assert_allclose(sol.y, np.cos(sol.grid.nodes), atol=1e-8)

    def test_zero_mu_constant(self):
        sol = integrate_ivp(Potential.zero(), 0.0, 1.0, 0.0)
        assert np.all(sol.y == 1.0)
        assert np.all(sol.dy == 0.0)

    def test_linear_potential_vs_rk4_oracle(self):
        # oracle at two refinements, Richardson-checked before use
        mu = 2.0
        q = Potential.from_callable(lambda x: x, Grid(2049))
        y1, _ = _rk4_endpoint(lambda x: x, mu, 1.0, 0.0, 8192)
        y2, _ = _rk4_endpoint(lambda x: x, mu, 1.0, 0.0, 16384)
        assert abs(y2 - y1) < 1e-10  # oracle self-consistency
        oracle = (16 * y2 - y1) / 15
        sol = integrate_ivp(q, mu, 1.0, 0.0)
        assert sol.y[-1] == pytest.approx(oracle, abs=1e-7)

    def test_fourth_order_convergence(self):
        # q(x) = x is reproduced exactly by the linear interpolation, so the
        # pure integrator order shows through: halving h gains >= 8x
        mu = 2.0
        y1, _ = _rk4_endpoint(lambda x: x, mu, 1.0, 0.0, 16384)
        errs = []
        for n in (65, 129, 257):
            sol = integrate_ivp(Potential.from_callable(lambda x: x, Grid(n)), mu, 1.0, 0.0)
            errs.append(abs(sol.y[-1] - y1))
        assert errs[0] / errs[1] >= 8.0
        assert errs[1] / errs[2] >= 8.0

    def test_right_to_left_direction(self):
        # for q=0, mu=1, data at pi: y = cos(x - pi) solves it
        sol = integrate_ivp(Potential.zero(), 1.0, 1.0, 0.0, direction="right-to-left")
        np.testing.assert_allclose(sol.y, np.cos(sol.grid.nodes - PI), atol=1e-8)

    def test_reversibility(self):
        q = Potential.from_callable(lambda x: 2 * np.cos(2 * x), Grid(2049))
        mu = 17.3
        fwd = integrate_ivp(q, mu, 1.0, -0.5)
        back = integrate_ivp(q, mu, fwd.y[-1], fwd.dy[-1], direction="right-to-left")
        assert back.y[0] == pytest.approx(1.0, abs=1e-7)
        assert back.dy[0] == pytest.approx(-0.5, abs=1e-7)

    def test_deep_negative_mu_stays_finite(self):
        sol = integrate_ivp(Potential.zero(), -1.0e4, 1.0, 0.0)
        assert np.isfinite(sol.y[-1])
        assert sol.y[-1] == pytest.approx(np.cosh(100 * PI), rel=1e-8)

    def test_overflow_error_names_step(self):
        with pytest.raises(IntegrationOverflowError) as exc_info:
            integrate_ivp(Potential.zero(), -1.0e5, 1.0, 0.0)
        assert exc_info.value.step_index > 0
        assert "step" in str(exc_info.value)

    def test_bad_direction_rejected(self):
        with pytest.raises(DomainError):
            integrate_ivp(Potential.zero(), 1.0, 1.0, 0.0, direction="up")

    @given(mu=st.floats(min_value=-50.0, max_value=900.0))
    @settings(max_examples=25, deadline=None)
    def test_wronskian_constant(self, mu):
        # Liouville: u v' - u' v is constant; the one-step matrices have unit
        # determinant so the discrete drift is pure roundoff
        q = Potential.from_callable(lambda x: 2 * np.cos(2 * x), Grid(257))
        u = integrate_ivp(q, mu, 1.0, 0.0)
        v = integrate_ivp(q, mu, 0.0, 1.0)
        w = u.y * v.dy - u.dy * v.y
        assert np.max(np.abs(w - 1.0)) < 1e-8
