"""Tests for the density tooling, moment identities, control and bound
constants, and the stratified time sampler."""

import numpy as np
import pytest

from deeprff import theory
from deeprff.theory import DensitySpec


def _uniform(lo=0.0, hi=1.0, n=1001):
    grid = np.linspace(lo, hi, n)
    return DensitySpec(grid, np.full(n, 1.0 / (hi - lo)))


class TestDensitySpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            DensitySpec(np.array([0.0, 0.5, 0.5, 1.0]), np.ones(4))
        with pytest.raises(ValueError, match="at least two"):
            DensitySpec(np.array([0.0]), np.array([1.0]))
        with pytest.raises(ValueError, match="shape"):
            DensitySpec(np.linspace(0, 1, 5), np.ones(4))
        with pytest.raises(ValueError, match="finite"):
            DensitySpec(np.linspace(0, 1, 3), np.array([1.0, -0.5, 1.0]))
        with pytest.raises(ValueError, match="mass"):
            DensitySpec(np.linspace(0, 1, 3), np.full(3, 2.0))

    def test_from_values_normalizes(self):
        grid = np.linspace(0.0, 2.0, 21)
        p = DensitySpec.from_values(grid, np.exp(-grid))
        assert abs(np.trapezoid(p.values, p.grid) - 1.0) < 1e-12
        with pytest.raises(ValueError, match="zero"):
            DensitySpec.from_values(grid, np.zeros(21))

    def test_uniform_cdf_is_identity(self):
        p = _uniform(n=11)
        np.testing.assert_allclose(p.cdf_nodes(), p.grid, atol=1e-15)

    def test_cdf_endpoints(self):
        grid = np.linspace(-1.0, 3.0, 50)
        p = DensitySpec.from_values(grid, np.exp(-0.5 * grid**2))
        nodes = p.cdf_nodes()
        assert nodes[0] == 0.0 and nodes[-1] == 1.0
        assert np.all(np.diff(nodes) >= 0)

    def test_sample_of_uniform_replays_uniforms(self):
        p = _uniform(n=11)
        rng = np.random.default_rng(1)
        draws = p.sample(100, rng)
        expected = np.random.default_rng(1).uniform(size=100)
        np.testing.assert_allclose(draws, expected, atol=1e-15)

    def test_sample_within_support(self):
        grid = np.linspace(2.0, 5.0, 31)
        p = DensitySpec.from_values(grid, grid**2)
        draws = p.sample(1000, np.random.default_rng(2))
        assert draws.min() >= 2.0 and draws.max() <= 5.0

    def test_cell_pdf_matches_cell_mass(self):
        grid = np.array([0.0, 1.0, 3.0])
        p = DensitySpec.from_values(grid, np.array([1.0, 1.0, 0.0]))
        # normalized values [.5, .5, 0]: both cells hold mass 1/2, so the
        # flat per-cell densities are .5 / 1 and .5 / 2
        np.testing.assert_allclose(p.cell_pdf([0.5]), [0.5], atol=1e-15)
        np.testing.assert_allclose(p.cell_pdf([2.0]), [0.25], atol=1e-15)
        # boundary points clip into the adjacent cells
        assert p.cell_pdf([0.0])[0] == p.cell_pdf([0.5])[0]
        assert p.cell_pdf([3.0])[0] == p.cell_pdf([2.0])[0]

    def test_cell_pdf_is_samplers_density(self):
        # histogram of many draws against the piecewise-constant law
        grid = np.linspace(0.0, 1.0, 6)
        p = DensitySpec.from_values(grid, np.array([0.5, 1.5, 1.0, 2.0, 0.5, 0.5]))
        draws = p.sample(200_000, np.random.default_rng(3))
        counts, edges = np.histogram(draws, bins=np.linspace(0, 1, 11))
        centers = 0.5 * (edges[:-1] + edges[1:])
        expected = p.cell_pdf(centers) * 0.1 * draws.size
        assert np.max(np.abs(counts - expected) / np.sqrt(expected)) < 5.0


class TestMomentIdentities:
    def test_linear_integrand_uniform_density(self):
        p = _uniform()
        rep = theory.mc_moments_check(lambda w: w, p, n_samples=100,
                                      replications=2000, seed=5)
        assert abs(rep["mean_analytic"] - 0.5) < 1e-14
        assert abs(rep["var_analytic"] - 1.0 / 1200.0) < 1e-8
        assert rep["mean_ok"] and rep["var_ok"] and rep["m4_ok"]
        assert rep["ok"]
        assert abs(rep["mean_empirical"] - 0.5) <= 5.0 * rep["mean_se"]

    def test_constant_integrand_has_zero_variance(self):
        p = _uniform(n=21)
        rep = theory.mc_moments_check(lambda w: 3.0 * np.ones_like(w), p,
                                      n_samples=7, replications=50, seed=6)
        assert rep["mean_empirical"] == pytest.approx(3.0, abs=1e-13)
        assert rep["var_empirical"] < 1e-26
        assert abs(rep["var_analytic"]) < 1e-12
        assert abs(rep["m4_analytic"]) < 1e-12
        assert rep["ok"]

    def test_fourth_moment_formula(self):
        # J = 1 reduces m4 to the single-draw fourth central moment
        p = _uniform(n=2001)
        rep = theory.mc_moments_check(lambda w: w, p, n_samples=1,
                                      replications=4000, seed=7)
        # for a(w) = w under uniform p: mu4 = int (w - 1/2)^4 = 1/80
        assert abs(rep["m4_analytic"] - 1.0 / 80.0) < 1e-7
        assert rep["m4_ok"]

    def test_vanishing_density_rejected(self):
        grid = np.linspace(0.0, 1.0, 101)
        p = DensitySpec.from_values(grid, 2.0 * grid)  # zero at w = 0
        with pytest.raises(ValueError, match="vanishes"):
            theory.mc_moments_check(lambda w: np.ones_like(w), p, 10, 10)

    def test_integrand_vanishing_with_density_allowed(self):
        grid = np.linspace(0.0, 1.0, 101)
        p = DensitySpec.from_values(grid, 2.0 * grid)
        rep = theory.mc_moments_check(lambda w: w, p, n_samples=50,
                                      replications=400, seed=8)
        assert abs(rep["mean_analytic"] - 0.5) < 1e-4
        assert rep["mean_ok"]

    def test_argument_validation(self):
        p = _uniform(n=11)
        with pytest.raises(ValueError):
            theory.mc_moments_check(lambda w: w, p, 0, 10)
        with pytest.raises(ValueError):
            theory.mc_moments_check(lambda w: w, p, 10, 1)


class TestDensityOptimality:
    def test_objective_at_optimum_is_l1_squared(self):
        grid = np.linspace(-2.0, 2.0, 401)
        g = np.exp(-(grid**2)) * (1.0 + 0.5 * np.sin(3 * grid))
        p_star = theory.optimal_density(g, grid)
        base = theory.importance_objective(g, p_star)
        l1 = np.trapezoid(np.abs(g), grid)
        assert abs(base - l1**2) < 1e-12 * l1**2

    def test_perturbations_never_improve(self):
        grid = np.linspace(0.0, 1.0, 201)
        g = np.exp(-8.0 * (grid - 0.35) ** 2) + 0.2
        rep = theory.check_density_optimality(g, grid, seed=9)
        assert rep["ok"]
        assert rep["worst_margin"] >= -1e-12 * rep["objective"]
        assert abs(rep["objective"] - rep["objective_analytic"]) \
            < 1e-10 * rep["objective"]

    def test_signed_g_uses_magnitude(self):
        grid = np.linspace(0.0, 1.0, 101)
        g = np.sin(2 * np.pi * grid)  # changes sign, zero at 0, 1/2, 1
        p_star = theory.optimal_density(g, grid)
        assert np.all(p_star.values >= 0)
        rep = theory.check_density_optimality(g, grid, seed=10)
        assert rep["ok"]

    def test_zero_g_rejected(self):
        grid = np.linspace(0.0, 1.0, 11)
        with pytest.raises(ValueError, match="identically zero"):
            theory.optimal_density(np.zeros(11), grid)

    def test_suboptimal_density_is_worse(self):
        grid = np.linspace(0.0, 1.0, 201)
        g = np.exp(-4.0 * grid)
        p_star = theory.optimal_density(g, grid)
        uniform = _uniform(n=201)
        assert theory.importance_objective(g, uniform) \
            > theory.importance_objective(g, p_star)


class TestOptimalControl:
    def test_closed_forms_across_deltas(self):
        rng = np.random.default_rng(23)
        c = rng.standard_normal(100)
        for delta in (0.01, 0.3, 1.0):
            rep = theory.optimal_control_check(delta, c)
            scale = max(np.max(np.abs(c)) ** 2, 1.0)
            assert rep["path_max_error"] <= 1e-10 * np.sqrt(scale)
            assert abs(rep["terminal_cost"] - rep["terminal_cost_analytic"]) \
                <= 1e-10 * scale
            assert abs(rep["objective"] - rep["objective_analytic"]) \
                <= 1e-10 * scale
            assert rep["ok"]

    def test_scalar_residual_hand_values(self):
        rep = theory.optimal_control_check(1.0, [2.0])
        assert rep["terminal_cost"] == pytest.approx(1.0, abs=1e-12)
        assert rep["objective"] == pytest.approx(2.0, abs=1e-12)
        assert rep["terminal_cost_analytic"] == pytest.approx(1.0, abs=1e-15)
        assert rep["objective_analytic"] == pytest.approx(2.0, abs=1e-15)

    def test_terminal_shrinks_with_delta(self):
        c = np.array([1.0, -0.5, 2.0])
        small = theory.optimal_control_check(0.01, c)["terminal_cost"]
        large = theory.optimal_control_check(1.0, c)["terminal_cost"]
        assert small < large

    def test_bad_delta(self):
        with pytest.raises(ValueError, match="delta"):
            theory.optimal_control_check(0.0, [1.0])


class TestMollifier:
    def test_plateau(self):
        np.testing.assert_array_equal(
            theory.h_eval(np.array([-1.0, -0.3, 0.0, 0.7, 1.0])), np.ones(5)
        )
        assert theory.h_deriv(0.5) == 0.0

    def test_even_symmetry(self):
        z = np.linspace(0.0, 4.0, 57)
        np.testing.assert_array_equal(theory.h_eval(z), theory.h_eval(-z))
        np.testing.assert_array_equal(theory.h_deriv(z), -theory.h_deriv(-z))

    def test_tail_decay(self):
        assert theory.h_eval(3.0) < 0.05
        assert theory.h_eval(6.0) < 1e-10
        assert theory.h_eval(12.0) < 1e-50

    def test_c1_at_seam(self):
        eps = 1e-6
        assert abs(theory.h_eval(1.0 + eps) - 1.0) < 1e-5
        assert abs(theory.h_deriv(1.0 + eps)) < 1e-5
        assert theory.h_deriv(1.0) == 0.0

    def test_derivative_matches_finite_differences(self):
        h = 1e-6
        for z in (1.3, 1.9, 2.6, -1.5):
            fd = (theory.h_eval(z + h) - theory.h_eval(z - h)) / (2 * h)
            ref = theory.h_deriv(z)
            assert abs(fd - ref) < 1e-5 * max(abs(ref), 1e-3)

    def test_zh_prime_sup_value(self):
        s = theory.zh_prime_sup()
        assert abs(s - 1.310839998496928) < 1e-9
        assert s > 1.0  # the tail beats the plateau value


class TestCosineTransform:
    def test_even_and_odd(self):
        nu = np.array([0.4, 1.3, 2.2])
        np.testing.assert_allclose(theory.hhat(nu), theory.hhat(-nu),
                                   rtol=1e-14)
        np.testing.assert_allclose(theory.hhat_deriv(nu),
                                   -theory.hhat_deriv(-nu), rtol=1e-14)
        assert theory.hhat_deriv(0.0) == 0.0

    def test_value_at_zero(self):
        # dual route: adaptive quadrature of h against the tabulated trapezoid
        from scipy.integrate import quad

        ref, _ = quad(theory.h_eval, 0.0, 12.0, points=[1.0], limit=200)
        assert abs(theory.hhat(0.0) - ref / np.pi) < 1e-5
        assert np.pi * theory.hhat(0.0) > 1.0  # positive mass past the plateau

    def test_derivative_dual_route(self):
        step = 1e-4
        for nu in (0.3, 1.1, 2.7):
            fd = (theory.hhat(nu + step) - theory.hhat(nu - step)) / (2 * step)
            assert abs(fd - theory.hhat_deriv(nu)) < 1e-7

    def test_decay(self):
        assert abs(theory.hhat(50.0)) < 1e-2

    def test_shapes(self):
        out = theory.hhat(np.zeros((2, 3)))
        assert out.shape == (2, 3)
        assert isinstance(theory.hhat(1.0), float)


def _gaussian_spec(grid):
    return DensitySpec.from_values(grid, np.exp(-0.5 * grid**2))


class TestBoundConstants:
    def _scenario(self, f=2.0, fhat_mass=1.0):
        fgrid = np.linspace(-5.0, 5.0, 801)
        fhat = _gaussian_spec(fgrid)
        pbar_prime = DensitySpec(fgrid, np.full(fgrid.size, 0.1))
        omega = np.linspace(-30.0 / f, 30.0 / f, 801)
        pbar = DensitySpec(omega, np.full(omega.size, f / 60.0))
        res = theory.bound_constants(fhat, f, pbar, pbar_prime,
                                     fhat_mass=fhat_mass)
        return res, fhat, pbar, pbar_prime

    def test_data_branch_integrals(self):
        res, fhat, _, pbar_prime = self._scenario()
        a_ref = np.trapezoid(fhat.values**2 / pbar_prime.values, fhat.grid)
        assert abs(res.A - a_ref) < 1e-12 * a_ref
        a_star_ref = np.trapezoid(fhat.values, fhat.grid)
        assert abs(res.A_star - a_star_ref) < 1e-14

    def test_b_prime_dual_route(self):
        res, *_ = self._scenario()
        assert res.B_prime > 0
        assert abs(res.b_prime_fd - res.B_prime) < 1e-4 * res.B_prime

    def test_exponential_inflation(self):
        res, *_ = self._scenario()
        s = theory.zh_prime_sup()
        assert abs(res.B - res.B_prime * np.exp(2 * s)) < 1e-12 * res.B
        assert res.B_star > 0

    def test_b_star_from_l1_norm(self):
        res, _, pbar, _ = self._scenario(f=2.0)
        dtr = 2.0 * theory.hhat_deriv(2.0 * pbar.grid)
        ref = 2.0 * np.trapezoid(np.abs(dtr), pbar.grid) \
            * np.exp(theory.zh_prime_sup())
        assert abs(res.B_star - ref) < 1e-12 * ref

    def test_switch_points_and_constants(self):
        res, *_ = self._scenario()
        assert res.t_star == min(1.0, res.B_star / res.A_star)
        assert res.tau_star == min(1.0, np.sqrt(res.B / res.A))
        ref_const = res.A * res.tau_star + res.B * (1.0 / res.tau_star - 1.0)
        assert res.C_const == ref_const
        if res.B_star < res.A_star:
            ref = res.B_star**2 * (1 + np.log(res.A_star / res.B_star)) ** 2
        else:
            ref = res.A_star**2
        assert abs(res.C_timedep - ref) < 1e-12 * max(ref, 1.0)

    def test_c_const_branches(self):
        # default scenario: B far above A, so the budget pins tau at 1
        boundary, *_ = self._scenario()
        assert boundary.B > boundary.A
        assert boundary.tau_star == 1.0
        assert boundary.C_const == boundary.A
        # large transform mass flips the order and opens the interior branch
        interior, *_ = self._scenario(fhat_mass=200.0)
        assert interior.A > interior.B
        assert interior.tau_star < 1.0
        ref = 2.0 * np.sqrt(interior.A * interior.B) - interior.B
        assert interior.C_const == pytest.approx(ref, rel=1e-12)
        assert interior.C_const > 0

    def test_saturated_regime_uses_a_star(self):
        # tiny transform mass pushes B_star above A_star
        res, *_ = self._scenario(fhat_mass=1e-6)
        assert res.B_star >= res.A_star
        assert abs(res.C_timedep - res.A_star**2) < 1e-18
        assert res.t_star == 1.0

    def test_validation(self):
        fgrid = np.linspace(-5.0, 5.0, 101)
        fhat = _gaussian_spec(fgrid)
        pbar_prime = DensitySpec(fgrid, np.full(101, 0.1))
        other = DensitySpec(np.linspace(-4, 4, 101), np.full(101, 1 / 8))
        with pytest.raises(ValueError, match="share a grid"):
            theory.bound_constants(fhat, 1.0, pbar_prime, other)
        with pytest.raises(ValueError, match="F"):
            theory.bound_constants(fhat, 0.0, pbar_prime, pbar_prime)
        with pytest.raises(ValueError, match="fhat_mass"):
            theory.bound_constants(fhat, 1.0, pbar_prime, pbar_prime,
                                   fhat_mass=0.0)

    def test_pbar_hole_rejected(self):
        fgrid = np.linspace(-5.0, 5.0, 101)
        fhat = _gaussian_spec(fgrid)
        pbar_prime = DensitySpec(fgrid, np.full(101, 0.1))
        omega = np.linspace(-15.0, 15.0, 301)
        vals = np.ones(301)
        vals[:30] = 0.0  # hole where the transform derivative still lives
        pbar = DensitySpec.from_values(omega, vals)
        with pytest.raises(ValueError, match="vanishes"):
            theory.bound_constants(fhat, 2.0, pbar, pbar_prime)

    def test_constants_validation(self):
        with pytest.raises(ValueError, match="non-negative"):
            theory.BoundConstants(F=1, A=-1, A_star=1, B_prime=1, B=1,
                                  B_star=1, C_timedep=1, C_const=1,
                                  t_star=1, tau_star=1)
        with pytest.raises(ValueError, match="t_star"):
            theory.BoundConstants(F=1, A=1, A_star=1, B_prime=1, B=1,
                                  B_star=1, C_timedep=1, C_const=1,
                                  t_star=0, tau_star=1)


class TestTimeDensities:
    def test_interior_switch_point(self):
        fgrid = np.linspace(-5.0, 5.0, 401)
        fhat = _gaussian_spec(fgrid)
        td = theory.optimal_time_densities(fhat, 1.0, fhat_mass=20.0,
                                           n_omega=401, n_t=501)
        assert 0.0 < td.t_star < 1.0
        assert td.t_star == td.b_star / 20.0
        # data-branch time density: uniform on [0, t_star]
        assert td.q_prime.grid[0] == 0.0
        assert td.q_prime.grid[-1] == pytest.approx(td.t_star)
        np.testing.assert_allclose(td.q_prime.values, 1.0 / td.t_star,
                                   rtol=1e-12)
        # identity-branch time density: 1/t on [t_star, 1]
        assert td.q is not None
        assert td.q.grid[0] == pytest.approx(td.t_star)
        assert td.q.grid[-1] == pytest.approx(1.0)
        normalizer = np.log(1.0 / td.t_star)
        np.testing.assert_allclose(td.q.values * td.q.grid, 1.0 / normalizer,
                                   rtol=1e-4)

    def test_saturated_switch_point_drops_q(self):
        fgrid = np.linspace(-5.0, 5.0, 401)
        fhat = _gaussian_spec(fgrid)
        td = theory.optimal_time_densities(fhat, 1.0, fhat_mass=1.0,
                                           n_omega=401, n_t=201)
        assert td.t_star == 1.0
        assert td.q is None
        assert td.b_star > td.a_star

    def test_frequency_density_tracks_transform(self):
        fgrid = np.linspace(-5.0, 5.0, 201)
        fhat = _gaussian_spec(fgrid)
        td = theory.optimal_time_densities(fhat, 2.0, fhat_mass=20.0,
                                           n_omega=301, n_t=201)
        dtr = np.abs(2.0 * theory.hhat_deriv(2.0 * td.p_bar.grid))
        ref = dtr / np.trapezoid(dtr, td.p_bar.grid)
        np.testing.assert_allclose(td.p_bar.values, ref, atol=1e-12)

    def test_bad_f(self):
        fgrid = np.linspace(-1.0, 1.0, 11)
        fhat = DensitySpec(fgrid, np.full(11, 0.5))
        with pytest.raises(ValueError, match="F"):
            theory.optimal_time_densities(fhat, -1.0)


class TestBangBang:
    def test_equal_budgets_pin_tau_at_one(self):
        tau = np.linspace(0.001, 1.0, 20001)
        rep = theory.bang_bang_check(4.0, 4.0, tau)
        assert rep["tau_star"] == 1.0
        assert rep["value_star"] == 4.0
        assert rep["tau_ok"] and rep["value_ok"]

    def test_interior_minimum(self):
        tau = np.linspace(0.001, 1.0, 20001)
        rep = theory.bang_bang_check(100.0, 1.0, tau)
        assert rep["tau_star"] == pytest.approx(0.1)
        assert rep["value_star"] == pytest.approx(19.0)
        assert rep["value_star"] == pytest.approx(
            2.0 * np.sqrt(100.0 * 1.0) - 1.0
        )
        assert rep["tau_ok"] and rep["value_ok"]

    def test_boundary_branch_when_b_exceeds_a(self):
        tau = np.linspace(0.001, 1.0, 20001)
        rep = theory.bang_bang_check(1.0, 4.0, tau)
        assert rep["tau_star"] == 1.0
        assert rep["value_star"] == 1.0
        # the naive min(2 sqrt(AB) - B, A) would claim an unattainable 0
        assert 2.0 * np.sqrt(4.0) - 4.0 < rep["value_star"]
        assert rep["tau_ok"] and rep["value_ok"]

    def test_random_budgets_both_branches(self):
        rng = np.random.default_rng(31)
        tau = np.linspace(0.001, 1.0, 20001)
        saw_interior = saw_boundary = False
        for _ in range(10):
            a, b = rng.uniform(0.5, 20.0, size=2)
            rep = theory.bang_bang_check(a, b, tau)
            assert rep["tau_ok"], (a, b, rep)
            assert rep["value_ok"], (a, b, rep)
            if b < a:
                saw_interior = True
            else:
                saw_boundary = True
        assert saw_interior and saw_boundary

    def test_validation(self):
        tau = np.linspace(0.1, 1.0, 10)
        with pytest.raises(ValueError, match="A and B"):
            theory.bang_bang_check(0.0, 1.0, tau)
        with pytest.raises(ValueError, match="tau_grid"):
            theory.bang_bang_check(1.0, 1.0, np.linspace(0.0, 1.0, 10))
        with pytest.raises(ValueError, match="tau_grid"):
            theory.bang_bang_check(1.0, 1.0, np.linspace(0.5, 1.5, 10))


class TestStratifiedTimes:
    def test_uniform_q_replays_scaled_uniforms(self):
        q = _uniform(n=101)
        times, levels = theory.stratified_times(q, 4, 50, seed=11)
        rng = np.random.default_rng(np.random.SeedSequence(11))
        u = rng.uniform(size=(4, 50))
        expected = (np.arange(4)[:, None] + u) / 4.0
        np.testing.assert_allclose(times, expected, atol=1e-14)
        np.testing.assert_allclose(levels, np.arange(5) / 4.0, atol=1e-14)

    def test_strata_stay_inside_their_levels(self):
        grid = np.linspace(0.1, 1.0, 301)
        q = DensitySpec.from_values(grid, grid)  # density proportional to t
        times, levels = theory.stratified_times(q, 5, 200, seed=12)
        assert times.shape == (5, 200)
        for ell in range(5):
            assert np.all(times[ell] >= levels[ell] - 1e-12)
            assert np.all(times[ell] <= levels[ell + 1] + 1e-12)

    def test_deterministic(self):
        q = _uniform(n=51)
        a, _ = theory.stratified_times(q, 3, 20, seed=13)
        b, _ = theory.stratified_times(q, 3, 20, seed=13)
        np.testing.assert_array_equal(a, b)

    def test_flat_cdf_rejected(self):
        grid = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        vals = np.array([2.0, 2.0, 0.0, 0.0, 2.0])  # dead zone in the middle
        q = DensitySpec(grid, vals)
        with pytest.raises(ValueError, match="strictly increasing"):
            theory.stratified_times(q, 2, 10)

    def test_bad_counts(self):
        q = _uniform(n=11)
        with pytest.raises(ValueError):
            theory.stratified_times(q, 0, 10)

    def test_chi2_uniform_density(self):
        q = _uniform(n=201)
        rep = theory.stratified_chi2(q, 4, 25_000, bins=10, seed=77)
        assert rep["dof"] == 36
        assert len(rep["per_stratum"]) == 4
        assert rep["statistic"] == pytest.approx(sum(rep["per_stratum"]))
        assert rep["p_value"] >= 0.01
        assert rep["passed"]

    def test_chi2_linear_density(self):
        grid = np.linspace(0.1, 1.0, 2001)
        q = DensitySpec.from_values(grid, grid)
        rep = theory.stratified_chi2(q, 4, 25_000, bins=10, seed=78)
        assert rep["passed"]

    def test_chi2_catches_wrong_law(self):
        # expected masses computed for a non-uniform q must reject draws
        # that are in fact uniform per stratum: emulate by testing the
        # uniform sampler's output against a strongly sloped density through
        # a manual recomputation of the statistic
        from scipy import stats as sstats

        grid = np.linspace(0.0, 1.0, 2001)
        q = DensitySpec.from_values(grid, 0.2 + 1.6 * grid)
        times, levels = theory.stratified_times(q, 4, 25_000, seed=79)
        nodes = q.cdf_nodes()
        stat = 0.0
        for ell in range(4):
            edges = np.linspace(levels[ell], levels[ell + 1], 11)
            counts, _ = np.histogram(times[ell], edges)
            # deliberately wrong expectation: uniform within the stratum
            expected = np.full(10, 2_500.0)
            stat += float(np.sum((counts - expected) ** 2 / expected))
        p_value = float(sstats.chi2.sf(stat, 36))
        assert p_value < 0.01
