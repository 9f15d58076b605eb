"""Numerical checks of the approximation-theory quantities.

Everything the error analysis rests on, evaluated and cross-checked at
machine precision or Monte Carlo accuracy: moment identities of the
importance-sampled feature estimator, optimality of the |g|-proportional
density, the closed-form optimal control path, the bang-bang time split,
the mollifier constants, and the bound constants that decide when the
depth-dependent bound beats the shallow one.
"""

import numpy as np

from deeprff import theory
from deeprff.theory import DensitySpec

grid = np.linspace(0.0, 1.0, 2001)
uniform = DensitySpec.from_values(grid, np.ones_like(grid))

# ---- moment identities of mean_j a(w_j) / p(w_j) ----
rep = theory.mc_moments_check(lambda w: w, uniform, n_samples=100,
                              replications=20_000, seed=1)
print("importance estimator, a(w) = w, uniform p, J = 100:")
print(f"  mean       {rep['mean_empirical']:.6f}  "
      f"(analytic {rep['mean_analytic']:.6f})")
print(f"  variance   {rep['var_empirical']:.3e}  "
      f"(analytic {rep['var_analytic']:.3e} = 1/1200 = {1 / 1200:.3e})")
print(f"  4th moment {rep['m4_empirical']:.3e}  "
      f"(analytic {rep['m4_analytic']:.3e})")
print()

# ---- the |g|-proportional density minimizes the variance functional ----
g = np.sin(3 * np.pi * grid) * np.exp(-grid)
opt = theory.check_density_optimality(g, grid, seed=2)
print("density optimality for g(w) = sin(3 pi w) exp(-w):")
print(f"  objective at p* = |g|/int|g|: {opt['objective']:.8f}")
print(f"  analytic (int |g|)^2:         {opt['objective_analytic']:.8f}")
print(f"  worst margin over perturbed densities: {opt['worst_margin']:+.3e}")
print()

# ---- optimal control of the continuous-depth limit ----
residuals = np.random.default_rng(3).standard_normal(200)
for delta in (0.01, 0.3, 1.0):
    ctl = theory.optimal_control_check(delta, residuals)
    print(f"control, delta={delta:<4}: path err {ctl['path_max_error']:.2e}, "
          f"terminal gap "
          f"{abs(ctl['terminal_cost'] - ctl['terminal_cost_analytic']):.2e}, "
          f"objective gap "
          f"{abs(ctl['objective'] - ctl['objective_analytic']):.2e}")
print()

# ---- bang-bang split of the time budget ----
for a_const, b_const in ((4.0, 4.0), (100.0, 1.0), (1.0, 4.0)):
    bb = theory.bang_bang_check(a_const, b_const,
                                np.linspace(1e-3, 1.0, 100_001))
    print(f"bang-bang A={a_const:<6} B={b_const:<4}: "
          f"tau* {bb['tau_star']:.4f} (grid {bb['tau_grid_min']:.4f}), "
          f"value {bb['value_star']:.6f}")
print()

# ---- mollifier constants ----
print(f"sup_z |z h'(z)| = {theory.zh_prime_sup():.12f}")
print(f"pi * hhat(0) - 1 = {float(np.pi * theory.hhat(0.0)) - 1:.6f} "
      f"(tail mass of h beyond the unit plateau)")
print()

# ---- bound constants: when does depth pay? ----
# Synthetic transform profile: unit-mass Gaussian |fhat|, with the scale F
# chosen so the identity-branch constant B* sits three decades under the
# data-branch constant A*.
s = theory.zh_prime_sup()
nu = np.linspace(-30.0, 30.0, 1201)
l1 = np.trapezoid(np.abs(theory.hhat_deriv(nu, z_step=0.005)), nu)
F = 1e-3 / (l1 * np.exp(s))

fgrid = np.linspace(-5.0, 5.0, 1001)
fhat = DensitySpec.from_values(fgrid, np.exp(-fgrid**2))
omega = nu / F
p_bar = DensitySpec.from_values(omega, np.full_like(omega, F / 60.0))
pbar_prime = DensitySpec.from_values(fgrid, np.full_like(fgrid, 0.1))
bc = theory.bound_constants(fhat, F, p_bar, pbar_prime, z_step=0.005)
print(f"bound constants at F = {F:.3e}:")
print(f"  A* = {bc.A_star:.4e}   B* = {bc.B_star:.4e}   "
      f"B*/A* = {bc.B_star / bc.A_star:.1e}")
print(f"  C_timedep / A*^2 = {bc.C_timedep / bc.A_star**2:.3e}  "
      f"(< 1 means the depth-dependent bound wins)")
print()

# ---- stratified layer-time sampler ----
for name, vals in (("uniform", np.ones_like(grid)), ("linear in t", grid)):
    q = DensitySpec.from_values(grid, vals)
    chi = theory.stratified_chi2(q, n_layers=4, n_per_stratum=25_000, seed=4)
    print(f"stratified chi-square, q {name}: p = {chi['p_value']:.3f} "
          f"(dof {chi['dof']}, passed: {chi['passed']})")
