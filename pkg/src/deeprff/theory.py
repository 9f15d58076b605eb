"""Numerical checks of the analysis behind the training methods.

Covers: moments of importance-sampled Monte Carlo sums, the variance-optimal
sampling density, the explicit solution of the scalar control problem that
the residual recursion approximates, the generalization-bound constants
built from a compactly-plateaued Schwartz mollifier h, the time-dependent
sampling densities with their switch point t_*, the bang-bang budget split,
and stratified sampling of layer times through an inverse CDF.

All integrals are trapezoidal on truncated grids. The mollifier h decays
like exp(-z^2), so truncating |z| <= 12 leaves an error around 1e-53; its
cosine transform decays only algebraically (h is C^1 with a kink in the
second derivative at |z| = 1), so frequency-domain integrals are truncated
where stated by the caller's grid.

Densities follow one sampling semantic throughout: a DensitySpec draws by
inverse linear interpolation of the trapezoidal CDF, which makes the sample
law piecewise constant per grid cell; cell_pdf returns exactly that density,
so importance weights match the sampler with no discretization gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class DensitySpec:
    """Probability density tabulated on a 1-D grid (unit trapezoidal mass)."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be 1-D with at least two points")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("density values must be finite and >= 0")
        mass = np.trapezoid(values, grid)
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"trapezoidal mass {mass!r} is not 1 within 1e-8")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, grid, values) -> "DensitySpec":
        """Normalize non-negative grid values into a density."""
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        mass = np.trapezoid(values, grid)
        if not mass > 0:
            raise ValueError("values integrate to zero; cannot normalize")
        return cls(grid, values / mass)

    def cdf_nodes(self) -> np.ndarray:
        """Cumulative mass at the grid nodes, rescaled to end exactly at 1."""
        masses = 0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.grid)
        nodes = np.concatenate([[0.0], np.cumsum(masses)])
        return nodes / nodes[-1]

    def sample(self, n: int, rng) -> np.ndarray:
        """Draw n points by inverting the trapezoidal CDF linearly."""
        return np.interp(rng.uniform(size=n), self.cdf_nodes(), self.grid)

    def cell_pdf(self, x) -> np.ndarray:
        """Exact density of sample(): constant per cell (cell mass / width)."""
        x = np.asarray(x, dtype=float)
        nodes = self.cdf_nodes()
        idx = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0,
                      self.grid.size - 2)
        widths = np.diff(self.grid)
        return (nodes[idx + 1] - nodes[idx]) / widths[idx]


# ---------------------------------------------------------------------------
# Monte Carlo moment identities


def _masked_ratio(num, den):
    """num / den where num != 0, zero elsewhere; rejects den = 0 under mass."""
    num = np.asarray(num, dtype=float)
    out = np.zeros_like(num)
    live = num != 0.0
    if np.any(den[live] == 0.0):
        raise ValueError("density vanishes where the integrand does not")
    out[live] = num[live] / den[live]
    return out


def mc_moments_check(a, p: DensitySpec, n_samples: int, replications: int,
                     seed: int = 0) -> dict:
    """Empirical vs analytic moments of the estimator mean_j a(w_j)/p(w_j).

    a is a vectorized callable on p's support. Draws `replications`
    independent estimators of n_samples points each and compares mean,
    variance, and fourth central moment with the closed forms

        mean = int a,
        var  = (int a^2/p - (int a)^2) / J,
        m4   = (3 (J-1) sigma^4 + mu4) / J^3,

    where sigma^2 and mu4 are the single-draw central moments. Disagreement
    beyond 5 standard errors is flagged. Closed-form integrals use
    trapezoidal quadrature on p's grid; sampling weights use cell_pdf so the
    weighted draws match the sampler's exact law.
    """
    if n_samples < 1 or replications < 2:
        raise ValueError("need n_samples >= 1 and replications >= 2")
    a_grid = np.asarray(a(p.grid), dtype=float)
    if np.any((a_grid != 0.0) & (p.values == 0.0)):
        raise ValueError("density vanishes on the support of the integrand")

    g = p.grid
    mean_true = np.trapezoid(a_grid, g)
    second = np.trapezoid(_masked_ratio(a_grid, p.values) * a_grid, g)
    var_single = second - mean_true**2
    ratio = _masked_ratio(a_grid, p.values)
    mu4_single = np.trapezoid((ratio - mean_true) ** 4 * p.values, g)
    j = n_samples
    var_true = var_single / j
    m4_true = (3.0 * (j - 1) * var_single**2 + mu4_single) / j**3

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    draws = p.sample(replications * n_samples, rng).reshape(replications, n_samples)
    weights = p.cell_pdf(draws)
    estimates = np.mean(np.asarray(a(draws), dtype=float) / weights, axis=1)

    r = replications
    mean_emp = float(np.mean(estimates))
    centered = estimates - mean_emp
    var_emp = float(np.sum(centered**2) / (r - 1))
    c4 = float(np.mean(centered**4))
    c8 = float(np.mean(centered**8))
    se_mean = np.sqrt(var_emp / r)
    se_var = np.sqrt(max(c4 - var_emp**2, 0.0) / r)
    se_m4 = np.sqrt(max(c8 - c4**2, 0.0) / r)

    def close(emp, true, se):
        return bool(abs(emp - true) <= 5.0 * se + 1e-15)

    report = {
        "n_samples": n_samples,
        "replications": replications,
        "mean_empirical": mean_emp,
        "mean_analytic": float(mean_true),
        "mean_se": float(se_mean),
        "mean_ok": close(mean_emp, mean_true, se_mean),
        "var_empirical": var_emp,
        "var_analytic": float(var_true),
        "var_se": float(se_var),
        "var_ok": close(var_emp, var_true, se_var),
        "m4_empirical": c4,
        "m4_analytic": float(m4_true),
        "m4_se": float(se_m4),
        "m4_ok": close(c4, m4_true, se_m4),
    }
    report["ok"] = report["mean_ok"] and report["var_ok"] and report["m4_ok"]
    return report


def importance_objective(g_values, p: DensitySpec) -> float:
    """Variance functional int g^2 / p (zero contribution where g = 0)."""
    g_values = np.abs(np.asarray(g_values, dtype=float))
    return float(np.trapezoid(_masked_ratio(g_values, p.values) * g_values, p.grid))


def optimal_density(g_values, grid) -> DensitySpec:
    """Variance-minimizing density |g| / int |g| on the grid."""
    g_values = np.abs(np.asarray(g_values, dtype=float))
    if not np.any(g_values > 0):
        raise ValueError("g is identically zero")
    return DensitySpec.from_values(grid, g_values)


def check_density_optimality(g_values, grid, n_directions: int = 20,
                             n_magnitudes: int = 5, seed: int = 0) -> dict:
    """Perturb the optimal density and confirm the objective never drops.

    Perturbations multiply the optimal values by (1 + eps * u) with bounded
    random u, then renormalize, so they stay admissible and keep the
    support. Returns the objective at the optimum, the analytic value
    (int |g|)^2, and the worst (smallest) margin over all perturbations.
    """
    p_star = optimal_density(g_values, grid)
    base = importance_objective(g_values, p_star)
    analytic = float(np.trapezoid(np.abs(np.asarray(g_values, float)), p_star.grid) ** 2)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    margin = np.inf
    for _ in range(n_directions):
        u = rng.uniform(-1.0, 1.0, size=p_star.grid.size)
        for j in range(n_magnitudes):
            eps = 0.5 * 2.0**-j
            perturbed = DensitySpec.from_values(
                p_star.grid, p_star.values * (1.0 + eps * u)
            )
            margin = min(margin, importance_objective(g_values, perturbed) - base)
    return {
        "objective": base,
        "objective_analytic": analytic,
        "worst_margin": float(margin),
        "ok": bool(margin >= -1e-12 * max(base, 1.0)),
    }


# ---------------------------------------------------------------------------
# scalar control problem


def optimal_control_check(delta: float, residual_values, n_steps: int = 64) -> dict:
    """Integrate the optimal state equation and compare with closed forms.

    For each residual c the optimal path solves dz/dt = c / (1 + delta) from
    z(0) = 0, giving z(t) = t c / (1 + delta). Integration is classical RK4.
    Reported: max pointwise path error, terminal cost E (z(1) - c)^2 against
    delta^2/(1+delta)^2 E c^2, and the full objective (terminal cost plus
    delta int |dz/dt|^2 dt) against delta/(1+delta) E c^2.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    c = np.atleast_1d(np.asarray(residual_values, dtype=float))
    rate = c / (1.0 + delta)
    dt = 1.0 / n_steps
    z = np.zeros_like(c)
    path_err = 0.0
    for i in range(n_steps):
        # RK4 with constant right-hand side
        k1 = k2 = k3 = k4 = rate
        z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = (i + 1) * dt
        path_err = max(path_err, float(np.max(np.abs(z - t * rate))))

    terminal = float(np.mean((z - c) ** 2))
    terminal_true = delta**2 / (1.0 + delta) ** 2 * float(np.mean(c**2))
    running = delta * float(np.mean(rate**2))
    objective = terminal + running
    objective_true = delta / (1.0 + delta) * float(np.mean(c**2))
    scale = max(float(np.max(np.abs(c), initial=0.0)) ** 2, 1.0)
    return {
        "delta": delta,
        "path_max_error": path_err,
        "terminal_cost": terminal,
        "terminal_cost_analytic": terminal_true,
        "objective": objective,
        "objective_analytic": objective_true,
        "ok": bool(
            path_err <= 1e-10 * np.sqrt(scale)
            and abs(terminal - terminal_true) <= 1e-10 * scale
            and abs(objective - objective_true) <= 1e-10 * scale
        ),
    }


# ---------------------------------------------------------------------------
# the mollifier h and its cosine transform


def h_eval(z):
    """Plateau mollifier: 1 on [-1, 1], (1 + e^{1/(1-z)}) e^{-(1-z)^2} for
    z > 1, mirrored for z < -1. Continuous with continuous first derivative.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    az = np.atleast_1d(np.abs(z))
    out = np.ones_like(az)
    tail = az > 1.0
    w = 1.0 - az[tail]  # strictly negative, so exp(1/w) underflows safely
    out[tail] = (1.0 + np.exp(1.0 / w)) * np.exp(-(w**2))
    return float(out[0]) if scalar else out


def h_deriv(z):
    """Derivative of h_eval (analytic on each branch, 0 on the plateau)."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    zz = np.atleast_1d(z)
    out = np.zeros_like(zz)
    tail = np.abs(zz) > 1.0
    w = 1.0 - np.abs(zz[tail])
    e = np.exp(1.0 / w)
    grad = np.exp(-(w**2)) * (e / w**2 + 2.0 * w * (1.0 + e))
    out[tail] = np.sign(zz[tail]) * grad
    return float(out[0]) if scalar else out


_Z_MAX = 12.0
_Z_STEP = 0.0025
_CHUNK = 256


def _z_quad(z_max: float, z_step: float):
    n = int(round(z_max / z_step)) + 1
    return np.linspace(0.0, z_max, n)


def hhat(nu, z_max: float = _Z_MAX, z_step: float = _Z_STEP):
    """Transform (1/pi) int_0^inf h(z) cos(nu z) dz, truncated at z_max.

    Real and even since h is; the truncation error is below 1e-50 at the
    default radius.
    """
    nu = np.asarray(nu, dtype=float)
    scalar = nu.ndim == 0
    flat = np.atleast_1d(nu).ravel()
    z = _z_quad(z_max, z_step)
    hz = h_eval(z)
    out = np.empty(flat.size)
    for lo in range(0, flat.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        out[sl] = np.trapezoid(hz * np.cos(np.outer(flat[sl], z)), z, axis=1)
    out /= np.pi
    if scalar:
        return float(out[0])
    return out.reshape(np.atleast_1d(nu).shape)


def hhat_deriv(nu, z_max: float = _Z_MAX, z_step: float = _Z_STEP):
    """d/d nu of hhat: -(1/pi) int_0^inf z h(z) sin(nu z) dz (odd in nu)."""
    nu = np.asarray(nu, dtype=float)
    scalar = nu.ndim == 0
    flat = np.atleast_1d(nu).ravel()
    z = _z_quad(z_max, z_step)
    zhz = z * h_eval(z)
    out = np.empty(flat.size)
    for lo in range(0, flat.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        out[sl] = np.trapezoid(zhz * np.sin(np.outer(flat[sl], z)), z, axis=1)
    out /= -np.pi
    if scalar:
        return float(out[0])
    return out.reshape(np.atleast_1d(nu).shape)


def zh_prime_sup(u_max: float = _Z_MAX, n: int = 120001) -> float:
    """sup over u of |h(u) + u h'(u)| = sup_z |d/dz (z h(z/F))| for any F."""
    u = np.linspace(0.0, u_max, n)
    return float(np.max(np.abs(h_eval(u) + u * h_deriv(u))))


# ---------------------------------------------------------------------------
# generalization-bound constants


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the deep-vs-shallow error bounds.

    A and A_star weigh the x-branch (data term); B', B and B_star weigh the
    z-branch (identity-map term) through the mollifier transform; C_timedep
    and C_const are the resulting error constants for time-dependent and
    constant-in-time densities; t_star and tau_star are the budget switch
    points. b_prime_fd is the finite-difference cross-check of B'.
    """

    F: float
    A: float
    A_star: float
    B_prime: float
    B: float
    B_star: float
    C_timedep: float
    C_const: float
    t_star: float
    tau_star: float
    b_prime_fd: float = field(default=np.nan, compare=False)

    def __post_init__(self):
        for name in ("F", "A", "A_star", "B_prime", "B", "B_star",
                     "C_timedep", "C_const"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("t_star", "tau_star"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")


def bound_constants(fhat_abs: DensitySpec, F: float, p_bar: DensitySpec,
                    p_bar_prime: DensitySpec, fhat_mass: float = 1.0,
                    fd_step: float = 1e-4, z_max: float = _Z_MAX,
                    z_step: float = _Z_STEP) -> BoundConstants:
    """Evaluate the error-bound constants on user-supplied grids.

    fhat_abs carries the shape of |f-hat| (unit mass); fhat_mass scales it
    so the actual transform magnitude is fhat_mass * fhat_abs.values. The
    data-branch integral A uses p_bar_prime (same grid as fhat_abs); the
    identity-branch integrals use p_bar, whose grid must cover the support
    of the transform derivative at scale F (width about 30 / F).

        A  = int |fhat|^2 / p_bar_prime
        A* = int |fhat|
        B' = F^2 int |d/dw hhat(F w)|^2 / p_bar,  cross-checked by finite
             differences of the quadrature transform (b_prime_fd)
        B  = B' e^{2s},  B* = F ||d/dw hhat(F .)||_L1 e^s,  with
             s = sup |d/dz (z h(z/F))| (independent of F)
        C_timedep = B*^2 (1 + log(A*/B*))^2, or A*^2 once B* >= A*
        C_const   = A tau* + B (1/tau* - 1) at tau* = min(1, sqrt(B/A)),
                    i.e. 2 sqrt(A B) - B on the interior branch and A when
                    the stationary point is clamped to tau = 1 (B > A)
    """
    if F <= 0:
        raise ValueError(f"F must be > 0, got {F}")
    if fhat_mass <= 0:
        raise ValueError(f"fhat_mass must be > 0, got {fhat_mass}")
    if not np.array_equal(fhat_abs.grid, p_bar_prime.grid):
        raise ValueError("fhat_abs and p_bar_prime must share a grid")

    fhat = fhat_mass * fhat_abs.values
    a_star = float(np.trapezoid(fhat, fhat_abs.grid))
    a_val = float(np.trapezoid(_masked_ratio(fhat, p_bar_prime.values) * fhat,
                               fhat_abs.grid))

    omega = p_bar.grid
    dtransform = F * hhat_deriv(F * omega, z_max, z_step)  # d/dw hhat(F w)
    tiny = 1e-12 * max(float(np.max(np.abs(dtransform))), 1e-300)
    if np.any((np.abs(dtransform) > tiny) & (p_bar.values == 0.0)):
        raise ValueError("p_bar vanishes where the transform derivative does not")
    b_prime = F**2 * float(
        np.trapezoid(_masked_ratio(dtransform, p_bar.values) * dtransform, omega)
    )
    shifted_hi = hhat(F * omega + fd_step, z_max, z_step)
    shifted_lo = hhat(F * omega - fd_step, z_max, z_step)
    dtransform_fd = F * (shifted_hi - shifted_lo) / (2.0 * fd_step)
    b_prime_fd = F**2 * float(
        np.trapezoid(_masked_ratio(dtransform_fd, p_bar.values) * dtransform_fd,
                     omega)
    )

    s = zh_prime_sup(z_max)
    b_val = b_prime * np.exp(2.0 * s)
    b_star = F * float(np.trapezoid(np.abs(dtransform), omega)) * np.exp(s)

    if b_star < a_star:
        c_timedep = b_star**2 * (1.0 + np.log(a_star / b_star)) ** 2
    else:
        c_timedep = a_star**2
    tau_star = min(1.0, float(np.sqrt(b_val / a_val))) if a_val > 0 else 1.0
    c_const = a_val * tau_star + b_val * (1.0 / tau_star - 1.0)
    return BoundConstants(
        F=F,
        A=a_val,
        A_star=a_star,
        B_prime=b_prime,
        B=float(b_val),
        B_star=float(b_star),
        C_timedep=float(c_timedep),
        C_const=float(c_const),
        t_star=min(1.0, b_star / a_star),
        tau_star=tau_star,
        b_prime_fd=b_prime_fd,
    )


@dataclass(frozen=True)
class TimeDensities:
    """Separable optimal time-frequency densities with switch point t_star.

    The data branch samples frequency from p_bar_prime and time uniformly on
    [0, t_star] (q_prime); the identity branch samples from p_bar with time
    density proportional to 1/t on [t_star, 1] (q). When t_star = 1 the
    identity branch's time mass concentrates at t = 1 and q is None.
    """

    t_star: float
    a_star: float
    b_star: float
    p_bar_prime: DensitySpec
    q_prime: DensitySpec
    p_bar: DensitySpec
    q: DensitySpec | None


def optimal_time_densities(fhat_abs: DensitySpec, F: float,
                           fhat_mass: float = 1.0, nu_max: float = 30.0,
                           n_omega: int = 4001, n_t: int = 2001,
                           z_max: float = _Z_MAX,
                           z_step: float = _Z_STEP) -> TimeDensities:
    """Assemble the switch point and both factored time-dependent densities.

    The frequency grid of the identity branch spans [-nu_max/F, nu_max/F] so
    that the transform argument F w covers [-nu_max, nu_max].
    """
    if F <= 0:
        raise ValueError(f"F must be > 0, got {F}")
    omega = np.linspace(-nu_max / F, nu_max / F, n_omega)
    dtransform = F * hhat_deriv(F * omega, z_max, z_step)
    s = zh_prime_sup(z_max)
    b_star = F * float(np.trapezoid(np.abs(dtransform), omega)) * np.exp(s)
    a_star = float(fhat_mass)
    t_star = min(1.0, b_star / a_star)

    p_bar_prime = DensitySpec(fhat_abs.grid, fhat_abs.values)
    q_prime = DensitySpec(
        np.linspace(0.0, t_star, n_t), np.full(n_t, 1.0 / t_star)
    )
    p_bar = DensitySpec.from_values(omega, np.abs(dtransform))
    if t_star >= 1.0:
        q = None
    else:
        t_grid = np.geomspace(t_star, 1.0, n_t)
        q = DensitySpec.from_values(t_grid, 1.0 / t_grid)
    return TimeDensities(
        t_star=t_star,
        a_star=a_star,
        b_star=float(b_star),
        p_bar_prime=p_bar_prime,
        q_prime=q_prime,
        p_bar=p_bar,
        q=q,
    )


# ---------------------------------------------------------------------------
# bang-bang budget split


def bang_bang_check(a: float, b: float, tau_grid) -> dict:
    """Minimize G(tau) = A tau + B (1/tau - 1) on a grid and compare with
    the closed form: minimizer min(1, sqrt(B/A)) and the objective value
    there, 2 sqrt(AB) - B on the interior branch (B <= A) and A when the
    stationary point is clamped to the boundary tau = 1 (B > A). Writing the
    value as min(2 sqrt(AB) - B, A) looks equivalent but is not: by AM-GM
    that min always picks the first entry, which no feasible tau attains
    once B > A."""
    if a <= 0 or b <= 0:
        raise ValueError("A and B must be > 0")
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size < 2 or np.any(tau <= 0) or np.any(tau > 1):
        raise ValueError("tau_grid must be 1-D inside (0, 1]")
    values = a * tau + b * (1.0 / tau - 1.0)
    i = int(np.argmin(values))
    tau_star = min(1.0, np.sqrt(b / a))
    value_star = a * tau_star + b * (1.0 / tau_star - 1.0)
    cell = float(np.max(np.diff(tau)))
    return {
        "tau_grid_min": float(tau[i]),
        "value_grid_min": float(values[i]),
        "tau_star": float(tau_star),
        "value_star": float(value_star),
        "tau_ok": bool(abs(tau[i] - tau_star) <= cell),
        "value_ok": bool(abs(values[i] - value_star) <= 1e-6 * max(value_star, 1.0)),
    }


# ---------------------------------------------------------------------------
# stratified layer times


def stratified_times(q: DensitySpec, n_layers: int, n_per_stratum: int,
                     seed: int = 0):
    """Stratified inverse-CDF sampling of layer times.

    Layer l (0-based) draws uniforms on [l/L, (l+1)/L) and maps them through
    the inverse CDF of q. Returns (times, levels): times has shape
    (n_layers, n_per_stratum); levels are the L+1 stratum boundaries in time.
    """
    if n_layers < 1 or n_per_stratum < 1:
        raise ValueError("n_layers and n_per_stratum must be >= 1")
    nodes = q.cdf_nodes()
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("cumulative distribution is not strictly increasing")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u = rng.uniform(size=(n_layers, n_per_stratum))
    tau = (np.arange(n_layers)[:, None] + u) / n_layers
    times = np.interp(tau, nodes, q.grid)
    levels = np.interp(np.arange(n_layers + 1) / n_layers, nodes, q.grid)
    return times, levels


def stratified_chi2(q: DensitySpec, n_layers: int, n_per_stratum: int,
                    bins: int = 10, seed: int = 0) -> dict:
    """Goodness of fit of stratified draws against the per-stratum law.

    Within stratum l the sampled time has density L q(t) restricted to
    [t_l, t_{l+1}); expected bin masses come from the same numerical CDF the
    sampler inverts, so the test has no discretization bias. Chi-square
    statistics and degrees of freedom are summed across strata.
    """
    times, levels = stratified_times(q, n_layers, n_per_stratum, seed)
    nodes = q.cdf_nodes()
    stat = 0.0
    per_stratum = []
    for ell in range(n_layers):
        edges = np.linspace(levels[ell], levels[ell + 1], bins + 1)
        counts, _ = np.histogram(times[ell], edges)
        probs = np.diff(np.interp(edges, q.grid, nodes)) * n_layers
        expected = n_per_stratum * probs
        contrib = float(np.sum((counts - expected) ** 2 / expected))
        per_stratum.append(contrib)
        stat += contrib
    dof = n_layers * (bins - 1)
    p_value = float(stats.chi2.sf(stat, dof))
    return {
        "statistic": stat,
        "dof": dof,
        "p_value": p_value,
        "per_stratum": per_stratum,
        "passed": bool(p_value >= 0.01),
    }
