"""Adaptive Metropolis sampling of Fourier feature frequencies.

The frequency vector performs a random-walk Metropolis chain whose per-node
acceptance ratio is |amp'_k|^gamma / |amp_k|^gamma, where the amplitudes are
ridge least-squares solutions at the proposed and current frequencies. Nodes
with large fitted amplitudes attract the walk, which drives the sampled
frequencies toward the amplitude-equidistributing density.

One chain iteration:

1. draw a full (K, d) standard-normal proposal and K uniforms (in this order,
   from one seeded generator, so chains replay exactly);
2. solve for amplitudes at the proposed frequencies;
3. per node, accept if the amplitude ratio exceeds the uniform draw; accepted
   nodes take the proposed frequency and amplitude;
4. every refresh_every-th iteration, re-solve amplitudes jointly at the
   current (mixed) frequencies.

A final joint solve ties the returned amplitudes to the final frequencies.

The residual-layer variant appends feature columns in the scalar state with
frequencies drawn once from the standard normal and never updated; the
Metropolis test runs on the x-branch only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import (
    RidgeProblem,
    assemble_design_x,
    pairs_to_complex,
    solve_ridge,
    solve_ridge_gram,
)
from .model import FourierLayer
from .targets import Dataset


@dataclass(frozen=True)
class MetropolisConfig:
    """Chain parameters.

    n_features   number of complex nodes K
    total_time   sampling time T; the iteration count is int(T / step^2)
    step         proposal step length
    exponent     acceptance exponent gamma (dimension-scaled default 3d - 2,
                 see default_exponent)
    tikhonov     ridge parameter of the amplitude solves
    refresh_every  joint amplitude re-solve period m
    n_iterations   explicit iteration count override; allows step = 0 chains
                   and pinning M directly
    """

    n_features: int
    step: float
    exponent: float
    tikhonov: float = 1.1
    total_time: float | None = None
    refresh_every: int = 1
    n_iterations: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {self.n_features}")
        if self.step < 0 or not np.isfinite(self.step):
            raise ValueError(f"step must be >= 0, got {self.step}")
        if self.exponent <= 0:
            raise ValueError(f"exponent must be > 0, got {self.exponent}")
        if self.tikhonov < 0:
            raise ValueError(f"tikhonov must be >= 0, got {self.tikhonov}")
        if self.refresh_every < 1:
            raise ValueError(f"refresh_every must be >= 1, got {self.refresh_every}")
        if self.n_iterations is None:
            if self.total_time is None:
                raise ValueError("either total_time or n_iterations is required")
            if self.step == 0:
                raise ValueError("step = 0 requires an explicit n_iterations")
            if int(self.total_time / self.step**2) < 1:
                raise ValueError(
                    f"iteration count int(T/step^2) = "
                    f"{int(self.total_time / self.step**2)} must be >= 1"
                )
        elif self.n_iterations < 1:
            raise ValueError(f"n_iterations must be >= 1, got {self.n_iterations}")

    @property
    def iterations(self) -> int:
        if self.n_iterations is not None:
            return self.n_iterations
        return int(self.total_time / self.step**2)


def default_step(d: int) -> float:
    """Proposal step 0.5 * 2.4^2 / d."""
    return 0.5 * 2.4**2 / d


def default_exponent(d: int) -> float:
    """Acceptance exponent 3d - 2."""
    return float(3 * d - 2)


def _solve(design: np.ndarray, targets: np.ndarray, tikhonov: float) -> np.ndarray:
    """Complex amplitudes of the ridge solution for a cos/-sin paired design."""
    if tikhonov > 0:
        coeffs = solve_ridge_gram(design, targets, tikhonov)
    else:
        coeffs = solve_ridge(RidgeProblem(design, targets, tikhonov))
    return pairs_to_complex(coeffs)


def _accept_mask(amps_prop, amps_cur, exponent, uniforms) -> np.ndarray:
    num = np.abs(amps_prop)
    den = np.abs(amps_cur)
    accept = np.empty(num.shape, dtype=bool)
    zero = den == 0.0
    # ratio is +inf when only the proposal is non-zero, 0 when both vanish
    accept[zero] = num[zero] > 0.0
    ok = ~zero
    with np.errstate(over="ignore"):
        ratio = (num[ok] / den[ok]) ** exponent
    accept[ok] = ratio > uniforms[ok]
    return accept


def fit_fourier_features(points, targets, cfg: MetropolisConfig, rng=None, fixed_design=None):
    """Run the Metropolis chain on raw arrays.

    points        (N, d) inputs
    targets       (N,) regression targets
    fixed_design  optional (N, 2K_z) extra columns appended after the
                  Metropolis-updated block and kept fixed (the residual-layer
                  z-branch); their amplitudes join every least-squares solve
                  but are exempt from the Metropolis test
    rng           optional generator override (scripted chains in tests);
                  defaults to a fresh generator seeded from cfg.seed

    Returns (frequencies (K, d), amps complex (K,), fixed_amps complex (K_z,)).
    """
    x = np.asarray(points, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError("points must be (N, d) and targets (N,)")
    n, d = x.shape
    k = cfg.n_features
    if k > 2 * n:
        warnings.warn(
            f"K = {k} exceeds 2N = {2 * n}: the amplitude problem is underdetermined",
            stacklevel=2,
        )
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))

    n_fixed = 0 if fixed_design is None else fixed_design.shape[1] // 2

    def solve_at(design_x):
        full = design_x if fixed_design is None else np.hstack([design_x, fixed_design])
        return _solve(full, y, cfg.tikhonov)

    freq = np.zeros((k, d))
    design = assemble_design_x(x, freq)
    amps_all = solve_at(design)
    # True while amps_all is the joint solution at the current frequencies;
    # per-node swaps break that, a refresh or final solve restores it
    synced = True

    for i in range(1, cfg.iterations + 1):
        prop = rng.standard_normal((k, d))
        uniforms = rng.uniform(size=k)
        freq_prop = freq + cfg.step * prop
        design_prop = assemble_design_x(x, freq_prop)
        amps_prop = solve_at(design_prop)
        accept = _accept_mask(amps_prop[:k], amps_all[:k], cfg.exponent, uniforms)
        if np.any(accept):
            freq[accept] = freq_prop[accept]
            cols = np.repeat(accept, 2)
            design[:, cols] = design_prop[:, cols]
            amps_all = amps_all.copy()
            amps_all[:k][accept] = amps_prop[:k][accept]
            synced = False
        if i % cfg.refresh_every == 0 and not synced:
            amps_all = solve_at(design)
            synced = True

    if not synced:
        amps_all = solve_at(design)
    if n_fixed:
        return freq, amps_all[:k], amps_all[k:]
    return freq, amps_all, np.zeros(0, dtype=complex)


def arfm_train(data: Dataset, cfg: MetropolisConfig) -> FourierLayer:
    """Adaptive random Fourier features fit of a dataset (x-branch layer)."""
    freq, amps, _ = fit_fourier_features(data.x, data.y, cfg)
    return FourierLayer(freq_x=freq, amp_x=amps)


def arfm_residual_train(
    data: Dataset,
    residuals,
    states,
    cfg: MetropolisConfig,
    freq_z_seed: int,
) -> FourierLayer:
    """Modified chain for one residual layer.

    Fits the residuals with x-branch features (Metropolis-updated) plus
    z-branch features in the given states, whose frequencies are drawn once
    from the standard normal (seeded by freq_z_seed) and never updated.
    """
    r = np.asarray(residuals, dtype=float)
    z = np.asarray(states, dtype=float)
    if r.shape != (data.n,) or z.shape != (data.n,):
        raise ValueError(
            f"residuals and states must have length {data.n}, "
            f"got {r.shape} and {z.shape}"
        )
    rng_z = np.random.default_rng(np.random.SeedSequence(freq_z_seed))
    freq_z = rng_z.standard_normal(cfg.n_features)
    z_design = assemble_design_x(z[:, None], freq_z[:, None])
    freq_x, amp_x, amp_z = fit_fourier_features(
        data.x, r, cfg, fixed_design=z_design
    )
    return FourierLayer(freq_x=freq_x, amp_x=amp_x, freq_z=freq_z, amp_z=amp_z)
