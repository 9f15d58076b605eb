"""Fourier design matrices and Tikhonov-regularized least squares.

Complex feature expansions Re sum_k beta_k exp(i omega_k . x) are handled in
real arithmetic throughout: each complex node k contributes a column pair
(cos(omega_k . x), -sin(omega_k . x)), so that a real coefficient pair
(a_k, b_k) recovers the complex amplitude beta_k = a_k + i b_k and the real
two-norm of the coefficient vector equals the complex modulus norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


def _as_2d_float(arr, name: str) -> np.ndarray:
    out = np.asarray(arr, dtype=float)
    if out.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {out.shape}")
    return out


def assemble_design_x(points, frequencies) -> np.ndarray:
    """Real design matrix for x-branch features exp(i omega_k . x_n).

    Parameters
    ----------
    points : (N, d) array
    frequencies : (K, d) array

    Returns
    -------
    (N, 2K) array whose columns 2k, 2k+1 hold cos(omega_k . x_n) and
    -sin(omega_k . x_n).
    """
    x = _as_2d_float(points, "points")
    w = _as_2d_float(frequencies, "frequencies")
    if x.shape[1] != w.shape[1]:
        raise ValueError(
            f"points dimension {x.shape[1]} != frequencies dimension {w.shape[1]}"
        )
    phases = x @ w.T
    design = np.empty((x.shape[0], 2 * w.shape[0]))
    np.cos(phases, out=design[:, 0::2])
    np.sin(phases, out=design[:, 1::2])
    design[:, 1::2] *= -1.0
    return design


def assemble_design_resid(points, states, freq_x, freq_z) -> np.ndarray:
    """Design matrix for a residual layer: x-branch block then z-branch block.

    The first 2K columns encode exp(i omega'_k . x_n), the last 2K_z columns
    encode exp(i omega_k * z_n) where z_n is the scalar state at point n,
    both with the cos/-sin pairing of assemble_design_x.
    """
    x = _as_2d_float(points, "points")
    z = np.asarray(states, dtype=float)
    if z.ndim != 1 or z.shape[0] != x.shape[0]:
        raise ValueError(
            f"states must be 1-d with length {x.shape[0]}, got shape {z.shape}"
        )
    wz = np.asarray(freq_z, dtype=float)
    if wz.ndim != 1:
        raise ValueError(f"freq_z must be 1-d, got shape {wz.shape}")
    left = assemble_design_x(x, freq_x)
    if wz.size == 0:
        return left
    right = assemble_design_x(z[:, None], wz[:, None])
    return np.hstack([left, right])


@dataclass(frozen=True)
class RidgeProblem:
    """Least-squares data for min_beta N^-1 |S beta - y|^2 + tikhonov |beta|^2."""

    design: np.ndarray
    targets: np.ndarray
    tikhonov: float

    def __post_init__(self):
        if self.design.ndim != 2:
            raise ValueError("design must be a 2-d array")
        if self.targets.ndim != 1 or self.targets.shape[0] != self.design.shape[0]:
            raise ValueError(
                f"targets length {self.targets.shape} does not match "
                f"design rows {self.design.shape[0]}"
            )
        if not np.isfinite(self.tikhonov) or self.tikhonov < 0:
            raise ValueError(f"tikhonov must be >= 0, got {self.tikhonov}")


def solve_ridge(problem: RidgeProblem) -> np.ndarray:
    """Minimizer of N^-1 |S beta - y|^2 + tikhonov |beta|^2.

    The ridge term is folded in as sqrt(N * tikhonov) rows appended below the
    design, and the augmented system is solved by an orthogonal factorization
    (LAPACK gelsd), so a single path covers tikhonov = 0 and tikhonov > 0.
    For tikhonov = 0 with a rank-deficient design the minimum-norm solution
    is returned, so degenerate frequency sets (duplicate columns) stay
    deterministic.
    """
    n, cols = problem.design.shape
    if problem.tikhonov > 0:
        aug = np.vstack(
            [problem.design, np.sqrt(n * problem.tikhonov) * np.eye(cols)]
        )
        rhs = np.concatenate([problem.targets, np.zeros(cols)])
    else:
        aug = problem.design
        rhs = problem.targets
    coef, _, _, _ = scipy.linalg.lstsq(aug, rhs, lapack_driver="gelsd")
    return coef


def solve_ridge_gram(design: np.ndarray, targets: np.ndarray, tikhonov: float) -> np.ndarray:
    """Fast ridge solve through the Gram matrix, for tikhonov > 0 only.

    Forms S^T S + N*tikhonov*I and solves by Cholesky. The ridge shift makes
    the system positive definite and well conditioned for the tikhonov values
    used in training (order 1), where this path is several times faster than
    the orthogonal factorization in solve_ridge and agrees with it to machine
    precision (see tests). Use solve_ridge when tikhonov = 0 or when the
    minimum-norm guarantee matters.
    """
    if tikhonov <= 0:
        raise ValueError("solve_ridge_gram requires tikhonov > 0; use solve_ridge")
    n = design.shape[0]
    gram = design.T @ design
    gram[np.diag_indices_from(gram)] += n * tikhonov
    rhs = design.T @ targets
    cho = scipy.linalg.cho_factor(gram, lower=True, check_finite=False, overwrite_a=True)
    return scipy.linalg.cho_solve(cho, rhs, check_finite=False)


def pairs_to_complex(coeffs: np.ndarray) -> np.ndarray:
    """Interleaved real pairs (a_0, b_0, a_1, b_1, ...) -> complex amplitudes."""
    if coeffs.ndim != 1 or coeffs.size % 2 != 0:
        raise ValueError(f"expected an even-length 1-d vector, got shape {coeffs.shape}")
    return coeffs[0::2] + 1j * coeffs[1::2]


def complex_to_pairs(amps: np.ndarray) -> np.ndarray:
    """Complex amplitudes -> interleaved real coefficient pairs."""
    out = np.empty(2 * amps.size)
    out[0::2] = amps.real
    out[1::2] = amps.imag
    return out
