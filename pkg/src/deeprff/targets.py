"""Benchmark target functions and dataset generation.

Two regression targets built on the Sine integral Si(v) = int_0^v sin(t)/t dt:

    f1(x) = Si(x_1 / a) * exp(-|x|^2 / 2)
    f2(x) = Si(x_1 / a) * exp(-x_1^2 / 2)

with a = 0.01 by default, so both have a steep regularized jump at x_1 = 0.
Inputs are iid standard normal. Training data are normalized componentwise by
their own mean and standard deviation; test data reuse the training stats.
Targets are normalized the same way by default (selectable), and the stats are
recorded so predictions can be mapped back.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import sici

DEFAULT_A = 1e-2


def si(v):
    """Sine integral, vectorized, odd, absolute accuracy well below 1e-10."""
    v = np.asarray(v, dtype=float)
    out = sici(v)[0]
    return out if out.ndim else float(out)


def _check_a(a: float) -> float:
    if not a > 0:
        raise ValueError(f"a must be > 0, got {a}")
    return float(a)


def _as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    return pts[None, :] if pts.ndim == 1 else pts


def f1(x, a: float = DEFAULT_A):
    """Si(x_1/a) * exp(-|x|^2/2) rowwise; accepts one point or an (N, d) array."""
    a = _check_a(a)
    pts = _as_points(x)
    vals = si(pts[:, 0] / a) * np.exp(-0.5 * np.sum(pts * pts, axis=1))
    return vals if np.asarray(x).ndim > 1 else float(vals[0])


def f2(x, a: float = DEFAULT_A):
    """Si(x_1/a) * exp(-x_1^2/2); depends on the first coordinate only."""
    a = _check_a(a)
    pts = _as_points(x)
    vals = si(pts[:, 0] / a) * np.exp(-0.5 * pts[:, 0] ** 2)
    return vals if np.asarray(x).ndim > 1 else float(vals[0])


TARGETS = {"f1": f1, "f2": f2}


@dataclass(frozen=True)
class NormStats:
    """Affine normalization stats: z = (v - mean) / std, componentwise for x."""

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    normalize_targets: bool


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray       # (N, d), normalized
    y: np.ndarray       # (N,), normalized when stats.normalize_targets
    stats: NormStats    # the stats APPLIED to this dataset (train's own stats for test)
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]


def denormalize_inputs(x: np.ndarray, stats: NormStats) -> np.ndarray:
    return x * stats.x_std + stats.x_mean


def denormalize_targets(y: np.ndarray, stats: NormStats) -> np.ndarray:
    if not stats.normalize_targets:
        return np.asarray(y, dtype=float)
    return y * stats.y_std + stats.y_mean


def gen_dataset(
    n: int,
    d: int,
    target: str = "f1",
    a: float = DEFAULT_A,
    seed: int = 0,
    n_test: int | None = None,
    normalize_targets: bool = True,
    noise_std: float = 0.0,
):
    """Draw train and test sets for one target function.

    Raw inputs are iid standard normal, targets are evaluated on the raw
    inputs (plus optional additive N(0, noise_std^2) noise, off by default).
    The train set is normalized by its own componentwise moments; the test set
    is normalized with the TRAIN stats. RNG draw order is fixed (train x,
    test x, train noise, test noise) so runs are reproducible per seed.

    Returns (train, test) Datasets.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2 for normalization, got {n}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; choose from {sorted(TARGETS)}")
    if noise_std < 0:
        raise ValueError(f"noise_std must be >= 0, got {noise_std}")
    a = _check_a(a)
    m = n if n_test is None else int(n_test)
    if m < 1:
        raise ValueError(f"n_test must be >= 1, got {m}")
    fn = TARGETS[target]
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x_train_raw = rng.standard_normal((n, d))
    x_test_raw = rng.standard_normal((m, d))
    y_train_raw = fn(x_train_raw, a)
    y_test_raw = fn(x_test_raw, a)
    if noise_std > 0:
        y_train_raw = y_train_raw + noise_std * rng.standard_normal(n)
        y_test_raw = y_test_raw + noise_std * rng.standard_normal(m)

    x_mean = x_train_raw.mean(axis=0)
    x_std = x_train_raw.std(axis=0)
    if np.any(x_std < 1e-12):
        raise ValueError("degenerate input sample: zero standard deviation component")
    if normalize_targets:
        y_mean = float(y_train_raw.mean())
        y_std = float(y_train_raw.std())
        if y_std < 1e-12:
            raise ValueError("degenerate targets: zero standard deviation")
    else:
        y_mean, y_std = 0.0, 1.0
    stats = NormStats(
        x_mean=x_mean,
        x_std=x_std,
        y_mean=y_mean,
        y_std=y_std,
        normalize_targets=normalize_targets,
    )

    def _apply(xr, yr):
        xn = (xr - x_mean) / x_std
        yn = (yr - y_mean) / y_std if normalize_targets else yr
        return xn, yn

    x_tr, y_tr = _apply(x_train_raw, y_train_raw)
    x_te, y_te = _apply(x_test_raw, y_test_raw)
    train = Dataset(x=x_tr, y=y_tr, stats=stats, seed=seed)
    test = Dataset(x=x_te, y=y_te, stats=stats, seed=seed)
    return train, test


def _stats_path(path) -> str:
    return f"{path}.stats.json"


def save_dataset(ds: Dataset, path) -> None:
    """Write x_1..x_d,y rows as CSV plus a .stats.json sidecar."""
    d = ds.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x_{j + 1}" for j in range(d)] + ["y"])
        for row, y in zip(ds.x, ds.y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(y))])
    sidecar = {
        "x_mean": ds.stats.x_mean.tolist(),
        "x_std": ds.stats.x_std.tolist(),
        "y_mean": ds.stats.y_mean,
        "y_std": ds.stats.y_std,
        "normalize_targets": ds.stats.normalize_targets,
        "seed": ds.seed,
    }
    with open(_stats_path(path), "w") as fh:
        json.dump(sidecar, fh, indent=1)
        fh.write("\n")


def load_dataset(path) -> Dataset:
    """Read a dataset written by save_dataset (CSV + sidecar stats)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "y" or not all(
            h == f"x_{j + 1}" for j, h in enumerate(header[:-1])
        ):
            raise ValueError(f"unexpected CSV header {header}")
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError("ragged or empty dataset CSV")
    with open(_stats_path(path)) as fh:
        sc = json.load(fh)
    stats = NormStats(
        x_mean=np.asarray(sc["x_mean"], dtype=float),
        x_std=np.asarray(sc["x_std"], dtype=float),
        y_mean=float(sc["y_mean"]),
        y_std=float(sc["y_std"]),
        normalize_targets=bool(sc["normalize_targets"]),
    )
    return Dataset(x=data[:, :-1], y=data[:, -1], stats=stats, seed=sc.get("seed"))


def subset(ds: Dataset, n: int) -> Dataset:
    """First n points of a dataset (used for pre-training on N_1 <= N)."""
    if not 1 <= n <= ds.n:
        raise ValueError(f"subset size {n} out of range 1..{ds.n}")
    return replace(ds, x=ds.x[:n], y=ds.y[:n])
