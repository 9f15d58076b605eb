"""Replicated generalization-error benchmarks.

One experiment = one (method, target, d, K, L, N) cell run over independent
replicas. Each replica derives its RNG streams from the master seed by a
counter-based split (master, replica index, stream tag), so re-running any
configuration reproduces results bit for bit, replicas can run in separate
processes without sharing state, and two configs with the same master seed
see the same data per replica (paired comparisons).

Stream tags: 0 dataset, 1 frequency chain, 2 initial net, 3 batch shuffle.

The generalization error of a replica is the mean squared error on the
held-out test set. Aggregation reports the replica mean e, the unbiased
standard deviation s, and the error bar [e - 2s, e + 2s].

CSV output is deterministic: rows in replica order, floats via repr, no
timestamps. DEEPRFF_THREADS caps replica parallelism (default 1, serial).
"""

from __future__ import annotations

import csv
import json
import os
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import __version__
from .gradopt import AdamConfig, train_global, train_pretrained, xavier_init
from .layerwise import train_layerwise
from .metropolis import MetropolisConfig, default_exponent, default_step
from .model import predict, save_model
from .targets import TARGETS, gen_dataset

RESULT_COLUMNS = ("method", "d", "K", "L", "KL", "replica", "seed", "error")
SUMMARY_COLUMNS = ("method", "d", "K", "L", "KL", "replicas",
                   "e_mean", "e_std", "bar_low", "bar_high")


def derive_seed(master: int, replica: int, tag: int) -> int:
    """Counter-based seed split; tag selects the stream within a replica."""
    return int(np.random.SeedSequence((master, replica, tag)).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark cell plus the per-method training parameters.

    Fields irrelevant to the chosen method are ignored (chain parameters for
    method 2, gradient parameters for method 1). met_step and met_exponent
    default to the dimension-scaled values 0.5 * 2.4^2 / d and 3 d - 2 when
    left as None. n_pretrain (method 3) defaults to the full training set.
    """

    method: int = 1
    target: str = "f1"
    input_dim: int = 3
    n_features: int = 16
    n_layers: int = 1
    n_train: int = 1000
    n_test: int = 1000
    n_pretrain: int | None = None
    replicas: int = 5
    seed: int = 0
    out_dir: str | None = None
    # frequency-chain phase (methods 1 and 3)
    met_iterations: int = 500
    met_step: float | None = None
    met_exponent: float | None = None
    tikhonov: float = 1.1
    refresh_every: int = 1
    # gradient phase (methods 2 and 3)
    epochs: int = 20
    batch_size: int = 100
    base_rate: float = 1e-3
    penalty: float = 0.0

    def __post_init__(self):
        if self.method not in (1, 2, 3):
            raise ValueError(f"method must be 1, 2 or 3, got {self.method}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        for name in ("input_dim", "n_features", "n_layers", "n_train",
                     "n_test", "replicas"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.method in (1, 3):
            if self.met_iterations < 1:
                raise ValueError(
                    f"met_iterations must be >= 1 for method {self.method}, "
                    f"got {self.met_iterations}"
                )
            if self.refresh_every < 1:
                raise ValueError(f"refresh_every must be >= 1, got {self.refresh_every}")
            if self.tikhonov < 0:
                raise ValueError(f"tikhonov must be >= 0, got {self.tikhonov}")
            if self.met_step is not None and self.met_step <= 0:
                raise ValueError(f"met_step must be > 0, got {self.met_step}")
            if self.met_exponent is not None and self.met_exponent <= 0:
                raise ValueError(f"met_exponent must be > 0, got {self.met_exponent}")
        if self.method in (2, 3):
            if self.epochs < 1:
                raise ValueError(f"epochs must be >= 1 for method {self.method}")
            if self.batch_size < 1:
                raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
            if self.base_rate < 0:
                raise ValueError(f"base_rate must be >= 0, got {self.base_rate}")
            if self.penalty < 0:
                raise ValueError(f"penalty must be >= 0, got {self.penalty}")
        if self.method == 3 and self.n_pretrain is not None:
            if not 1 <= self.n_pretrain <= self.n_train:
                raise ValueError(
                    f"n_pretrain must lie in [1, n_train={self.n_train}], "
                    f"got {self.n_pretrain}"
                )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    @property
    def kl(self) -> int:
        return self.n_features * self.n_layers


@dataclass(frozen=True)
class ExperimentResult:
    """Per-replica errors with their aggregate statistics."""

    config: ExperimentConfig
    errors: tuple
    replica_seeds: tuple

    def __post_init__(self):
        if len(self.errors) != self.config.replicas:
            raise ValueError(
                f"{len(self.errors)} errors for {self.config.replicas} replicas"
            )
        object.__setattr__(self, "errors", tuple(float(e) for e in self.errors))
        object.__setattr__(self, "replica_seeds", tuple(int(s) for s in self.replica_seeds))

    @property
    def e_mean(self) -> float:
        return float(np.mean(self.errors))

    @property
    def e_std(self) -> float:
        if len(self.errors) < 2:
            return 0.0
        return float(np.std(self.errors, ddof=1))

    @property
    def bar(self) -> tuple:
        return (self.e_mean - 2.0 * self.e_std, self.e_mean + 2.0 * self.e_std)


def _metropolis_config(cfg: ExperimentConfig, seed: int) -> MetropolisConfig:
    step = cfg.met_step if cfg.met_step is not None else default_step(cfg.input_dim)
    exponent = (cfg.met_exponent if cfg.met_exponent is not None
                else default_exponent(cfg.input_dim))
    return MetropolisConfig(
        n_features=cfg.n_features,
        step=step,
        exponent=exponent,
        tikhonov=cfg.tikhonov,
        refresh_every=cfg.refresh_every,
        n_iterations=cfg.met_iterations,
        seed=seed,
    )


def run_replica(cfg: ExperimentConfig, replica: int):
    """Train one replica; returns (dataset seed, test error, net)."""
    ds_seed = derive_seed(cfg.seed, replica, 0)
    train, test = gen_dataset(
        cfg.n_train, cfg.input_dim, target=cfg.target,
        seed=ds_seed, n_test=cfg.n_test,
    )
    if cfg.method == 1:
        met = _metropolis_config(cfg, derive_seed(cfg.seed, replica, 1))
        net = train_layerwise(train, cfg.n_layers, met)
    elif cfg.method == 2:
        net = xavier_init(cfg.n_layers, cfg.n_features, cfg.input_dim,
                          seed=derive_seed(cfg.seed, replica, 2))
        adam = AdamConfig(
            epochs=cfg.epochs, batch_size=cfg.batch_size,
            base_rate=cfg.base_rate, penalty=cfg.penalty,
            seed=derive_seed(cfg.seed, replica, 3),
        )
        net = train_global(net, train, adam)
    else:
        met = _metropolis_config(cfg, derive_seed(cfg.seed, replica, 1))
        adam = AdamConfig(
            epochs=cfg.epochs, batch_size=cfg.batch_size,
            base_rate=cfg.base_rate, penalty=cfg.penalty,
            seed=derive_seed(cfg.seed, replica, 3),
        )
        n1 = cfg.n_pretrain if cfg.n_pretrain is not None else cfg.n_train
        net = train_pretrained(train, n1, cfg.n_layers, met, adam)
    error = float(np.mean((predict(net, test.x) - test.y) ** 2))
    return ds_seed, error, net


def _run_replica_tuple(args):
    cfg, replica = args
    return run_replica(cfg, replica)


def _worker_count(n_tasks: int) -> int:
    cap = int(os.environ.get("DEEPRFF_THREADS", "1"))
    return max(1, min(cap, n_tasks))


def _result_rows(result: ExperimentResult) -> list:
    cfg = result.config
    return [
        [cfg.method, cfg.input_dim, cfg.n_features, cfg.n_layers, cfg.kl,
         replica, seed, repr(err)]
        for replica, (seed, err) in enumerate(zip(result.replica_seeds, result.errors))
    ]


def _summary_row(result: ExperimentResult) -> list:
    cfg = result.config
    lo, hi = result.bar
    return [cfg.method, cfg.input_dim, cfg.n_features, cfg.n_layers, cfg.kl,
            cfg.replicas, repr(result.e_mean), repr(result.e_std),
            repr(lo), repr(hi)]


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True, text=True, timeout=10,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _write_manifest(out_dir: str, payload: dict) -> None:
    doc = {"version": __version__, "build": _build_id(), **payload}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all replicas of one configuration and aggregate.

    With out_dir set, writes results.csv (one row per replica), summary.csv,
    a manifest.json holding the resolved config, and the trained model of
    each replica (model_r<i>.json).
    """
    tasks = [(cfg, r) for r in range(cfg.replicas)]
    workers = _worker_count(len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_replica_tuple, tasks))
    else:
        outcomes = [run_replica(*t) for t in tasks]
    seeds = tuple(o[0] for o in outcomes)
    errors = tuple(o[1] for o in outcomes)
    result = ExperimentResult(config=cfg, errors=errors, replica_seeds=seeds)

    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        _write_csv(os.path.join(cfg.out_dir, "results.csv"), RESULT_COLUMNS,
                   _result_rows(result))
        _write_csv(os.path.join(cfg.out_dir, "summary.csv"), SUMMARY_COLUMNS,
                   [_summary_row(result)])
        _write_manifest(cfg.out_dir, {"config": cfg.to_dict()})
        for replica, (_, _, net) in enumerate(outcomes):
            save_model(net, os.path.join(cfg.out_dir, f"model_r{replica}.json"))
    return result


def fit_loglog_slope(kl_values, means) -> float:
    """Least-squares slope of log(error) against log(KL)."""
    kl_values = np.asarray(kl_values, dtype=float)
    means = np.asarray(means, dtype=float)
    if kl_values.size != means.size or kl_values.size < 2:
        raise ValueError("need matching arrays of at least 2 points")
    if np.any(kl_values <= 0) or np.any(means <= 0):
        raise ValueError("log-log fit needs positive values")
    return float(np.polyfit(np.log(kl_values), np.log(means), 1)[0])


@dataclass(frozen=True)
class SweepResult:
    kl_values: tuple
    results: tuple
    slope: float


def sweep_kl(cfg: ExperimentConfig, kl_values) -> SweepResult:
    """Run one experiment per total node count KL and fit the decay slope.

    Each KL must be divisible by cfg.n_layers; the per-layer node count is
    KL / L. With cfg.out_dir set, writes the pooled results.csv, a per-KL
    summary.csv, and a manifest recording the config, the KL list, and the
    fitted slope.
    """
    kl_values = [int(v) for v in kl_values]
    if len(kl_values) < 3:
        raise ValueError(f"need at least 3 KL values, got {len(kl_values)}")
    results = []
    for kl in kl_values:
        if kl % cfg.n_layers != 0:
            raise ValueError(f"KL={kl} not divisible by n_layers={cfg.n_layers}")
        sub = replace(cfg, n_features=kl // cfg.n_layers, out_dir=None)
        results.append(run_experiment(sub))
    slope = fit_loglog_slope(kl_values, [r.e_mean for r in results])

    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        rows = [row for r in results for row in _result_rows(r)]
        _write_csv(os.path.join(cfg.out_dir, "results.csv"), RESULT_COLUMNS, rows)
        _write_csv(os.path.join(cfg.out_dir, "summary.csv"), SUMMARY_COLUMNS,
                   [_summary_row(r) for r in results])
        _write_manifest(cfg.out_dir, {
            "config": cfg.to_dict(),
            "kl_values": kl_values,
            "slope": slope,
        })
    return SweepResult(tuple(kl_values), tuple(results), slope)


_SHARED_FIELDS = ("target", "input_dim", "n_features", "n_layers",
                  "n_train", "n_test", "replicas", "seed")


def compare_methods(cfg_a: ExperimentConfig, cfg_b: ExperimentConfig) -> dict:
    """Paired comparison of two training methods on matched replicas.

    Both configs must agree on every data-defining field so replica r sees
    identical train/test sets on both sides; method-specific training
    parameters may differ. Reports per-replica errors, means, and the win
    rate of the lower-mean method.
    """
    for name in _SHARED_FIELDS:
        if getattr(cfg_a, name) != getattr(cfg_b, name):
            raise ValueError(
                f"configs disagree on {name}: "
                f"{getattr(cfg_a, name)!r} vs {getattr(cfg_b, name)!r}"
            )
    res_a = run_experiment(replace(cfg_a, out_dir=None))
    res_b = run_experiment(replace(cfg_b, out_dir=None))
    errors_a = np.asarray(res_a.errors)
    errors_b = np.asarray(res_b.errors)
    wins_a = int(np.sum(errors_a < errors_b))
    wins_b = int(np.sum(errors_b < errors_a))
    better = "a" if res_a.e_mean <= res_b.e_mean else "b"
    wins_better = wins_a if better == "a" else wins_b
    report = {
        "method_a": cfg_a.method,
        "method_b": cfg_b.method,
        "replica_seeds": list(res_a.replica_seeds),
        "errors_a": list(res_a.errors),
        "errors_b": list(res_b.errors),
        "mean_a": res_a.e_mean,
        "mean_b": res_b.e_mean,
        "wins_a": wins_a,
        "wins_b": wins_b,
        "better": better,
        "win_rate": wins_better / cfg_a.replicas,
    }
    if cfg_a.out_dir is not None:
        os.makedirs(cfg_a.out_dir, exist_ok=True)
        rows = [
            [r, seed, repr(ea), repr(eb)]
            for r, (seed, ea, eb) in enumerate(
                zip(res_a.replica_seeds, res_a.errors, res_b.errors)
            )
        ]
        _write_csv(os.path.join(cfg_a.out_dir, "compare.csv"),
                   ("replica", "seed", "error_a", "error_b"), rows)
        _write_manifest(cfg_a.out_dir, {
            "config_a": cfg_a.to_dict(),
            "config_b": cfg_b.to_dict(),
            "report": {k: v for k, v in report.items()},
        })
    return report
