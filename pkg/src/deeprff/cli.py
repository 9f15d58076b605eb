"""Command-line front end.

Subcommands: `data gen` (export train/test CSVs), `train` (fit one model and
save it), `sweep` (error vs total node count with a fitted log-log slope),
`compare` (paired methods on matched seeds), `verify-theory` (numerical
checks of the supporting analysis), `eval` (score a saved model).

Configuration: every experiment field can come from a JSON config file
(--config, keys named like ExperimentConfig fields) or from flags; flags
beat the file, the file beats defaults. DEEPRFF_SEED overrides the master
seed unless --seed is given explicitly; DEEPRFF_THREADS caps replica
parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import theory
from .experiments import (
    ExperimentConfig,
    compare_methods,
    derive_seed,
    run_experiment,
    sweep_kl,
)
from .gradopt import AdamConfig, train_global, train_pretrained, xavier_init
from .layerwise import train_layerwise
from .metropolis import MetropolisConfig, default_exponent, default_step
from .model import load_model, predict, save_model
from .targets import gen_dataset, load_dataset, save_dataset

_CONFIG_FLAGS = (
    ("--method", "method", int, "training method (1 chain, 2 gradient, 3 both)"),
    ("--target", "target", str, "target function (f1 or f2)"),
    ("--d", "input_dim", int, "input dimension"),
    ("--k", "n_features", int, "nodes per layer"),
    ("--l", "n_layers", int, "layer count"),
    ("--n", "n_train", int, "training points"),
    ("--n-test", "n_test", int, "test points"),
    ("--n-pretrain", "n_pretrain", int, "pre-training points (method 3)"),
    ("--replicas", "replicas", int, "independent replicas"),
    ("--seed", "seed", int, "master seed"),
    ("--out-dir", "out_dir", str, "output directory for results"),
    ("--met-iterations", "met_iterations", int, "chain iterations per layer"),
    ("--met-step", "met_step", float, "chain proposal step"),
    ("--met-exponent", "met_exponent", float, "chain acceptance exponent"),
    ("--tikhonov", "tikhonov", float, "ridge parameter of amplitude solves"),
    ("--refresh-every", "refresh_every", int, "joint re-solve period"),
    ("--epochs", "epochs", int, "gradient-phase epochs"),
    ("--batch-size", "batch_size", int, "minibatch size"),
    ("--base-rate", "base_rate", float, "epoch-1 learning rate"),
    ("--penalty", "penalty", float, "state-increment penalty weight"),
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file", default=None)
    for flag, dest, typ, desc in _CONFIG_FLAGS:
        parser.add_argument(flag, dest=dest, type=typ, default=None, help=desc)


def _resolve_config(args) -> tuple:
    """Merge defaults < file < flags; returns (config, extras from the file)."""
    doc = {}
    extras = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        for key in ("kl_values", "methods"):
            if key in doc:
                extras[key] = doc.pop(key)
    if "DEEPRFF_SEED" in os.environ and getattr(args, "seed", None) is None:
        doc["seed"] = int(os.environ["DEEPRFF_SEED"])
    for _, dest, _, _ in _CONFIG_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            doc[dest] = value
    return ExperimentConfig.from_dict(doc), extras


def _cmd_data_gen(args) -> int:
    train, test = gen_dataset(
        args.n, args.d, target=args.target, a=args.a, seed=args.seed,
        n_test=args.n_test, normalize_targets=not args.raw_targets,
        noise_std=args.noise_std,
    )
    os.makedirs(args.out, exist_ok=True)
    train_path = os.path.join(args.out, "train.csv")
    test_path = os.path.join(args.out, "test.csv")
    save_dataset(train, train_path)
    save_dataset(test, test_path)
    print(f"wrote {train_path} ({train.n} points) and {test_path} ({test.n} points)")
    return 0


def _train_single(cfg: ExperimentConfig, log_path=None):
    """Train one model with replica-0 streams; returns (net, train, test)."""
    train, test = gen_dataset(
        cfg.n_train, cfg.input_dim, target=cfg.target,
        seed=derive_seed(cfg.seed, 0, 0), n_test=cfg.n_test,
    )
    step = cfg.met_step if cfg.met_step is not None else default_step(cfg.input_dim)
    exponent = (cfg.met_exponent if cfg.met_exponent is not None
                else default_exponent(cfg.input_dim))
    met = MetropolisConfig(
        n_features=cfg.n_features, step=step, exponent=exponent,
        tikhonov=cfg.tikhonov, refresh_every=cfg.refresh_every,
        n_iterations=cfg.met_iterations, seed=derive_seed(cfg.seed, 0, 1),
    )
    adam = AdamConfig(
        epochs=cfg.epochs, batch_size=cfg.batch_size, base_rate=cfg.base_rate,
        penalty=cfg.penalty, seed=derive_seed(cfg.seed, 0, 3),
    )
    if cfg.method == 1:
        net = train_layerwise(train, cfg.n_layers, met)
    elif cfg.method == 2:
        net = xavier_init(cfg.n_layers, cfg.n_features, cfg.input_dim,
                          seed=derive_seed(cfg.seed, 0, 2))
        net = train_global(net, train, adam, val_data=test, log_path=log_path)
    else:
        n1 = cfg.n_pretrain if cfg.n_pretrain is not None else cfg.n_train
        net = train_pretrained(train, n1, cfg.n_layers, met, adam,
                               val_data=test, log_path=log_path)
    return net, train, test


def _cmd_train(args) -> int:
    cfg, _ = _resolve_config(args)
    net, train, test = _train_single(cfg, log_path=args.log)
    save_model(net, args.out)
    train_mse = float(np.mean((predict(net, train.x) - train.y) ** 2))
    test_mse = float(np.mean((predict(net, test.x) - test.y) ** 2))
    print(f"method {cfg.method}  K={cfg.n_features} L={cfg.n_layers} "
          f"d={cfg.input_dim} target={cfg.target}")
    print(f"train mse {train_mse!r}")
    print(f"test mse  {test_mse!r}")
    print(f"model saved to {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg, _ = _resolve_config(args)
    result = run_experiment(cfg)
    lo, hi = result.bar
    print(f"method {cfg.method}  KL={cfg.kl}  replicas={cfg.replicas}")
    print(f"e_mean {result.e_mean!r}  e_std {result.e_std!r}")
    print(f"bar [{lo!r}, {hi!r}]")
    if cfg.out_dir:
        print(f"results in {cfg.out_dir}")
    return 0


def _cmd_sweep(args) -> int:
    cfg, extras = _resolve_config(args)
    if args.kl:
        kl_values = [int(v) for v in args.kl.split(",")]
    elif "kl_values" in extras:
        kl_values = [int(v) for v in extras["kl_values"]]
    else:
        print("sweep needs --kl or a kl_values list in the config file",
              file=sys.stderr)
        return 2
    result = sweep_kl(cfg, kl_values)
    print(f"method {cfg.method}  L={cfg.n_layers}  replicas={cfg.replicas}")
    for kl, res in zip(result.kl_values, result.results):
        print(f"KL={kl:6d}  e_mean {res.e_mean!r}  e_std {res.e_std!r}")
    print(f"log-log slope {result.slope!r}")
    if cfg.out_dir:
        print(f"results in {cfg.out_dir}")
    return 0


def _cmd_compare(args) -> int:
    cfg, extras = _resolve_config(args)
    raw = args.methods if args.methods else ",".join(
        str(m) for m in extras.get("methods", (2, 3))
    )
    parts = [int(v) for v in raw.split(",")]
    if len(parts) != 2:
        print("--methods wants exactly two comma-separated methods",
              file=sys.stderr)
        return 2
    cfg_a = replace(cfg, method=parts[0])
    cfg_b = replace(cfg, method=parts[1])
    report = compare_methods(cfg_a, cfg_b)
    print(f"method {report['method_a']} vs method {report['method_b']} "
          f"on {cfg.replicas} matched replicas")
    for r, (ea, eb) in enumerate(zip(report["errors_a"], report["errors_b"])):
        print(f"replica {r}:  {ea!r}  vs  {eb!r}")
    print(f"means: {report['mean_a']!r} vs {report['mean_b']!r}")
    winner = report["method_a"] if report["better"] == "a" else report["method_b"]
    print(f"lower mean: method {winner} "
          f"(wins {report['win_rate'] * cfg.replicas:.0f}/{cfg.replicas})")
    if cfg.out_dir:
        print(f"results in {cfg.out_dir}")
    return 0


def _theory_suite() -> dict:
    """The fixed battery behind `verify-theory`."""
    checks = {}

    grid = np.linspace(0.0, 1.0, 1001)
    p_uniform = theory.DensitySpec.from_values(grid, np.ones_like(grid))
    checks["mc-moments"] = theory.mc_moments_check(
        lambda w: w, p_uniform, n_samples=100, replications=10_000, seed=101
    )

    g = np.exp(-8.0 * (grid - 0.35) ** 2) + 0.2
    checks["density-optimality"] = theory.check_density_optimality(g, grid, seed=7)

    rng = np.random.default_rng(np.random.SeedSequence(23))
    residuals = rng.standard_normal(100)
    for delta in (0.01, 0.3, 1.0):
        checks[f"control-delta-{delta}"] = theory.optimal_control_check(delta, residuals)

    nu = np.linspace(-30.0, 30.0, 1201)
    z_step = 0.005
    dh = theory.hhat_deriv(nu, z_step=z_step)
    l1 = float(np.trapezoid(np.abs(dh), nu))
    s = theory.zh_prime_sup()
    f_small = 1e-3 / (l1 * np.exp(s))
    fgrid = np.linspace(-5.0, 5.0, 1001)
    fhat = theory.DensitySpec.from_values(fgrid, np.exp(-(fgrid**2) / 2))
    pbar_prime = theory.DensitySpec.from_values(fgrid, np.ones_like(fgrid))
    omega = nu / f_small
    pbar = theory.DensitySpec.from_values(omega, np.ones_like(omega))
    bc = theory.bound_constants(fhat, f_small, pbar, pbar_prime, z_step=z_step)
    rel = abs(bc.B_prime - bc.b_prime_fd) / bc.B_prime
    checks["bound-constants"] = {
        "B_prime": bc.B_prime,
        "B_prime_fd": bc.b_prime_fd,
        "fd_relative_gap": rel,
        "B_star_over_A_star": bc.B_star / bc.A_star,
        "C_timedep_over_A_star_sq": bc.C_timedep / bc.A_star**2,
        "ok": bool(rel < 1e-4 and bc.C_timedep / bc.A_star**2 < 0.1),
    }

    rng = np.random.default_rng(np.random.SeedSequence(31))
    tau = np.linspace(0.01, 1.0, 100_001)
    worst = 0.0
    bang_ok = True
    for _ in range(50):
        a, b = rng.uniform(0.5, 20.0, size=2)
        rep = theory.bang_bang_check(a, b, tau)
        bang_ok = bang_ok and rep["tau_ok"] and rep["value_ok"]
        worst = max(worst, abs(rep["value_grid_min"] - rep["value_star"]))
    checks["bang-bang"] = {"worst_value_gap": worst, "ok": bang_ok}

    tgrid = np.linspace(0.0, 1.0, 2001)
    for name, vals in (("uniform", np.ones_like(tgrid)), ("linear", tgrid)):
        q = theory.DensitySpec.from_values(tgrid, vals)
        rep = theory.stratified_chi2(q, n_layers=4, n_per_stratum=25_000,
                                     bins=10, seed=77)
        rep["ok"] = rep.pop("passed")
        checks[f"stratified-{name}"] = rep
    return checks


def _cmd_verify_theory(args) -> int:
    checks = _theory_suite()
    failed = 0
    for name, report in checks.items():
        ok = bool(report.get("ok", False))
        failed += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(checks, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
        print(f"report written to {args.out}")
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def _cmd_eval(args) -> int:
    net = load_model(args.model)
    if args.data:
        ds = load_dataset(args.data)
    else:
        cfg, _ = _resolve_config(args)
        _, ds = gen_dataset(cfg.n_train, cfg.input_dim, target=cfg.target,
                            seed=derive_seed(cfg.seed, 0, 0), n_test=cfg.n_test)
    mse = float(np.mean((predict(net, ds.x) - ds.y) ** 2))
    print(f"mse {mse!r} on {ds.n} points")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deeprff",
        description="Deep residual Fourier-feature networks: training, "
                    "benchmarks, and analysis checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    data = sub.add_parser("data", help="dataset utilities")
    data_sub = data.add_subparsers(dest="data_command", required=True)
    gen = data_sub.add_parser("gen", help="generate and export train/test CSVs")
    gen.add_argument("--n", type=int, default=1000, help="training points")
    gen.add_argument("--d", type=int, default=3, help="input dimension")
    gen.add_argument("--target", default="f1", help="target function")
    gen.add_argument("--a", type=float, default=1e-2, help="target sharpness")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--n-test", type=int, default=None)
    gen.add_argument("--noise-std", type=float, default=0.0)
    gen.add_argument("--raw-targets", action="store_true",
                     help="skip target normalization")
    gen.add_argument("--out", default=".", help="output directory")
    gen.set_defaults(func=_cmd_data_gen)

    train = sub.add_parser("train", help="train one model and save it")
    _add_config_flags(train)
    train.add_argument("--out", default="model.json", help="model output path")
    train.add_argument("--log", default=None, help="per-epoch CSV log path")
    train.set_defaults(func=_cmd_train)

    run = sub.add_parser("run", help="run one replicated experiment cell")
    _add_config_flags(run)
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="error vs total node count")
    _add_config_flags(sweep)
    sweep.add_argument("--kl", default=None,
                       help="comma-separated total node counts")
    sweep.set_defaults(func=_cmd_sweep)

    compare = sub.add_parser("compare", help="paired comparison of two methods")
    _add_config_flags(compare)
    compare.add_argument("--methods", default=None,
                         help="two methods, e.g. 2,3 (default)")
    compare.set_defaults(func=_cmd_compare)

    verify = sub.add_parser("verify-theory", help="numerical analysis checks")
    verify.add_argument("--out", default=None, help="JSON report path")
    verify.set_defaults(func=_cmd_verify_theory)

    evaluate = sub.add_parser("eval", help="score a saved model")
    evaluate.add_argument("--model", required=True, help="model JSON path")
    evaluate.add_argument("--data", default=None,
                          help="dataset CSV (default: generate from config)")
    _add_config_flags(evaluate)
    evaluate.set_defaults(func=_cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
