"""Gradient training of the residual network.

The batch objective is

    mean_n [ (out(x_n) - y_n)^2 + penalty * L * sum_i u_i(x_n)^2 ]

where u_i are the per-block state increments, L = len(net.layers) (the index
of the final state in the recursion), and out = final state + head term.

Gradients are accumulated in reverse through the scalar-state recursion
z_{i+1} = z_i + u_i(z_i, x). With lam_i = d loss / d z_i and
mu_i = lam_{i+1} + 2 penalty L u_i / B (the multiplier of block i's direct
parameters), the adjoint satisfies lam_i = lam_{i+1} + mu_i * du_i/dz_i.
The head layer never touches the state, so its multiplier is the output
residual term alone.

Adam follows the standard first/second-moment scheme with bias correction;
the bias-correction counter advances every step while the learning rate
base_rate / epoch is held constant within an epoch.

Augmented layers (frequencies acting on the stacked point (x, z)) are not
supported here; the two-branch form is the one the optimizer differentiates.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .layerwise import train_layerwise
from .metropolis import MetropolisConfig
from .model import FourierLayer, ResidualNet, _is_augmented, predict
from .targets import Dataset, subset

_FIELDS = ("amp_x_re", "amp_x_im", "freq_x", "amp_z_re", "amp_z_im", "freq_z")


def _layer_params(layer: FourierLayer) -> dict:
    return {
        "amp_x_re": layer.amp_x.real,
        "amp_x_im": layer.amp_x.imag,
        "freq_x": layer.freq_x,
        "amp_z_re": layer.amp_z.real,
        "amp_z_im": layer.amp_z.imag,
        "freq_z": layer.freq_z,
    }


def _layer_from_params(p: dict) -> FourierLayer:
    return FourierLayer(
        freq_x=p["freq_x"],
        amp_x=p["amp_x_re"] + 1j * p["amp_x_im"],
        freq_z=p["freq_z"],
        amp_z=p["amp_z_re"] + 1j * p["amp_z_im"],
    )


@dataclass
class LayerGrads:
    """Partials of the batch loss for one layer; shapes mirror the layer."""

    amp_x_re: np.ndarray
    amp_x_im: np.ndarray
    freq_x: np.ndarray
    amp_z_re: np.ndarray
    amp_z_im: np.ndarray
    freq_z: np.ndarray


@dataclass
class GradStore:
    """Per-layer gradient arrays for a whole network."""

    layers: list

    @classmethod
    def zeros_like(cls, net: ResidualNet) -> "GradStore":
        return cls(
            [
                LayerGrads(**{k: np.zeros_like(v) for k, v in _layer_params(l).items()})
                for l in net.layers
            ]
        )


def _reject_augmented(net: ResidualNet) -> None:
    for i, layer in enumerate(net.layers):
        if _is_augmented(layer, net.input_dim):
            raise ValueError(
                f"layer {i} uses stacked (x, z) frequencies; gradient training "
                "supports the two-branch form only"
            )


def loss_and_grad(net: ResidualNet, x, y, penalty: float = 0.0):
    """Batch loss and its exact gradient.

    x: (B, d) inputs, y: (B,) targets. Returns (loss, GradStore).
    """
    _reject_augmented(net)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[1] != net.input_dim or y.shape != (x.shape[0],):
        raise ValueError("batch must be (B, d) inputs with (B,) targets")
    b = x.shape[0]
    if b == 0:
        raise ValueError("batch is empty")
    n_layers = len(net.layers)

    # forward pass, caching the trig tables each block needs again in reverse
    cache = []
    z = np.zeros(b)
    penalty_sum = 0.0
    for layer in net.layers[1:]:
        px = x @ layer.freq_x.T
        pz = z[:, None] * layer.freq_z[None, :]
        cx, sx = np.cos(px), np.sin(px)
        cz, sz = np.cos(pz), np.sin(pz)
        u = (cx @ layer.amp_x.real - sx @ layer.amp_x.imag) + (
            cz @ layer.amp_z.real - sz @ layer.amp_z.imag
        )
        cache.append((z, cx, sx, cz, sz, u))
        z = z + u
        penalty_sum += np.mean(u**2)

    head = net.layers[0]
    pb = x @ head.freq_x.T
    cb, sb = np.cos(pb), np.sin(pb)
    out = z + (cb @ head.amp_x.real - sb @ head.amp_x.imag)
    err = out - y
    loss = float(np.mean(err**2) + penalty * n_layers * penalty_sum)

    grads = [None] * n_layers
    lam = 2.0 * err / b  # d loss / d final state, also d loss / d out

    # head layer: multiplier is lam itself (no state dependence)
    wb = -(sb * head.amp_x.real[None, :] + cb * head.amp_x.imag[None, :])
    grads[0] = LayerGrads(
        amp_x_re=cb.T @ lam,
        amp_x_im=-(sb.T @ lam),
        freq_x=(wb * lam[:, None]).T @ x,
        amp_z_re=np.zeros(0),
        amp_z_im=np.zeros(0),
        freq_z=np.zeros(0),
    )

    for i in range(len(cache) - 1, -1, -1):
        layer = net.layers[i + 1]
        z_in, cx, sx, cz, sz, u = cache[i]
        mu = lam + (2.0 * penalty * n_layers / b) * u
        wx = -(sx * layer.amp_x.real[None, :] + cx * layer.amp_x.imag[None, :])
        wz = -(sz * layer.amp_z.real[None, :] + cz * layer.amp_z.imag[None, :])
        grads[i + 1] = LayerGrads(
            amp_x_re=cx.T @ mu,
            amp_x_im=-(sx.T @ mu),
            freq_x=(wx * mu[:, None]).T @ x,
            amp_z_re=cz.T @ mu,
            amp_z_im=-(sz.T @ mu),
            freq_z=wz.T @ (mu * z_in),
        )
        lam = lam + mu * (wz @ layer.freq_z)

    return loss, GradStore(grads)


@dataclass(frozen=True)
class AdamConfig:
    """Minibatch training parameters.

    base_rate is the epoch-1 learning rate; epoch e runs at base_rate / e.
    penalty weights the state-increment term of the loss.
    train_frequencies=False freezes all frequencies (amplitude-only training,
    which makes the objective quadratic when the z-branches are silent).
    """

    epochs: int
    batch_size: int
    base_rate: float = 1e-3
    penalty: float = 0.0
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    train_frequencies: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.base_rate < 0:
            raise ValueError(f"base_rate must be >= 0, got {self.base_rate}")
        if self.penalty < 0:
            raise ValueError(f"penalty must be >= 0, got {self.penalty}")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ValueError("beta1 and beta2 must lie in [0, 1)")


@dataclass
class AdamState:
    """Moment accumulators plus the step and epoch counters."""

    m: GradStore
    v: GradStore
    step: int = 0
    epoch: int = 1
    base_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_net(cls, net: ResidualNet, base_rate: float = 1e-3, beta1: float = 0.9,
                beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            m=GradStore.zeros_like(net),
            v=GradStore.zeros_like(net),
            base_rate=base_rate,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )

    @property
    def rate(self) -> float:
        return self.base_rate / self.epoch


def adam_step(state: AdamState, net: ResidualNet, grads: GradStore):
    """One optimizer step; returns (updated net, state).

    Moments are updated in place; the returned network is a fresh object.
    """
    state.step += 1
    bc1 = 1.0 - state.beta1**state.step
    bc2 = 1.0 - state.beta2**state.step
    lr = state.rate
    new_layers = []
    for layer, g, m, v in zip(net.layers, grads.layers, state.m.layers, state.v.layers):
        params = _layer_params(layer)
        updated = {}
        for name in _FIELDS:
            garr = getattr(g, name)
            marr = getattr(m, name)
            varr = getattr(v, name)
            marr *= state.beta1
            marr += (1.0 - state.beta1) * garr
            varr *= state.beta2
            varr += (1.0 - state.beta2) * garr**2
            step_dir = (marr / bc1) / (np.sqrt(varr / bc2) + state.eps)
            updated[name] = params[name] - lr * step_dir
        new_layers.append(_layer_from_params(updated))
    return ResidualNet(net.input_dim, new_layers), state


def xavier_init(n_layers: int, n_features: int, input_dim: int, seed: int = 0) -> ResidualNet:
    """Network of one head layer plus n_layers - 1 two-branch blocks.

    Every frequency and amplitude component is drawn from a centered normal
    with variance 2 / (fan_in + fan_out), fan_out = 1, fan_in = input_dim for
    the x-branches and 1 for the z-branches. Draw order per layer: freq_x,
    amp_x real, amp_x imag, then (blocks only) freq_z, amp_z real, amp_z imag.
    """
    if n_layers < 1 or n_features < 1 or input_dim < 1:
        raise ValueError("n_layers, n_features and input_dim must all be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sx = np.sqrt(2.0 / (input_dim + 1))
    sz = 1.0
    k = n_features

    def x_branch():
        freq = sx * rng.standard_normal((k, input_dim))
        amp = sx * rng.standard_normal(k) + 1j * sx * rng.standard_normal(k)
        return freq, amp

    freq, amp = x_branch()
    layers = [FourierLayer(freq_x=freq, amp_x=amp)]
    for _ in range(n_layers - 1):
        freq, amp = x_branch()
        freq_z = sz * rng.standard_normal(k)
        amp_z = sz * rng.standard_normal(k) + 1j * sz * rng.standard_normal(k)
        layers.append(FourierLayer(freq_x=freq, amp_x=amp, freq_z=freq_z, amp_z=amp_z))
    return ResidualNet(input_dim, layers)


def _zero_frequency_grads(grads: GradStore) -> None:
    for g in grads.layers:
        g.freq_x = np.zeros_like(g.freq_x)
        g.freq_z = np.zeros_like(g.freq_z)


def _mse(net: ResidualNet, data: Dataset) -> float:
    return float(np.mean((predict(net, data.x) - data.y) ** 2))


def train_global(
    net: ResidualNet,
    data: Dataset,
    cfg: AdamConfig,
    val_data: Dataset | None = None,
    log_path=None,
) -> ResidualNet:
    """Shuffled-minibatch Adam over the whole parameter set.

    Epoch e uses learning rate cfg.base_rate / e. The last batch of an epoch
    may be short. With log_path set, a row (epoch, train_mse, val_mse, lr)
    is appended per epoch; val_mse is nan without validation data.
    """
    _reject_augmented(net)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    state = AdamState.for_net(net, cfg.base_rate, cfg.beta1, cfg.beta2, cfg.eps)
    log_rows = []
    for epoch in range(1, cfg.epochs + 1):
        state.epoch = epoch
        order = rng.permutation(data.n)
        for start in range(0, data.n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            _, grads = loss_and_grad(net, data.x[idx], data.y[idx], cfg.penalty)
            if not cfg.train_frequencies:
                _zero_frequency_grads(grads)
            net, state = adam_step(state, net, grads)
        val = _mse(net, val_data) if val_data is not None else float("nan")
        log_rows.append((epoch, _mse(net, data), val, state.rate))
    if log_path is not None:
        fresh = not os.path.exists(log_path) or os.path.getsize(log_path) == 0
        with open(log_path, "a", newline="") as fh:
            writer = csv.writer(fh)
            if fresh:
                writer.writerow(["epoch", "train_mse", "val_mse", "lr"])
            for row in log_rows:
                writer.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])
    return net


def train_pretrained(
    data: Dataset,
    n_pretrain: int,
    n_layers: int,
    met_cfg: MetropolisConfig,
    adam_cfg: AdamConfig,
    n_features: int | None = None,
    val_data: Dataset | None = None,
    log_path=None,
) -> ResidualNet:
    """Layerwise pre-training on the first n_pretrain points, then global
    Adam on the full dataset starting from the pre-trained network."""
    if not 1 <= n_pretrain <= data.n:
        raise ValueError(f"n_pretrain must lie in [1, {data.n}], got {n_pretrain}")
    net = train_layerwise(subset(data, n_pretrain), n_layers, met_cfg, n_features)
    return train_global(net, data, adam_cfg, val_data, log_path)
