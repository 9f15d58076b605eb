"""Layer-by-layer residual training.

Builds the network greedily: fit the target with one adaptive Fourier
features chain, then repeatedly fit the remaining residual with a block that
reads both the input x and the running prediction, adding each fitted block
to the network. Every block's amplitudes come from a ridge solve, so with a
zero ridge parameter the training residual norm cannot increase across
layers (the zero update is always feasible).

The running prediction is threaded through the scalar-state recursion: the
returned network has an empty head layer (so the closed-form head term is
zero) and carries the first fit as the opening residual block, which makes
the stored state after block ell equal the prediction that block ell + 1 was
trained against.

Each block's chain draws from an independent sub-seed derived from the
master seed and the block index, so a deeper run agrees with a shallower one
on their common blocks (prefix property).
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .metropolis import MetropolisConfig, arfm_residual_train, fit_fourier_features
from .model import FourierLayer, ResidualNet, layer_update
from .targets import Dataset


def _sub_seed(master: int, block: int, tag: int) -> int:
    return int(np.random.SeedSequence((master, block, tag)).generate_state(1)[0])


def train_layerwise(
    data: Dataset,
    n_layers: int,
    cfg: MetropolisConfig,
    n_features: int | None = None,
    augmented: bool = False,
) -> ResidualNet:
    """Greedy residual build with n_layers blocks of n_features nodes each.

    n_features defaults to cfg.n_features. With augmented=True the blocks
    after the first use frequencies in dimension d + 1 acting on the stacked
    point (x, z) instead of separate x- and z-branches, and the chain updates
    all of them.
    """
    if n_layers < 1:
        raise ValueError(f"n_layers must be >= 1, got {n_layers}")
    k = cfg.n_features if n_features is None else n_features
    d = data.dim

    def block_cfg(block: int) -> MetropolisConfig:
        return replace(cfg, n_features=k, seed=_sub_seed(cfg.seed, block, 0))

    layers = [FourierLayer(freq_x=np.zeros((0, d)), amp_x=np.zeros(0, dtype=complex))]

    freq, amps, _ = fit_fourier_features(data.x, data.y, block_cfg(1))
    layers.append(FourierLayer(freq_x=freq, amp_x=amps))
    state = layer_update(layers[1], data.x, np.zeros(data.n), d)

    for block in range(2, n_layers + 1):
        residual = data.y - state
        if augmented:
            stacked = np.column_stack([data.x, state])
            freq, amps, _ = fit_fourier_features(stacked, residual, block_cfg(block))
            layer = FourierLayer(freq_x=freq, amp_x=amps)
        else:
            layer = arfm_residual_train(
                data,
                residual,
                state,
                block_cfg(block),
                freq_z_seed=_sub_seed(cfg.seed, block, 1),
            )
        layers.append(layer)
        state = state + layer_update(layer, data.x, state, d)

    return ResidualNet(input_dim=d, layers=layers)
