"""Deep residual networks built from random Fourier features.

Library layout:

- linalg: design matrices and ridge least squares
- model: the residual network, evaluation and serialization
- targets: benchmark target functions and dataset generation
- metropolis: adaptive Metropolis training of feature frequencies
- layerwise: layer-by-layer network construction on residuals
- gradopt: manual backpropagation and Adam training
- theory: numerical checks of the error-bound constants and densities
- experiments: seeded experiment runner, sweeps and method comparisons
- cli: command-line entry points on top of experiments
"""

from .linalg import (
    RidgeProblem,
    assemble_design_resid,
    assemble_design_x,
    solve_ridge,
    solve_ridge_gram,
)
from .model import (
    ForwardTrace,
    FourierLayer,
    ModelFormatError,
    ResidualNet,
    as_shallow,
    eval_beta,
    forward,
    load_model,
    predict,
    save_model,
)
from .targets import Dataset, NormStats, f1, f2, gen_dataset, load_dataset, save_dataset, si
from .metropolis import (
    MetropolisConfig,
    arfm_residual_train,
    arfm_train,
    fit_fourier_features,
)
from .layerwise import train_layerwise
from .gradopt import (
    AdamConfig,
    AdamState,
    GradStore,
    adam_step,
    loss_and_grad,
    train_global,
    train_pretrained,
    xavier_init,
)

__version__ = "0.1.0"
