"""Random Fourier features with a ridge-regularized amplitude solve.

The most basic building block: pick K frequencies, build the cosine/sine
design matrix, solve for amplitudes with a least-squares solve, and watch the
test error fall as K grows.
"""

import numpy as np

from deeprff.linalg import RidgeProblem, assemble_design_x, pairs_to_complex, solve_ridge
from deeprff.model import FourierLayer, ResidualNet, predict
from deeprff.targets import gen_dataset

# A 1-d regression problem: smoothed step target, normal inputs.
train, test = gen_dataset(n=2000, d=1, target="f1", seed=7, n_test=2000)
print(f"train: {train.n} points in d={train.dim}, test: {test.n} points")
print(f"target range on train: [{train.y.min():.3f}, {train.y.max():.3f}]")
print()

# Frequencies stay fixed here (drawn once from a normal law); only the
# amplitudes are fit. The adaptive chain demos move the frequencies too.
rng = np.random.default_rng(42)
tikhonov = 1.1

print(f"{'K':>5} {'train mse':>12} {'test mse':>12}")
for k in (4, 8, 16, 32, 64, 128):
    freq = 3.0 * rng.standard_normal((k, 1))
    design = assemble_design_x(train.x, freq)
    coeffs = solve_ridge(RidgeProblem(design, train.y, tikhonov))
    amps = pairs_to_complex(coeffs)

    net = ResidualNet(1, [FourierLayer(freq_x=freq, amp_x=amps)])
    mse_train = np.mean((predict(net, train.x) - train.y) ** 2)
    mse_test = np.mean((predict(net, test.x) - test.y) ** 2)
    print(f"{k:>5} {mse_train:>12.5f} {mse_test:>12.5f}")

print()
print("With the frequencies fixed, the only way down is more nodes. The")
print("adaptive chain in adaptive_chain_shallow.py improves a fixed K")
print("instead, by moving the frequencies toward large-amplitude nodes.")
