"""Adaptive Metropolis frequency sampling for a shallow Fourier model.

Each chain iteration proposes a random-walk move of every frequency, solves
for the amplitudes at the proposed frequencies, and accepts node k with
probability min(1, (|a_prop_k| / |a_cur_k|)^gamma): nodes migrate toward
frequencies that carry large amplitudes. A joint re-solve keeps the
amplitudes consistent.
"""

import numpy as np

from deeprff.metropolis import (
    MetropolisConfig,
    arfm_train,
    default_exponent,
    default_step,
)
from deeprff.model import ResidualNet, predict
from deeprff.targets import gen_dataset

d = 2
k = 24
train, test = gen_dataset(n=3000, d=d, target="f1", seed=11, n_test=3000)


def test_mse(layer):
    net = ResidualNet(d, [layer])
    return float(np.mean((predict(net, test.x) - test.y) ** 2))


# Dimension-scaled chain parameters.
step = default_step(d)        # 0.5 * 2.4^2 / d
gamma = default_exponent(d)   # 3d - 2
print(f"d={d}, K={k}, proposal step {step:.3f}, acceptance exponent {gamma}")
print()

# Errors averaged over three independent chains; the 1-iteration row is
# nearly the fixed-frequency baseline (one random-walk step from zero).
print(f"{'iterations':>11} {'test mse (3-seed mean)':>23}")
for m in (1, 10, 50, 200, 500):
    errs = []
    for seed in (3, 4, 5):
        cfg = MetropolisConfig(
            n_features=k, step=step, exponent=gamma, tikhonov=1.1,
            n_iterations=m, seed=seed,
        )
        errs.append(test_mse(arfm_train(train, cfg)))
    print(f"{m:>11} {np.mean(errs):>23.5f}")

print()
print("The chain adapts within the first few tens of iterations and then")
print("fluctuates around the adapted frequency law; it is a sampler, not a")
print("descent method, so the tail of the table is a plateau, not a slide.")
print("The win over the near-fixed draw in the first row comes at fixed K.")
