"""Global Adam training, from scratch and from a layerwise warm start.

Two ways to train the same residual architecture end to end:

  plain      Xavier-style random init, then minibatch Adam on all parameters
             (amplitudes and frequencies) with learning rate base_rate/epoch
  pretrained greedy chain build on a subset of the data first, then the same
             Adam loop starting from the built network

The decaying learning rate means Adam cannot travel far from wherever it
starts, so the quality of the starting point dominates.
"""

import csv
import os
import tempfile

import numpy as np

from deeprff.gradopt import AdamConfig, train_global, train_pretrained, xavier_init
from deeprff.metropolis import MetropolisConfig, default_exponent, default_step
from deeprff.model import predict
from deeprff.targets import gen_dataset

d = 2
k = 12
n_layers = 3
train, test = gen_dataset(n=4000, d=d, target="f1", seed=29, n_test=4000)

adam = AdamConfig(epochs=15, batch_size=100, base_rate=1e-3, seed=101)
met = MetropolisConfig(
    n_features=k, step=default_step(d), exponent=default_exponent(d),
    tikhonov=1.1, n_iterations=300, seed=7,
)


def report(name, net):
    mse_train = np.mean((predict(net, train.x) - train.y) ** 2)
    mse_test = np.mean((predict(net, test.x) - test.y) ** 2)
    print(f"{name:>11}: train mse {mse_train:.5f}   test mse {mse_test:.5f}")
    return mse_test


log_path = os.path.join(tempfile.mkdtemp(), "epochs.csv")

net2 = xavier_init(n_layers, k, d, seed=13)
report("init", net2)
net2 = train_global(net2, train, adam, val_data=test, log_path=log_path)
e2 = report("plain", net2)

net3 = train_pretrained(train, 1500, n_layers, met, adam, val_data=test)
e3 = report("pretrained", net3)

print()

# The per-epoch log of the plain run, written as csv by train_global.
with open(log_path) as fh:
    rows = list(csv.reader(fh))
print("plain run, every third epoch (epoch, train mse, val mse, lr):")
for row in rows[1::3]:
    print(f"  {row[0]:>3}  {float(row[1]):.5f}  {float(row[2]):.5f}  "
          f"{float(row[3]):.2e}")

print()
winner = "pretrained" if e3 < e2 else "plain"
print(f"{winner} start wins at matched epoch budget "
      f"({min(e2, e3):.5f} vs {max(e2, e3):.5f} test mse)")
