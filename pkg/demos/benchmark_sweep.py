"""The benchmark harness at toy scale: KL sweep, slope fit, method compare.

run_experiment trains `replicas` independent replicas of one configuration
(fresh data, fresh chain seeds per replica, all derived from one master
seed) and reports the per-replica test MSEs. sweep_kl repeats that along a
grid of total node counts KL and fits the log-log error decay; the
deep-vs-shallow question is then one sweep per depth. compare_methods pairs
two training methods on identical replica datasets.

Everything here is sized to finish in well under a minute; the acceptance
tests run the same harness at benchmark scale.
"""

import json
import os
import tempfile

from deeprff.experiments import ExperimentConfig, compare_methods, sweep_kl

out_root = tempfile.mkdtemp()
kl_values = (8, 16, 32, 64)

# ---- error decay, shallow vs two-block, frequency-chain training ----
for n_layers in (1, 2):
    cfg = ExperimentConfig(
        method=1, target="f1", input_dim=2, n_layers=n_layers,
        n_train=800, n_test=800, replicas=3, seed=17,
        met_iterations=100, out_dir=os.path.join(out_root, f"L{n_layers}"),
    )
    sweep = sweep_kl(cfg, kl_values)
    print(f"L={n_layers}: fitted log-log slope {sweep.slope:.3f}")
    print(f"{'KL':>5} {'mean mse':>10} {'+-2sd':>9}")
    for kl, res in zip(sweep.kl_values, sweep.results):
        lo, hi = res.bar
        print(f"{kl:>5} {res.e_mean:>10.5f} {(hi - lo) / 2:>9.5f}")
    print()

# ---- matched-replica comparison of the two gradient-trained methods ----
shared = dict(target="f1", input_dim=2, n_features=8, n_layers=2,
              n_train=1000, n_test=1000, replicas=3, seed=23,
              epochs=10, batch_size=100, base_rate=1e-3)
report = compare_methods(
    ExperimentConfig(method=2, **shared),
    ExperimentConfig(method=3, n_pretrain=500, met_iterations=100, **shared),
)
print(f"method {report['method_a']} mean mse {report['mean_a']:.5f} vs "
      f"method {report['method_b']} mean mse {report['mean_b']:.5f}")
print(f"lower-mean method is '{report['better']}' and wins "
      f"{report['win_rate']:.0%} of paired replicas")
print()

# ---- the files a sweep leaves behind ----
l1_dir = os.path.join(out_root, "L1")
print(f"sweep output in {l1_dir}: {sorted(os.listdir(l1_dir))}")
with open(os.path.join(l1_dir, "manifest.json")) as fh:
    manifest = json.load(fh)
print(f"manifest keys: {sorted(manifest)}; "
      f"slope recorded as {manifest['slope']:.3f}")
with open(os.path.join(l1_dir, "results.csv")) as fh:
    for line in list(fh)[:4]:
        print(f"  {line.rstrip()}")
