"""Layer-wise training: each layer is tuned, then everything is refined.

Layer k trains in three stages: "main" moves only the step sizes a new
layer touches, then "refine1" and "refine2" fine-tune all unlocked ones at
10x and 100x smaller rates. Validation wsr is measured with the first k
layers, so the history climbs a staircase as layers unlock.

Run: python3 demos/04_training_staircase.py
"""

import numpy as np

from d2dpower.benchmark import (evaluate, fplinq_point_solver, make_test_set,
                                schedule_point_solver)
from d2dpower.netgen import SystemParams
from d2dpower.solver import viva_defaults
from d2dpower.training import TrainConfig, train_layerwise

params = SystemParams()

# --- a small but real run: 4 layers, 4 links, ~1 s
cfg = TrainConfig(n_layers=4, n_train=20, max_iter=300, validation_size=60,
                  val_every=25, stop_window=125, seed=8)
sched, hist = train_layerwise(cfg, params, k_links=4)

last = {}
for rec in hist:
    last[rec.stage] = (rec.iteration, rec.val_mean_wsr)
print("stage        stopped at   val wsr [nats]")
for stage, (it, v) in last.items():
    print(f"{stage:12s} {it:8d}     {v:.4f}")

# --- what training did to the step sizes
base = viva_defaults(4).alpha2
print("\nlayer  alpha2 untrained  alpha2 trained")
for k in range(4):
    print(f"{k + 1:5d}  {base[k]:16.5f}  {sched.alpha2[k]:14.5f}")
# The first layer takes a big normalized step out of the cold start, the
# later layers settle near the constant default.

# --- does it transfer to unseen layouts?
test = make_test_set(params, 4, count=40, seed=321)
trained = evaluate(test, schedule_point_solver(sched),
                   fplinq_point_solver(100))
untrained = evaluate(test, schedule_point_solver(viva_defaults(4)),
                     fplinq_point_solver(100))
print("\nmean wsr ratio vs baseline on 40 unseen layouts:")
print(f"  untrained 4-layer schedule  {untrained.mean:.4f}")
print(f"  trained   4-layer schedule  {trained.mean:.4f}")
