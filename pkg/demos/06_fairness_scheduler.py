"""Drift-plus-penalty scheduling: fairness on top of one-shot allocation.

A one-shot max-wsr allocation starves weak links. The scheduler wraps any
per-slot solver: virtual queues accumulate each link's deficit, auxiliary
arrivals encode the utility, and the solver runs with the queues as
weights. Over time the throughput vector drifts toward the fair point.

Run: python3 demos/06_fairness_scheduler.py
"""

import numpy as np

from d2dpower import netgen
from d2dpower.fplinq import fplinq
from d2dpower.rates import rate_vector, utopian_point
from d2dpower.scheduling import (UtilitySpec, dpp_run, fplinq_solver,
                                 geometric_mean, luva_solver)
from d2dpower.training import TrainConfig, train_layerwise

params = netgen.SystemParams()
net = netgen.sample_layout(params, k=5, seed=21)

# --- one-shot allocation: the wsr winner can shut links off entirely
x_once = fplinq(net, np.ones(5), iters=100)
r_once = rate_vector(x_once, net)
print("one-shot rates      :", np.round(r_once, 3))
print("one-shot geo mean   :", round(geometric_mean(r_once), 3))

# --- proportional fairness via the scheduler
pf = UtilitySpec("proportional", 10.0)
res = dpp_run(net, fplinq_solver(100), pf, t_total=600, t_avg=300)
print("\nscheduled throughput:", np.round(res.throughput, 3))
print("scheduled geo mean  :", round(geometric_mean(res.throughput), 3))
print("max queue over run  :", round(res.q_trace.max(), 2),
      " (bounded, so the drift term is doing its job)")

# --- max-min fairness equalizes normalized throughput instead
# The bang-bang auxiliary needs a larger V and a longer run to settle;
# a different draw keeps the contrast sharp.
net2 = netgen.sample_layout(params, k=5, seed=48)
u2 = utopian_point(net2)
pf2 = dpp_run(net2, fplinq_solver(100), pf, t_total=1500, t_avg=750)
mm2 = dpp_run(net2, fplinq_solver(100), UtilitySpec("maxmin", 80.0),
              t_total=1500, t_avg=750)
print("\nnormalized throughput r_i / u_i on a second draw:")
for name, r in (("proportional", pf2.throughput), ("max-min", mm2.throughput)):
    norm = r / u2
    print(f"  {name:12s} {np.round(norm, 3)}  spread "
          f"{norm.max() - norm.min():.3f}")

# --- V trades queue backlog for utility
print("\n     V   geo mean   mean queue")
for v in (1.0, 10.0, 160.0):
    r_v = dpp_run(net, fplinq_solver(100), UtilitySpec("proportional", v),
                  t_total=600, t_avg=300)
    print(f"{v:6.0f}   {geometric_mean(r_v.throughput):8.3f}   "
          f"{r_v.q_trace.mean():10.2f}")

# --- the trained solver drops into the same loop
cfg = TrainConfig(n_layers=6, n_train=20, max_iter=400, validation_size=100,
                  val_every=50, stop_window=250, seed=17)
sched, _ = train_layerwise(cfg, params, k_links=5)
res_l = dpp_run(net, luva_solver(sched), pf, t_total=600, t_avg=300)
print("\ngeo mean, baseline in the loop:", round(geometric_mean(res.throughput), 3))
print("geo mean, trained  in the loop:", round(geometric_mean(res_l.throughput), 3))
