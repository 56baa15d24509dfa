"""Virtual-queue fairness scheduling on top of the one-shot solvers.

Each slot solves three subproblems: auxiliary arrivals that trade the chosen
utility against queue backlogs (closed forms below), a weighted sum-rate
power allocation with the queues as weights, and the queue update itself.
Time-averaged rates then converge toward the utility-optimal operating point
as the penalty weight V grows, at the price of larger queues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netgen import NetworkInstance
from .rates import rate_vector, utopian_point
from .solver import StepSchedule, run
from .fplinq import fplinq

__all__ = [
    "QueueState",
    "UtilitySpec",
    "DppResult",
    "queue_update",
    "aux_proportional",
    "aux_maxmin",
    "geometric_mean",
    "utility_value",
    "fplinq_solver",
    "luva_solver",
    "dpp_run",
]

UTILITIES = ("proportional", "maxmin")


@dataclass
class QueueState:
    """Virtual queues, one per link; nonnegative."""

    q: np.ndarray


@dataclass(frozen=True)
class UtilitySpec:
    """Utility kind and penalty weight V >= 0. Larger V favors utility over
    queue backlog; V = 10 suits proportional fairness, V = 40 max-min."""

    kind: str
    v: float

    def __post_init__(self):
        if self.kind not in UTILITIES:
            raise ValueError(f"kind must be one of {UTILITIES}")
        if not (np.isfinite(self.v) and self.v >= 0.0):
            raise ValueError("v must be finite and nonnegative")


def queue_update(q, rates, arrivals) -> np.ndarray:
    """One slot: serve at the realized rates, then add new arrivals."""
    q = np.asarray(q, dtype=float)
    rates = np.asarray(rates, dtype=float)
    arrivals = np.asarray(arrivals, dtype=float)
    if np.any(q < 0.0) or np.any(rates < 0.0) or np.any(arrivals < 0.0):
        raise ValueError("queues, rates, arrivals must be nonnegative")
    return np.maximum(0.0, q - rates) + arrivals


def aux_proportional(q, v: float, a_max: float) -> np.ndarray:
    """argmax_a in [0, a_max]^K of v sum_i ln(a_i) - q^T a, per coordinate
    a_i = min(a_max, v / q_i), with a_i = a_max where q_i = 0."""
    q = np.asarray(q, dtype=float)
    if a_max <= 0.0 or v < 0.0:
        raise ValueError("need a_max > 0 and v >= 0")
    with np.errstate(divide="ignore"):
        unclipped = np.where(q > 0.0, v / q, np.inf)
    return np.minimum(a_max, unclipped)


def aux_maxmin(q, v: float, u) -> np.ndarray:
    """argmax_a in [0, max(u)]^K of v min_i(a_i / u_i) - q^T a.

    The optimum is bang-bang along a = m u for m in {0, 1}: m = 1 when
    v >= q^T u (ties included), else 0.
    """
    q = np.asarray(q, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0):
        raise ValueError("utopian rates must be positive")
    return u.copy() if v >= float(q @ u) else np.zeros_like(u)


def geometric_mean(values) -> float:
    """Geometric mean of nonnegative values; zero if any value is zero."""
    vals = np.asarray(values, dtype=float)
    if np.any(vals < 0.0):
        raise ValueError("values must be nonnegative")
    if np.any(vals == 0.0):
        return 0.0
    return float(np.exp(np.mean(np.log(vals))))


def utility_value(util: UtilitySpec, throughput, u) -> float:
    """Realized utility of a throughput vector."""
    thr = np.asarray(throughput, dtype=float)
    if util.kind == "proportional":
        if np.any(thr <= 0.0):
            return -np.inf
        return float(np.sum(np.log(thr)))
    return float(np.min(thr / np.asarray(u, dtype=float)))


def fplinq_solver(iters: int = 100):
    """Per-slot solver callable built on the baseline."""

    def solve(net: NetworkInstance, w):
        return fplinq(net, w, iters)

    solve.normalize_weights = False
    return solve


def luva_solver(schedule: StepSchedule, mode: str = "normalized",
                x0: float = 0.01):
    """Per-slot solver callable built on the unrolled solver. Queue weights
    are max-normalized before solving (flagged for dpp_run)."""

    def solve(net: NetworkInstance, w):
        x, _ = run(net, w, schedule, mode=mode, x0=x0, keep_trace=False)
        return x

    solve.normalize_weights = True
    return solve


@dataclass
class DppResult:
    """Scheduler outcome: per-link throughput (mean rate over the averaging
    window), realized utility, and full queue/rate traces."""

    throughput: np.ndarray
    utility: float
    q_trace: np.ndarray
    rate_trace: np.ndarray
    a_max: float


def dpp_run(net: NetworkInstance, solver, util: UtilitySpec,
            t_total: int = 1000, t_avg: int = 500,
            q0: float = 1.0) -> DppResult:
    """Run the scheduler for t_total slots; average the last t_avg.

    Per slot: (i) auxiliary arrivals from the closed form, (ii) weighted
    sum-rate allocation with the current queues as weights, (iii) queue
    update. Deterministic given the solver.
    """
    if not 1 <= t_avg <= t_total:
        raise ValueError("need 1 <= t_avg <= t_total")
    k = net.k_links
    u = utopian_point(net)
    a_max = float(np.max(u))
    normalize = bool(getattr(solver, "normalize_weights", False))

    q = np.full(k, float(q0))
    if np.any(q < 0.0):
        raise ValueError("q0 must be nonnegative")
    q_trace = np.empty((t_total + 1, k))
    q_trace[0] = q
    rate_trace = np.empty((t_total, k))

    for t in range(t_total):
        if util.kind == "proportional":
            a = aux_proportional(q, util.v, a_max)
        else:
            a = aux_maxmin(q, util.v, u)
        top = float(np.max(q))
        if top > 0.0:
            w = q / top if normalize else q
            x = solver(net, w)
            r = rate_vector(x, net)
        else:
            r = np.zeros(k)  # all queues empty: nothing worth serving
        q = queue_update(q, r, a)
        rate_trace[t] = r
        q_trace[t + 1] = q

    throughput = rate_trace[t_total - t_avg:].mean(axis=0)
    return DppResult(throughput=throughput,
                     utility=utility_value(util, throughput, u),
                     q_trace=q_trace, rate_trace=rate_trace, a_max=a_max)
