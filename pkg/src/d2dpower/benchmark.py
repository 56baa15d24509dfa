"""Evaluation harness: performance ratios, sweeps, CDFs, CSV reports.

The figure of merit is the ratio of a solver's weighted sum-rate to the
baseline's on the same instance and weights; a ratio above 1 beats the
baseline. Sweeps re-evaluate one trained schedule across network scales
without retraining.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np

from . import netgen
from .netgen import NetworkInstance, SystemParams
from .rates import weighted_sum_rate
from .solver import StepSchedule, run
from .fplinq import fplinq
from .training import sample_weights

__all__ = [
    "EvalReport",
    "SweepPoint",
    "performance_ratio",
    "make_test_set",
    "fplinq_point_solver",
    "schedule_point_solver",
    "evaluate",
    "sweep_generalization",
    "cdf_points",
    "report_to_csv",
    "sweep_to_csv",
]

SWEEP_AXES = ("k_fixed_area", "k_fixed_density", "snr_offset",
              "d_min", "d_max")


def performance_ratio(net: NetworkInstance, w, x_hat, x_ref) -> float:
    """Weighted sum-rate of x_hat relative to x_ref on the same network."""
    ref = weighted_sum_rate(x_ref, w, net)
    if ref == 0.0:
        raise ZeroDivisionError("reference weighted sum-rate is zero")
    return weighted_sum_rate(x_hat, w, net) / ref


def make_test_set(params: SystemParams, k: int, count: int, seed,
                  weight_dist: str = "uniform01"):
    """List of (instance, weights) pairs from one seeded stream.

    Geometry is drawn first, weights second, so the same seed always yields
    the same pairs. seed may be an int or a tuple of ints.
    """
    nets = netgen.sample_instances(params, k, count, seed)
    rng = np.random.default_rng((seed, 0xA11) if isinstance(seed, int)
                                else tuple(seed) + (0xA11,))
    ws = sample_weights(rng, count, k, weight_dist)
    return [(net, ws[i]) for i, net in enumerate(nets)]


def fplinq_point_solver(iters: int = 100):
    def solve(net, w):
        return fplinq(net, w, iters)
    return solve


def schedule_point_solver(schedule: StepSchedule, mode: str = "normalized",
                          x0: float = 0.01):
    def solve(net, w):
        x, _ = run(net, w, schedule, mode=mode, x0=x0, keep_trace=False)
        return x
    return solve


@dataclass
class EvalReport:
    """Per-instance ratios plus summary statistics."""

    ratios: np.ndarray
    mean: float
    std: float
    frac_at_least_one: float
    skipped: int
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    cdf_values: np.ndarray
    cdf_fractions: np.ndarray

    def to_json(self) -> str:
        doc = {
            "ratios": self.ratios.tolist(),
            "mean": self.mean,
            "std": self.std,
            "frac_at_least_one": self.frac_at_least_one,
            "skipped": self.skipped,
            "hist_edges": self.hist_edges.tolist(),
            "hist_counts": self.hist_counts.tolist(),
            "cdf_values": self.cdf_values.tolist(),
            "cdf_fractions": self.cdf_fractions.tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        doc = json.loads(text)
        return cls(
            ratios=np.asarray(doc["ratios"], dtype=float),
            mean=doc["mean"],
            std=doc["std"],
            frac_at_least_one=doc["frac_at_least_one"],
            skipped=int(doc["skipped"]),
            hist_edges=np.asarray(doc["hist_edges"], dtype=float),
            hist_counts=np.asarray(doc["hist_counts"], dtype=int),
            cdf_values=np.asarray(doc["cdf_values"], dtype=float),
            cdf_fractions=np.asarray(doc["cdf_fractions"], dtype=float),
        )


def cdf_points(values):
    """Empirical CDF as (sorted unique values, cumulative fraction).

    Duplicates collapse into one point carrying their combined mass; the
    last fraction is exactly 1.
    """
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValueError("need at least one value")
    uniq, counts = np.unique(vals, return_counts=True)
    fractions = np.cumsum(counts) / vals.size
    return uniq, fractions


def evaluate(test_set, solver_a, solver_b=None, hist_bins: int = 20
             ) -> EvalReport:
    """Ratio of solver_a to solver_b (default: 100-iteration baseline) on
    every instance. Each solver runs exactly once per instance; instances
    with a zero reference sum-rate are skipped and counted."""
    if solver_b is None:
        solver_b = fplinq_point_solver(100)
    ratios = []
    skipped = 0
    for net, w in test_set:
        x_a = solver_a(net, w)
        x_b = solver_b(net, w)
        try:
            ratios.append(performance_ratio(net, w, x_a, x_b))
        except ZeroDivisionError:
            skipped += 1
    if not ratios:
        raise ValueError("every instance was skipped")
    arr = np.asarray(ratios)
    counts, edges = np.histogram(arr, bins=hist_bins)
    cdf_v, cdf_f = cdf_points(arr)
    return EvalReport(
        ratios=arr,
        mean=float(arr.mean()),
        std=float(arr.std()),
        frac_at_least_one=float(np.mean(arr >= 1.0)),
        skipped=skipped,
        hist_edges=edges,
        hist_counts=counts,
        cdf_values=cdf_v,
        cdf_fractions=cdf_f,
    )


@dataclass
class SweepPoint:
    axis: str
    setting: float
    k: int
    mean_ratio: float
    std_ratio: float
    count: int
    skipped: int


def _point_config(axis: str, setting, base_params: SystemParams,
                  base_k: int) -> tuple[SystemParams, int]:
    if axis == "k_fixed_area":
        return base_params, int(setting)
    if axis == "k_fixed_density":
        # keep links per unit area constant; round half up
        side = float(setting)
        scale = (side / base_params.area_side_m) ** 2
        k = int(np.floor(base_k * scale + 0.5))
        return replace(base_params, area_side_m=side), max(1, k)
    if axis == "snr_offset":
        return replace(base_params,
                       tx_power_dbm=base_params.tx_power_dbm
                       + float(setting)), base_k
    if axis == "d_min":
        return replace(base_params, d_min_m=float(setting)), base_k
    if axis == "d_max":
        return replace(base_params, d_max_m=float(setting)), base_k
    raise ValueError(f"axis must be one of {SWEEP_AXES}")


def sweep_generalization(schedule: StepSchedule, axis: str, grid,
                         base_params: SystemParams, base_k: int,
                         count: int = 200, seed: int = 0,
                         weight_dist: str = "uniform01",
                         baseline_iters: int = 100,
                         mode: str = "normalized",
                         x0: float = 0.01) -> list[SweepPoint]:
    """Evaluate one schedule against the baseline across a parameter grid.

    Each grid point gets a fresh test set seeded by (seed, point index), so
    results are reproducible point by point.
    """
    solver_a = schedule_point_solver(schedule, mode=mode, x0=x0)
    solver_b = fplinq_point_solver(baseline_iters)
    points = []
    for i, setting in enumerate(grid):
        params_i, k_i = _point_config(axis, setting, base_params, base_k)
        test_set = make_test_set(params_i, k_i, count, (seed, i),
                                 weight_dist)
        rep = evaluate(test_set, solver_a, solver_b)
        points.append(SweepPoint(
            axis=axis, setting=float(setting), k=k_i,
            mean_ratio=rep.mean, std_ratio=rep.std,
            count=count - rep.skipped, skipped=rep.skipped))
    return points


def _fmt(v) -> str:
    return repr(float(v))


def report_to_csv(report: EvalReport, path) -> None:
    """Per-instance rows, then one summary row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "ratio"])
        for i, r in enumerate(report.ratios):
            writer.writerow([i, _fmt(r)])
        writer.writerow(["mean", _fmt(report.mean)])
        writer.writerow(["std", _fmt(report.std)])
        writer.writerow(["frac_at_least_one",
                         _fmt(report.frac_at_least_one)])
        writer.writerow(["skipped", report.skipped])


def sweep_to_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis", "setting", "k", "mean_ratio", "std_ratio",
                         "count", "skipped"])
        for pt in points:
            writer.writerow([pt.axis, _fmt(pt.setting), pt.k,
                             _fmt(pt.mean_ratio), _fmt(pt.std_ratio),
                             pt.count, pt.skipped])
