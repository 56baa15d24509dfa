"""Primal-dual solver for weighted sum-rate power control.

The weighted problem is scalarized against the utopian direction: minimize
the offset t such that w^T(a + t r + R(x)) >= 0 with a = -u, r = u/|u|.
Each layer does one gradient step on (t, x) and one on the multiplier:

    t    <- t - a1 (1 - lam w^T r)
    x    <- clip(x + (a2 / |g|) lam g, 0, 1),   g = J(x)^T w
    lam  <- max(0, lam - a3 w^T(a + t r + R(x)))

using the fresh t and x in the multiplier step. "normalized" mode applies
the |g| divisor and the projection lam >= 0; "plain" mode drops both and is
kept for oscillation studies. A fixed per-layer step-size schedule makes the
solver a deterministic unrolled network; schedules can be the untrained
constant default or learned offline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .netgen import NetworkInstance
from .rates import (ScalarizationFrame, offdiag, power_terms,
                    scalarization_frame, weighted_rate_gradient)

__all__ = [
    "StepSchedule",
    "SolverState",
    "SolverTrace",
    "viva_defaults",
    "init_state",
    "pd_step",
    "run",
    "save_schedule",
    "load_schedule",
]

MODES = ("normalized", "plain")


@dataclass
class StepSchedule:
    """Per-layer step sizes: alpha1 (t step), alpha2 (x step), alpha3 (lam
    step), one value per layer. Values may be negative; training decides."""

    alpha1: np.ndarray
    alpha2: np.ndarray
    alpha3: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha1 = np.atleast_1d(np.asarray(self.alpha1, dtype=float))
        self.alpha2 = np.atleast_1d(np.asarray(self.alpha2, dtype=float))
        self.alpha3 = np.atleast_1d(np.asarray(self.alpha3, dtype=float))
        n = self.alpha1.shape[0]
        if self.alpha2.shape != (n,) or self.alpha3.shape != (n,):
            raise ValueError("alpha arrays must share one length")
        if n < 1:
            raise ValueError("schedule needs at least one layer")
        for arr in (self.alpha1, self.alpha2, self.alpha3):
            if not np.all(np.isfinite(arr)):
                raise ValueError("step sizes must be finite")

    @property
    def n_layers(self) -> int:
        return self.alpha1.shape[0]

    def to_vector(self) -> np.ndarray:
        """Flat parameter vector [alpha1; alpha2; alpha3], length 3N."""
        return np.concatenate([self.alpha1, self.alpha2, self.alpha3])

    @classmethod
    def from_vector(cls, vec: np.ndarray, metadata: dict | None = None):
        vec = np.asarray(vec, dtype=float)
        if vec.size % 3 != 0:
            raise ValueError("vector length must be divisible by 3")
        n = vec.size // 3
        return cls(vec[:n], vec[n:2 * n], vec[2 * n:],
                   metadata=dict(metadata or {}))


def viva_defaults(n_layers: int, constant: float = 0.003) -> StepSchedule:
    """Untrained schedule: one constant for every step size of every layer."""
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    c = float(constant)
    if not np.isfinite(c):
        raise ValueError("constant must be finite")
    ones = np.ones(n_layers)
    return StepSchedule(c * ones, c * ones, c * ones,
                        metadata={"kind": "constant", "constant": c})


@dataclass
class SolverState:
    """Iterate after k layers: scalarization offset t, powers x, multiplier."""

    t: float
    x: np.ndarray
    lam: float
    k: int = 0


@dataclass
class SolverTrace:
    """Per-layer history including the initial state (length n_layers + 1)."""

    t: np.ndarray
    x: np.ndarray
    lam: np.ndarray
    wsr: np.ndarray


def init_state(net: NetworkInstance, frame: ScalarizationFrame,
               x0: float = 0.01) -> SolverState:
    """Start at x = x0 * ones, t = 0, lam = 1.

    lam must start positive or the x update is inert; x0 = 0.01 is the
    default, with 0 and 1 as the studied alternatives.
    """
    x = np.full(net.k_links, float(x0))
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("x0 must lie in [0, 1]")
    return SolverState(t=0.0, x=x, lam=1.0, k=0)


def _step_arrays(x, lam, t, w, gain, gain_off, noise, a_dot_w, r_dot_w,
                 a1, a2, a3, normalized: bool):
    """One layer on plain arrays; returns (t', x', lam', wsr')."""
    total, interf = power_terms(x, gain, gain_off, noise)
    t_new = t - a1 * (1.0 - lam * r_dot_w)
    g = weighted_rate_gradient(w, gain, gain_off, total, interf)
    norm_g = float(np.linalg.norm(g))
    if normalized:
        if norm_g > 0.0:
            x_new = np.clip(x + (a2 / norm_g) * lam * g, 0.0, 1.0)
        else:
            x_new = x  # zero gradient: skip the x update
    else:
        x_new = np.clip(x + a2 * lam * g, 0.0, 1.0)
    total, interf = power_terms(x_new, gain, gain_off, noise)
    rates = np.log(total) - np.log(interf)
    wsr = float(w @ rates)
    slack = a_dot_w + t_new * r_dot_w + wsr
    lam_new = lam - a3 * slack
    if normalized:
        lam_new = max(0.0, lam_new)
    return t_new, x_new, lam_new, wsr


def pd_step(state: SolverState, frame: ScalarizationFrame,
            net: NetworkInstance, alpha1: float, alpha2: float,
            alpha3: float, mode: str = "normalized") -> SolverState:
    """Advance one layer. Step sizes are this layer's entries."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    vals = np.concatenate([[state.t, state.lam, alpha1, alpha2, alpha3],
                           state.x])
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite solver state or step size")
    gain = net.gain
    t_new, x_new, lam_new, _ = _step_arrays(
        state.x, state.lam, state.t, frame.w, gain, offdiag(gain),
        net.noise_power, float(frame.w @ frame.a), float(frame.w @ frame.r_dir),
        float(alpha1), float(alpha2), float(alpha3), mode == "normalized")
    return SolverState(t=float(t_new), x=x_new, lam=float(lam_new),
                       k=state.k + 1)


def run(net: NetworkInstance, w, schedule: StepSchedule,
        mode: str = "normalized", x0: float = 0.01,
        keep_trace: bool = True):
    """Run every layer of the schedule; returns (x_final, trace).

    trace is None when keep_trace is False. The run is deterministic:
    identical inputs give identical outputs.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    frame = scalarization_frame(net, w)
    state = init_state(net, frame, x0=x0)
    n = schedule.n_layers
    gain = net.gain
    gain_off = offdiag(gain)
    noise = net.noise_power
    a_dot_w = float(frame.w @ frame.a)
    r_dot_w = float(frame.w @ frame.r_dir)
    normalized = mode == "normalized"

    t, x, lam = state.t, state.x, state.lam
    if keep_trace:
        total, interf = power_terms(x, gain, gain_off, noise)
        wsr0 = float(frame.w @ (np.log(total) - np.log(interf)))
        ts = np.empty(n + 1)
        xs = np.empty((n + 1, net.k_links))
        lams = np.empty(n + 1)
        wsrs = np.empty(n + 1)
        ts[0], xs[0], lams[0], wsrs[0] = t, x, lam, wsr0

    for k in range(n):
        t, x, lam, wsr = _step_arrays(
            x, lam, t, frame.w, gain, gain_off, noise, a_dot_w, r_dot_w,
            schedule.alpha1[k], schedule.alpha2[k], schedule.alpha3[k],
            normalized)
        if not (np.isfinite(t) and np.isfinite(lam) and
                np.all(np.isfinite(x))):
            raise FloatingPointError(f"non-finite iterate at layer {k + 1}")
        if keep_trace:
            ts[k + 1], xs[k + 1], lams[k + 1], wsrs[k + 1] = t, x, lam, wsr

    trace = SolverTrace(t=ts, x=xs, lam=lams, wsr=wsrs) if keep_trace else None
    return x, trace


def save_schedule(path, schedule: StepSchedule) -> None:
    doc = {
        "n_layers": schedule.n_layers,
        "alpha1": schedule.alpha1.tolist(),
        "alpha2": schedule.alpha2.tolist(),
        "alpha3": schedule.alpha3.tolist(),
        "metadata": schedule.metadata,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_schedule(path) -> StepSchedule:
    with open(path) as fh:
        doc = json.load(fh)
    sched = StepSchedule(doc["alpha1"], doc["alpha2"], doc["alpha3"],
                         metadata=doc.get("metadata", {}))
    if sched.n_layers != int(doc["n_layers"]):
        raise ValueError("n_layers does not match alpha arrays")
    return sched
