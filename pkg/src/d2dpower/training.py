"""Layer-wise learning of solver step-size schedules.

The unrolled solver is differentiable in its 3N per-layer step sizes, so the
schedule is trained by stochastic gradient descent on the negative weighted
sum-rate of the layer output. Layer k is trained in three stages: its own
parameter group {alpha1[k-1], alpha2[k], alpha3[k-1]} at the base rate, then
all parameters of layers 1..k at two reduced rates. Gradients are computed by
explicit reverse-mode differentiation through the unrolled updates, batched
over training instances; clamp and projection kinks use subgradient zero at
the boundary, one in the interior, and the gradient-norm divisor is
differentiated through. Finite differences on the forward pass reproduce
these gradients, which the test suite checks.

Nothing here depends on a deep-learning framework; the update rule is a
from-scratch Adam.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import netgen
from .netgen import NetworkInstance, SystemParams
from .rates import offdiag, weighted_sum_rate
from .solver import StepSchedule, viva_defaults

__all__ = [
    "TrainConfig",
    "AdamState",
    "HistoryRecord",
    "loss",
    "grad_schedule",
    "adam_step",
    "train_layerwise",
    "history_to_csv",
    "sample_weights",
]

WEIGHT_DISTS = ("uniform01", "all_ones")


@dataclass
class TrainConfig:
    """Training protocol knobs.

    Schedules start from the constant untrained default (0.003 per step
    size). Each stage stops early once the moving average of the validation
    loss, checked every val_every iterations, improves by less than
    stop_tolerance (relative) over a stop_window span, or at max_iter.
    """

    n_layers: int = 10
    n_train: int = 50
    max_iter: int = 20000
    base_rate: float = 1e-3
    refinement_factors: tuple = (0.1, 0.01)
    weight_dist: str = "uniform01"
    validation_size: int = 500
    seed: int = 0
    x0: float = 0.01
    val_every: int = 100
    stop_window: int = 500
    stop_tolerance: float = 1e-4
    init_constant: float = 0.003

    def __post_init__(self):
        if self.n_layers < 1 or self.n_train < 1 or self.max_iter < 1:
            raise ValueError("n_layers, n_train, max_iter must be >= 1")
        if self.base_rate <= 0.0:
            raise ValueError("base_rate must be positive")
        f = tuple(self.refinement_factors)
        if any(not 0.0 < fi < 1.0 for fi in f):
            raise ValueError("refinement factors must lie in (0, 1)")
        if list(f) != sorted(f, reverse=True):
            raise ValueError("refinement factors must decrease")
        if self.weight_dist not in WEIGHT_DISTS:
            raise ValueError(f"weight_dist must be one of {WEIGHT_DISTS}")
        if self.validation_size < 1 or self.val_every < 1:
            raise ValueError("validation_size and val_every must be >= 1")


@dataclass
class HistoryRecord:
    """One validation checkpoint. stage is 'L<k>.<name>'."""

    layer: int
    stage: str
    iteration: int
    val_mean_wsr: float


def loss(x, w, net: NetworkInstance) -> float:
    """Training loss of one allocation: negative weighted sum-rate."""
    return -weighted_sum_rate(x, w, net)


def sample_weights(rng: np.random.Generator, count: int, k: int,
                   dist: str) -> np.ndarray:
    if dist == "uniform01":
        return rng.uniform(size=(count, k))
    if dist == "all_ones":
        return np.ones((count, k))
    raise ValueError(f"weight_dist must be one of {WEIGHT_DISTS}")


# Batched unrolled forward/backward. Shapes: gain (B,K,K), w/x (B,K),
# scalars t/lam (B,). noise is a scalar. All float64.

def _vecmat(v, mat):
    # (B,K) row vector times (B,K,K): out_j = sum_i v_i mat_ij
    return np.matmul(v[:, None, :], mat)[:, 0, :]


def _matvec(mat, v):
    return np.matmul(mat, v[:, :, None])[:, :, 0]


def _frame_scalars(gain, noise, w):
    direct = np.diagonal(gain, axis1=-2, axis2=-1)
    u = np.log1p(direct / noise)
    r = u / np.linalg.norm(u, axis=-1, keepdims=True)
    c = np.sum(w * r, axis=-1)
    a_dot_w = -np.sum(w * u, axis=-1)
    return c, a_dot_w


def _unrolled_forward(gain, gain_off, noise, w, a1, a2, a3, kcut, x0,
                      want_tape: bool):
    b, k = w.shape
    c, a_dot_w = _frame_scalars(gain, noise, w)
    x = np.full((b, k), float(x0))
    lam = np.ones(b)
    t = np.zeros(b)
    p = noise + _matvec(gain, x)
    q = noise + _matvec(gain_off, x)
    tape = []
    for layer in range(kcut):
        g = _vecmat(w / p, gain) - _vecmat(w / q, gain_off)
        ng = np.linalg.norm(g, axis=-1)
        upd = ng > 0.0
        safe = np.where(upd, ng, 1.0)
        h = np.where(upd[:, None], g / safe[:, None], 0.0)
        t = t - a1[layer] * (1.0 - lam * c)
        v = x + a2[layer] * lam[:, None] * h
        x_new = np.clip(v, 0.0, 1.0)
        interior = (v > 0.0) & (v < 1.0)
        p_new = noise + _matvec(gain, x_new)
        q_new = noise + _matvec(gain_off, x_new)
        swr = np.sum(w * (np.log(p_new) - np.log(q_new)), axis=-1)
        s = a_dot_w + t * c + swr
        mu = lam - a3[layer] * s
        lam_new = np.maximum(mu, 0.0)
        if want_tape:
            tape.append((x, lam, p, q, safe, h, interior, s, mu > 0.0, upd))
        x, lam, p, q = x_new, lam_new, p_new, q_new
    wsr = np.sum(w * (np.log(p) - np.log(q)), axis=-1)
    return x, lam, p, q, wsr, c, a_dot_w, tape


def _loss_and_grad(gain, gain_off, noise, w, vec, kcut, x0):
    """Batch-mean loss after kcut layers and its gradient in the flat
    3N step-size vector. Entries the loss cannot reach are zero."""
    n = vec.size // 3
    a1, a2, a3 = vec[:n], vec[n:2 * n], vec[2 * n:]
    b = w.shape[0]
    x, lam, p, q, wsr, c, a_dot_w, tape = _unrolled_forward(
        gain, gain_off, noise, w, a1, a2, a3, kcut, x0, want_tape=True)
    loss_val = -float(np.mean(wsr))

    g_final = _vecmat(w / p, gain) - _vecmat(w / q, gain_off)
    xb = -g_final / b
    tb = np.zeros(b)
    lb = np.zeros(b)
    ga1 = np.zeros(n)
    ga2 = np.zeros(n)
    ga3 = np.zeros(n)
    g_next = g_final
    for layer in range(kcut - 1, -1, -1):
        x_prev, lam_prev, p_prev, q_prev, ng, h, interior, s, pos, upd = \
            tape[layer]
        # multiplier step: lam_new = max(0, lam_prev - a3 s(t_new, x_new))
        mub = lb * pos
        lb_prev = mub.copy()
        ga3[layer] = -np.sum(mub * s)
        sb = -mub * a3[layer]
        tb = tb + sb * c
        xb = xb + sb[:, None] * g_next
        # offset step: t_new = t_prev - a1 (1 - lam_prev c)
        ga1[layer] = -np.sum(tb * (1.0 - lam_prev * c))
        lb_prev += tb * (a1[layer] * c)
        # power step: x_new = clip(x_prev + a2 lam_prev g/|g|, 0, 1)
        vb = np.where(upd[:, None], xb * interior, xb)
        dvh = np.sum(vb * h, axis=-1)
        ga2[layer] = np.sum(lam_prev * dvh)
        lb_prev += a2[layer] * dvh
        coef = np.where(upd, a2[layer] * lam_prev / ng, 0.0)
        gb = coef[:, None] * (vb - h * dvh[:, None])
        # curvature of the rate gradient at x_prev
        t1 = _matvec(gain, gb)
        t2 = _matvec(gain_off, gb)
        hv = (_vecmat(w * t2 / (q_prev * q_prev), gain_off) -
              _vecmat(w * t1 / (p_prev * p_prev), gain))
        xb = vb + hv
        lb = lb_prev
        g_next = h * ng[:, None]  # J(x_prev)^T w, rebuilt from the tape
    return loss_val, np.concatenate([ga1, ga2, ga3])


def _mean_val_wsr(gain, gain_off, noise, w, vec, kcut, x0) -> float:
    n = vec.size // 3
    _, _, _, _, wsr, _, _, _ = _unrolled_forward(
        gain, gain_off, noise, w, vec[:n], vec[n:2 * n], vec[2 * n:],
        kcut, x0, want_tape=False)
    return float(np.mean(wsr))


def _active_indices(n: int, layer: int, param_set: str) -> np.ndarray:
    """Flat indices trained for 1-indexed `layer`.

    current_layer: {alpha1[layer-1], alpha2[layer], alpha3[layer-1]}, which
    at layer 1 is alpha2[1] alone. all: those groups for layers 1..layer.
    """
    if param_set == "current_layer":
        idx = [n + layer - 1]
        if layer >= 2:
            idx += [layer - 2, 2 * n + layer - 2]
    elif param_set == "all":
        idx = list(range(n, n + layer))
        idx += list(range(0, layer - 1))
        idx += list(range(2 * n, 2 * n + layer - 1))
    else:
        raise ValueError("param_set must be 'current_layer' or 'all'")
    return np.array(sorted(idx), dtype=int)


def grad_schedule(net: NetworkInstance, w, schedule: StepSchedule,
                  layer_cutoff: int, param_set: str = "current_layer",
                  x0: float = 0.01) -> np.ndarray:
    """Gradient of loss(x^(layer_cutoff)) in the flat 3N schedule vector.

    Entries outside the selected parameter set are zero. The trailing
    alpha1/alpha3 of the cutoff layer cannot influence the loss, so their
    entries vanish identically.
    """
    if not 1 <= layer_cutoff <= schedule.n_layers:
        raise ValueError("layer_cutoff must be in [1, n_layers]")
    w = np.asarray(w, dtype=float)
    gain = net.gain[None, :, :]
    _, grad = _loss_and_grad(gain, offdiag(gain), net.noise_power,
                             w[None, :], schedule.to_vector(), layer_cutoff,
                             x0)
    mask = np.zeros(3 * schedule.n_layers, dtype=bool)
    mask[_active_indices(schedule.n_layers, layer_cutoff, param_set)] = True
    return np.where(mask, grad, 0.0)


@dataclass
class AdamState:
    """Moment estimates for the currently active parameter subset."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size))


def adam_step(params: np.ndarray, grad: np.ndarray, state: AdamState,
              rate: float):
    """One bias-corrected Adam update; returns (new_params, new_state)."""
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** step)
    v_hat = v / (1.0 - state.beta2 ** step)
    new_params = params - rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, AdamState(m=m, v=v, step=step, beta1=state.beta1,
                                 beta2=state.beta2, eps=state.eps)


def _stage_should_stop(val_losses: list, cfg: TrainConfig) -> bool:
    # Moving averages of the per-checkpoint validation loss; compare the
    # current window against the one stop_window iterations earlier.
    span = max(1, cfg.stop_window // cfg.val_every)
    if len(val_losses) < span + 1:
        return False

    def ma(end):
        return float(np.mean(val_losses[max(0, end - span):end]))

    now = ma(len(val_losses))
    before = ma(len(val_losses) - span)
    improvement = (before - now) / abs(before)
    return improvement < cfg.stop_tolerance


def train_layerwise(config: TrainConfig,
                    params: SystemParams | None = None,
                    k_links: int = 10):
    """Train a schedule layer by layer; returns (schedule, history).

    Training draws fresh instances every iteration; validation uses one
    fixed set. Identical configs give identical results.
    """
    params = params or SystemParams()
    ss = np.random.SeedSequence(config.seed)
    val_ss, train_ss = ss.spawn(2)
    val_rng = np.random.default_rng(val_ss)
    train_rng = np.random.default_rng(train_ss)
    noise = netgen.noise_power_mw(params)

    val_gain = netgen.gain_batch(params, k_links, config.validation_size,
                                 val_rng)
    val_gain_off = offdiag(val_gain)
    val_w = sample_weights(val_rng, config.validation_size, k_links,
                           config.weight_dist)

    n = config.n_layers
    vec = viva_defaults(n, config.init_constant).to_vector()
    history: list[HistoryRecord] = []

    stages = [("main", "current_layer", config.base_rate)]
    stages += [(f"refine{i}", "all", config.base_rate * f)
               for i, f in enumerate(config.refinement_factors, start=1)]

    for layer in range(1, n + 1):
        for stage_name, param_set, rate in stages:
            active = _active_indices(n, layer, param_set)
            adam = AdamState.zeros(active.size)
            val_losses: list[float] = []
            for it in range(1, config.max_iter + 1):
                gain_b = netgen.gain_batch(params, k_links, config.n_train,
                                           train_rng)
                w_b = sample_weights(train_rng, config.n_train, k_links,
                                     config.weight_dist)
                loss_val, grad = _loss_and_grad(
                    gain_b, offdiag(gain_b), noise, w_b, vec, layer,
                    config.x0)
                if not np.isfinite(loss_val):
                    raise FloatingPointError(
                        f"non-finite training loss at layer {layer} "
                        f"stage {stage_name} iteration {it}")
                sub, adam = adam_step(vec[active], grad[active], adam, rate)
                vec[active] = sub
                if it % config.val_every == 0 or it == config.max_iter:
                    val = _mean_val_wsr(val_gain, val_gain_off, noise,
                                        val_w, vec, layer, config.x0)
                    history.append(HistoryRecord(
                        layer=layer, stage=f"L{layer}.{stage_name}",
                        iteration=it, val_mean_wsr=val))
                    val_losses.append(-val)
                    if _stage_should_stop(val_losses, config):
                        break
    schedule = StepSchedule.from_vector(vec, metadata={
        "kind": "trained",
        "k_links": k_links,
        "n_train": config.n_train,
        "max_iter": config.max_iter,
        "seed": config.seed,
        "x0": config.x0,
        "weight_dist": config.weight_dist,
    })
    return schedule, history


def history_to_csv(history, path) -> None:
    """Write checkpoints as CSV: stage, iteration, val_mean_wsr."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "iteration", "val_mean_wsr"])
        for rec in history:
            writer.writerow([rec.stage, rec.iteration,
                             repr(float(rec.val_mean_wsr))])
