"""Per-link rates, their Jacobian, and the scalarization frame.

Rates are natural-log spectral efficiencies, R_i = ln(1 + SINR_i), so every
step-size and utility constant downstream is in nats. Array helpers broadcast
over leading batch dimensions; the NetworkInstance wrappers are the
single-network API.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netgen import NetworkInstance

__all__ = [
    "ScalarizationFrame",
    "sinr",
    "rate_vector",
    "rate_vector_logdiff",
    "rate_and_jacobian",
    "weighted_sum_rate",
    "rate_jacobian",
    "utopian_point",
    "scalarization_frame",
]


def offdiag(gain: np.ndarray) -> np.ndarray:
    """Copy of the gain matrix with zeroed direct links (interference only)."""
    out = np.array(gain, dtype=float, copy=True)
    k = out.shape[-1]
    idx = np.arange(k)
    out[..., idx, idx] = 0.0
    return out


def power_terms(x, gain, gain_off, noise):
    """Total and interference-plus-noise received power at each receiver.

    Returns (total, interf) with total_i = noise + sum_j gain_ij x_j and
    interf_i = noise + sum_{j != i} gain_ij x_j. Broadcasts over leading dims.
    """
    x = np.asarray(x, dtype=float)
    total = noise + np.matmul(gain, x[..., None])[..., 0]
    interf = noise + np.matmul(gain_off, x[..., None])[..., 0]
    return total, interf


def sinr_array(x, gain, noise):
    gain = np.asarray(gain, dtype=float)
    _, interf = power_terms(x, gain, offdiag(gain), noise)
    direct = np.diagonal(gain, axis1=-2, axis2=-1)
    return direct * np.asarray(x, dtype=float) / interf


def rate_array(x, gain, noise):
    return np.log1p(sinr_array(x, gain, noise))


def jacobian_terms(gain, gain_off, total, interf):
    """Rate Jacobian dR_i/dx_j from precomputed power terms.

    Row i divides gain row i by total_i minus the interference row by
    interf_i, so diagonals are nonnegative and off-diagonals nonpositive.
    """
    return (gain / total[..., None]) - (gain_off / interf[..., None])


def weighted_rate_gradient(w, gain, gain_off, total, interf):
    """J(x)^T w without forming J: two matrix-vector products."""
    lhs = np.matmul(np.swapaxes(gain, -1, -2), (w / total)[..., None])[..., 0]
    rhs = np.matmul(np.swapaxes(gain_off, -1, -2),
                    (w / interf)[..., None])[..., 0]
    return lhs - rhs


# NetworkInstance wrappers.

def sinr(x, net: NetworkInstance, i: int | None = None):
    """SINR of link i, or the whole SINR vector when i is None."""
    s = sinr_array(x, net.gain, net.noise_power)
    return float(s[i]) if i is not None else s


def rate_vector(x, net: NetworkInstance) -> np.ndarray:
    """Per-link rates ln(1 + SINR_i) in nats."""
    return np.log1p(sinr_array(x, net.gain, net.noise_power))


def rate_vector_logdiff(x, net: NetworkInstance) -> np.ndarray:
    """Rates as ln(total_i) - ln(interf_i), reusing the two matvecs.

    Mathematically equal to rate_vector; agreement at float64 scale is a
    correctness check for both routes.
    """
    gain = net.gain
    total, interf = power_terms(x, gain, offdiag(gain), net.noise_power)
    return np.log(total) - np.log(interf)


def rate_and_jacobian(x, net: NetworkInstance):
    """(rates, Jacobian) computed together so the matvecs are shared."""
    gain = net.gain
    gain_off = offdiag(gain)
    total, interf = power_terms(x, gain, gain_off, net.noise_power)
    rates = np.log(total) - np.log(interf)
    return rates, jacobian_terms(gain, gain_off, total, interf)


def weighted_sum_rate(x, w, net: NetworkInstance) -> float:
    w = np.asarray(w, dtype=float)
    return float(w @ rate_vector(x, net))


def rate_jacobian(x, net: NetworkInstance) -> np.ndarray:
    return rate_and_jacobian(x, net)[1]


def utopian_point(net: NetworkInstance) -> np.ndarray:
    """Single-user rates u_i = ln(1 + gain_ii / noise): each link alone at
    full power. No feasible allocation exceeds u in any coordinate."""
    direct = np.diagonal(net.gain)
    return np.log1p(direct / net.noise_power)


@dataclass(frozen=True)
class ScalarizationFrame:
    """Anchor a = -u, unit direction r = u/|u|, and weights for one solve."""

    u: np.ndarray
    a: np.ndarray
    r_dir: np.ndarray
    w: np.ndarray


def scalarization_frame(net: NetworkInstance, w) -> ScalarizationFrame:
    """Frame for a weighted solve. Weights must be nonnegative, not all zero."""
    w = np.asarray(w, dtype=float)
    if w.shape != (net.k_links,):
        raise ValueError("weights must have shape (k_links,)")
    if np.any(w < 0.0) or not np.any(w > 0.0):
        raise ValueError("weights must be nonnegative with at least one positive")
    u = utopian_point(net)
    if not np.all(u > 0.0):
        raise ValueError("degenerate network: zero single-user rate")
    return ScalarizationFrame(u=u, a=-u, r_dir=u / np.linalg.norm(u), w=w)
