"""Random D2D network layouts and channel gains.

Transmitters drop uniformly in a square service area; each receiver sits at a
uniform angle and a uniform distance in [d_min, d_max] from its transmitter.
Link gains follow a LoS street-canyon median pathloss with a single breakpoint
(dual-slope 20/40 dB per decade), no shadowing or fast fading. All powers are
linear milliwatts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

# Engineering value used by the breakpoint formulas (not the CODATA constant).
SPEED_OF_LIGHT = 3.0e8

__all__ = [
    "SystemParams",
    "NetworkInstance",
    "pathloss_db",
    "noise_power_mw",
    "gains_from_geometry",
    "sample_layout",
    "sample_instances",
    "gain_batch",
    "save_layout",
    "load_layout",
]


@dataclass(frozen=True)
class SystemParams:
    """Radio and deployment parameters. Defaults are the evaluation setup."""

    bandwidth_hz: float = 20e6
    carrier_hz: float = 2.4e9
    antenna_height_m: float = 1.5
    tx_power_dbm: float = 20.0
    noise_psd_dbm_hz: float = -174.0
    d_min_m: float = 2.0
    d_max_m: float = 65.0
    area_side_m: float = 500.0

    def __post_init__(self):
        if not (0.0 < self.d_min_m < self.d_max_m):
            raise ValueError("need 0 < d_min_m < d_max_m")
        if self.area_side_m <= 0.0:
            raise ValueError("area_side_m must be positive")
        if self.bandwidth_hz <= 0.0 or self.carrier_hz <= 0.0:
            raise ValueError("bandwidth_hz and carrier_hz must be positive")
        if self.antenna_height_m <= 0.0:
            raise ValueError("antenna_height_m must be positive")


@dataclass(frozen=True)
class NetworkInstance:
    """One sampled network: positions, gain matrix, noise power.

    gain[i, j] is the received power in mW at receiver i from transmitter j
    at full transmit power, so gain[i, i] is the direct link of pair i.
    """

    k_links: int
    tx_pos: np.ndarray
    rx_pos: np.ndarray
    gain: np.ndarray
    noise_power: float
    seed: int | None = None

    def __post_init__(self):
        k = self.k_links
        if k < 1:
            raise ValueError("k_links must be >= 1")
        if self.tx_pos.shape != (k, 2) or self.rx_pos.shape != (k, 2):
            raise ValueError("positions must have shape (k, 2)")
        if self.gain.shape != (k, k):
            raise ValueError("gain must have shape (k, k)")
        if not np.all(np.isfinite(self.gain)) or np.any(self.gain <= 0.0):
            raise ValueError("gains must be finite and strictly positive")
        if not (np.isfinite(self.noise_power) and self.noise_power > 0.0):
            raise ValueError("noise_power must be finite and positive")


def _breakpoint(params: SystemParams) -> tuple[float, float]:
    # Breakpoint distance and basic loss of the dual-slope LoS model.
    lam = SPEED_OF_LIGHT / params.carrier_hz
    h = params.antenna_height_m
    r_bp = 4.0 * h * h / lam
    l_bp = abs(20.0 * np.log10(lam * lam / (8.0 * np.pi * h * h)))
    return r_bp, l_bp


def pathloss_db(d_m, params: SystemParams):
    """Median LoS pathloss in dB at distance d_m (meters, scalar or array).

    20 dB/decade up to the breakpoint, 40 dB/decade beyond, continuous at
    the breakpoint. Raises on non-positive distances.
    """
    d = np.asarray(d_m, dtype=float)
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise ValueError("distances must be positive and finite")
    r_bp, l_bp = _breakpoint(params)
    slope = 20.0 * np.log10(d / r_bp)
    pl = l_bp + 6.0 + slope + np.where(d > r_bp, slope, 0.0)
    return float(pl) if np.isscalar(d_m) else pl


def noise_power_mw(params: SystemParams) -> float:
    """Thermal noise power over the full bandwidth, in linear mW."""
    dbm = params.noise_psd_dbm_hz + 10.0 * np.log10(params.bandwidth_hz)
    return float(10.0 ** (dbm / 10.0))


def gains_from_geometry(tx_pos: np.ndarray, rx_pos: np.ndarray,
                        params: SystemParams) -> np.ndarray:
    """Gain matrix from positions: gain[i, j] couples Tx j into Rx i (mW)."""
    tx = np.asarray(tx_pos, dtype=float)
    rx = np.asarray(rx_pos, dtype=float)
    d = np.linalg.norm(rx[..., :, None, :] - tx[..., None, :, :], axis=-1)
    if np.any(d <= 0.0):
        raise ValueError("coincident transmitter and receiver")
    p_mw = 10.0 ** (params.tx_power_dbm / 10.0)
    return p_mw * 10.0 ** (-pathloss_db(d, params) / 10.0)


def _geometry(params: SystemParams, k: int, rng: np.random.Generator,
              count: int | None = None):
    # Draw order is fixed: tx, radii, angles. Changing it changes seeds.
    lead = () if count is None else (count,)
    tx = rng.uniform(0.0, params.area_side_m, size=lead + (k, 2))
    radii = rng.uniform(params.d_min_m, params.d_max_m, size=lead + (k,))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=lead + (k,))
    offset = radii[..., None] * np.stack(
        [np.cos(angles), np.sin(angles)], axis=-1)
    return tx, tx + offset


def sample_layout(params: SystemParams, k: int, seed: int) -> NetworkInstance:
    """Sample one network instance; identical seeds give identical instances."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    tx, rx = _geometry(params, k, rng)
    return NetworkInstance(
        k_links=k,
        tx_pos=tx,
        rx_pos=rx,
        gain=gains_from_geometry(tx, rx, params),
        noise_power=noise_power_mw(params),
        seed=seed,
    )


def sample_instances(params: SystemParams, k: int, count: int,
                     seed) -> list[NetworkInstance]:
    """Sample a batch of instances from one seeded stream."""
    rng = np.random.default_rng(seed)
    tx, rx = _geometry(params, k, rng, count=count)
    noise = noise_power_mw(params)
    gains = gains_from_geometry(tx, rx, params)
    return [
        NetworkInstance(k_links=k, tx_pos=tx[b], rx_pos=rx[b],
                        gain=gains[b], noise_power=noise, seed=None)
        for b in range(count)
    ]


def gain_batch(params: SystemParams, k: int, count: int,
               rng: np.random.Generator) -> np.ndarray:
    """Stack of `count` gain matrices, shape (count, k, k), linear mW."""
    tx, rx = _geometry(params, k, rng, count=count)
    return gains_from_geometry(tx, rx, params)


def save_layout(path, net: NetworkInstance, params: SystemParams) -> None:
    """Write an instance to JSON (gain flattened row-major, linear mW)."""
    doc = {
        "seed": net.seed,
        "k": net.k_links,
        "params": asdict(params),
        "tx_pos": net.tx_pos.tolist(),
        "rx_pos": net.rx_pos.tolist(),
        "gain": net.gain.reshape(-1).tolist(),
        "noise_power": net.noise_power,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_layout(path) -> tuple[NetworkInstance, SystemParams]:
    with open(path) as fh:
        doc = json.load(fh)
    k = int(doc["k"])
    params = SystemParams(**doc["params"])
    net = NetworkInstance(
        k_links=k,
        tx_pos=np.asarray(doc["tx_pos"], dtype=float),
        rx_pos=np.asarray(doc["rx_pos"], dtype=float),
        gain=np.asarray(doc["gain"], dtype=float).reshape(k, k),
        noise_power=float(doc["noise_power"]),
        seed=doc.get("seed"),
    )
    return net, params
