"""Simple amplify-and-forward (SAF) benchmark.

Every relay forwards with the real gain that spends exactly its harvested
power; only the power-splitting ratios are searched, over a uniform grid.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import ChannelSet, SystemParams, received_power

SEARCH_MODES = ("full-grid", "cyclic-coordinate")


@dataclass(frozen=True)
class SafConfig:
    grid_step: float = 0.01
    search_mode: str = "cyclic-coordinate"
    max_cycles: int = 10

    def __post_init__(self):
        if not 0.0 < self.grid_step < 0.5:
            raise ValueError(f"grid_step must lie in (0,0.5), got {self.grid_step}")
        if self.search_mode not in SEARCH_MODES:
            raise ValueError(f"search_mode must be one of {SEARCH_MODES}, got {self.search_mode!r}")
        if self.max_cycles < 1:
            raise ValueError(f"max_cycles must be >= 1, got {self.max_cycles}")

    def grid(self) -> np.ndarray:
        """Grid points ``grid_step, 2*grid_step, ..., 1 - grid_step``."""
        count = int(round(1.0 / self.grid_step)) - 1
        return self.grid_step * np.arange(1, count + 1)


def _gain_sq(eta, rho, p, s2):
    # harvested / [(1 - rho)(p + s2) + s2]
    return eta * rho * (p + s2) / ((1.0 - rho) * (p + s2) + s2)


def saf_gain(params: SystemParams, channels: ChannelSet, relay_index: int, rho_i: float) -> float:
    if not 0.0 <= rho_i <= 1.0:
        raise ValueError(f"power-splitting ratio must lie in [0,1], got {rho_i}")
    p = received_power(params, channels)[relay_index]
    return float(np.sqrt(_gain_sq(params.efficiency, rho_i, p, params.noise_power)))


def saf_rates(params: SystemParams, channels: ChannelSet, rho: np.ndarray) -> np.ndarray:
    """Clamped secrecy rate of the SAF scheme for a batch of ratio vectors.

    ``rho`` has shape (..., N); the result drops the last axis.
    """
    rho = np.asarray(rho, dtype=float)
    ps, pd, s2 = params.source_power, params.an_power, params.noise_power
    p = received_power(params, channels)
    theta2 = _gain_sq(params.efficiency, rho, p, s2)
    # w_i = theta_i real, so B w has entries sqrt((1 - rho) theta^2)
    bw = np.sqrt((1.0 - rho) * theta2)
    g1 = channels.h_relay_d * channels.h_s_relay
    g2 = channels.h_relay_eve * channels.h_s_relay
    g3 = channels.h_relay_eve * channels.h_d_relay
    q1 = np.abs(channels.h_relay_d) ** 2 * s2
    q2 = np.abs(channels.h_relay_eve) ** 2 * s2
    noise_w = (2.0 - rho) * theta2
    # row-wise sums (not matmul) keep each candidate's value independent of batch shape
    snr_d = ps * np.abs((bw * g1.conj()).sum(-1)) ** 2 / ((noise_w * q1).sum(-1) + s2)
    snr_e2 = ps * np.abs((bw * g2.conj()).sum(-1)) ** 2 / (
        pd * np.abs((bw * g3.conj()).sum(-1)) ** 2 + (noise_w * q2).sum(-1) + s2)
    gamma1 = ps * abs(channels.h_s_eve) ** 2 / (pd * abs(channels.h_d_eve) ** 2 + s2)
    gap = 0.5 * (np.log2(1.0 + snr_d) - np.log2(1.0 + gamma1 + snr_e2))
    return np.maximum(gap, 0.0)


def saf_beamformer(params: SystemParams, channels: ChannelSet, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    return np.sqrt(_gain_sq(params.efficiency, rho, received_power(params, channels), params.noise_power)).astype(complex)


def saf_search(params: SystemParams, channels: ChannelSet, cfg: SafConfig = SafConfig()) -> tuple[np.ndarray, float]:
    """Grid search over power-splitting ratios; ties go to the lexicographically smallest ratio."""
    grid = cfg.grid()
    n = channels.relay_count
    if cfg.search_mode == "full-grid" and n <= 2:
        pts = np.array(list(itertools.product(grid, repeat=n)))
        vals = saf_rates(params, channels, pts)
        k = int(np.argmax(vals))
        return pts[k].copy(), float(vals[k])

    rho = np.full(n, grid[0])
    best = float(saf_rates(params, channels, rho))
    for _ in range(cfg.max_cycles):
        improved = False
        for i in range(n):
            cand = np.repeat(rho[None, :], len(grid), axis=0)
            cand[:, i] = grid
            vals = saf_rates(params, channels, cand)
            k = int(np.argmax(vals))
            if vals[k] > best:
                best = float(vals[k])
                rho = cand[k].copy()
                improved = True
        if not improved:
            break
    return rho, best
