"""Physical-layer model of a multi-relay SWIPT amplify-and-forward network.

All quantities are in linear units (watts, linear channel gains). One idle
relay acts as the eavesdropper; the destination jams with artificial noise
during the first hop and the active relays harvest energy from both the
source signal and the jamming signal.

Beamformers enter the quadratic forms as ``w^H M w``, so the destination
signal amplitude is ``sum_i conj(w_i) h_id h_si sqrt(1 - rho_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * np.log10(watts) + 30.0


@dataclass(frozen=True)
class SystemParams:
    """Transmit powers, shared noise power and harvester efficiency."""

    source_power: float
    an_power: float
    noise_power: float
    efficiency: float = 0.5
    relay_count: int = 1

    def __post_init__(self):
        if not self.source_power >= 0:
            raise ValueError(f"source_power must be >= 0, got {self.source_power}")
        if not self.an_power >= 0:
            raise ValueError(f"an_power must be >= 0, got {self.an_power}")
        if not self.noise_power > 0:
            raise ValueError(f"noise_power must be > 0, got {self.noise_power}")
        if not 0.0 < self.efficiency < 1.0:
            raise ValueError(f"efficiency must lie in (0,1), got {self.efficiency}")
        if int(self.relay_count) != self.relay_count or self.relay_count < 1:
            raise ValueError(f"relay_count must be a positive integer, got {self.relay_count}")


def _as_point(p) -> tuple[float, float]:
    x, y = (float(c) for c in p)
    return (x, y)


@dataclass(frozen=True)
class NetworkGeometry:
    """Node positions in meters."""

    source_pos: tuple[float, float]
    dest_pos: tuple[float, float]
    eve_pos: tuple[float, float]
    relay_pos: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "source_pos", _as_point(self.source_pos))
        object.__setattr__(self, "dest_pos", _as_point(self.dest_pos))
        object.__setattr__(self, "eve_pos", _as_point(self.eve_pos))
        object.__setattr__(self, "relay_pos", tuple(_as_point(p) for p in self.relay_pos))
        if not self.relay_pos:
            raise ValueError("geometry needs at least one relay")

    @property
    def relay_count(self) -> int:
        return len(self.relay_pos)

    @classmethod
    def default(cls, relay_count: int, source=(0.0, 0.0), dest=(10.0, 0.0), eve=(4.0, 1.5)):
        """Source and destination 10 m apart, relays spread on x=5 over y in [-1, 1]."""
        if relay_count < 1:
            raise ValueError(f"relay_count must be >= 1, got {relay_count}")
        if relay_count == 1:
            ys = [0.0]
        else:
            ys = np.linspace(-1.0, 1.0, relay_count).tolist()
        return cls(source, dest, eve, tuple((5.0, y) for y in ys))


@dataclass(frozen=True)
class ChannelSet:
    """Complex channel coefficients for one network realization."""

    h_s_relay: np.ndarray
    h_d_relay: np.ndarray
    h_relay_d: np.ndarray
    h_s_eve: complex
    h_d_eve: complex
    h_relay_eve: np.ndarray

    def __post_init__(self):
        vecs = {}
        for name in ("h_s_relay", "h_d_relay", "h_relay_d", "h_relay_eve"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=complex)).copy()
            v.setflags(write=False)
            object.__setattr__(self, name, v)
            vecs[name] = v
        object.__setattr__(self, "h_s_eve", complex(self.h_s_eve))
        object.__setattr__(self, "h_d_eve", complex(self.h_d_eve))
        lengths = {v.shape for v in vecs.values()}
        if len(lengths) != 1 or vecs["h_s_relay"].ndim != 1:
            raise ValueError(f"per-relay channel vectors must share one 1-D length, got {lengths}")
        scalars = np.array([self.h_s_eve, self.h_d_eve])
        if not all(np.all(np.isfinite(v)) for v in vecs.values()) or not np.all(np.isfinite(scalars)):
            raise ValueError("channel coefficients must be finite")

    @property
    def relay_count(self) -> int:
        return self.h_s_relay.shape[0]


@dataclass(frozen=True)
class Solution:
    """Relay beamformers ``w``, power-splitting ratios ``rho`` and slacks ``psi``."""

    w: np.ndarray
    rho: np.ndarray
    psi: np.ndarray = field(default=None)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=complex)).copy()
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float)).copy()
        psi = np.zeros(rho.shape) if self.psi is None else np.atleast_1d(np.asarray(self.psi, dtype=float)).copy()
        if not (w.shape == rho.shape == psi.shape) or w.ndim != 1:
            raise ValueError(f"w, rho, psi must have equal 1-D shapes, got {w.shape}, {rho.shape}, {psi.shape}")
        if np.any(rho < 0) or np.any(rho > 1):
            raise ValueError(f"rho must lie in [0,1], got {rho}")
        if np.any(psi < 0):
            raise ValueError(f"psi must be nonnegative, got {psi}")
        for name, arr in (("w", w), ("rho", rho), ("psi", psi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class QuadraticForms:
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    B_rho: np.ndarray


def _check_rho(rho_i: float):
    if not 0.0 <= rho_i <= 1.0:
        raise ValueError(f"power-splitting ratio must lie in [0,1], got {rho_i}")


def draw_channels(geometry: NetworkGeometry, rng_seed: int) -> ChannelSet:
    """Draw one Rayleigh realization with path loss ``d^-2`` on every link.

    Each coefficient is CN(0, d^-2). Links are drawn in a fixed order so a
    seed pins the whole set.
    """
    src = np.asarray(geometry.source_pos)
    dst = np.asarray(geometry.dest_pos)
    eve = np.asarray(geometry.eve_pos)
    relays = np.asarray(geometry.relay_pos)

    def dist(a, b):
        d = np.linalg.norm(np.atleast_2d(a) - np.atleast_2d(b), axis=-1)
        if np.any(d <= 0):
            raise ValueError(f"zero distance between nodes {a.tolist()} and {b.tolist()}: path loss undefined")
        return d

    d_sr = dist(src, relays)
    d_dr = dist(dst, relays)
    d_se = dist(src, eve)[0]
    d_de = dist(dst, eve)[0]
    d_re = dist(relays, eve)

    rng = np.random.default_rng(rng_seed)
    n = len(relays)

    def cn(scale_d, size):
        z = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
        return z / scale_d

    h_si = cn(d_sr, n)
    h_di = cn(d_dr, n)
    h_id = cn(d_dr, n)
    h_se = cn(d_se, 1)[0]
    h_de = cn(d_de, 1)[0]
    h_ie = cn(d_re, n)
    return ChannelSet(h_si, h_di, h_id, h_se, h_de, h_ie)


def received_power(params: SystemParams, channels: ChannelSet) -> np.ndarray:
    """Per-relay received signal-plus-jamming power, noise excluded."""
    return (params.source_power * np.abs(channels.h_s_relay) ** 2
            + params.an_power * np.abs(channels.h_d_relay) ** 2)


def harvested_power(params: SystemParams, channels: ChannelSet, relay_index: int, rho_i: float) -> float:
    _check_rho(rho_i)
    p = received_power(params, channels)[relay_index]
    return params.efficiency * rho_i * (p + params.noise_power)


def first_hop_eve_sinr(params: SystemParams, channels: ChannelSet) -> float:
    return (params.source_power * abs(channels.h_s_eve) ** 2
            / (params.an_power * abs(channels.h_d_eve) ** 2 + params.noise_power))


def assemble_quadratic_forms(params: SystemParams, channels: ChannelSet, rho) -> QuadraticForms:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > 1):
        raise ValueError(f"rho must lie in [0,1], got {rho}")
    s2 = params.noise_power
    g1 = channels.h_relay_d * channels.h_s_relay
    g2 = channels.h_relay_eve * channels.h_s_relay
    g3 = channels.h_relay_eve * channels.h_d_relay
    return QuadraticForms(
        G1=params.source_power * np.outer(g1, g1.conj()),
        G2=params.source_power * np.outer(g2, g2.conj()),
        G3=params.an_power * np.outer(g3, g3.conj()),
        Q1=np.diag(np.abs(channels.h_relay_d) ** 2 * s2),
        Q2=np.diag(np.abs(channels.h_relay_eve) ** 2 * s2),
        B_rho=np.diag(np.sqrt(1.0 - rho)),
    )


def _qf(w, M) -> float:
    return float(np.real(np.vdot(w, M @ w)))


def destination_sinr(params: SystemParams, channels: ChannelSet, w, rho) -> float:
    w = np.asarray(w, dtype=complex)
    qf = assemble_quadratic_forms(params, channels, rho)
    bw = qf.B_rho @ w
    num = _qf(bw, qf.G1)
    den = _qf(bw, qf.Q1) + _qf(w, qf.Q1) + params.noise_power
    return num / den


def second_hop_eve_sinr(params: SystemParams, channels: ChannelSet, w, rho) -> float:
    w = np.asarray(w, dtype=complex)
    qf = assemble_quadratic_forms(params, channels, rho)
    bw = qf.B_rho @ w
    num = _qf(bw, qf.G2)
    den = _qf(bw, qf.G3) + _qf(bw, qf.Q2) + _qf(w, qf.Q2) + params.noise_power
    return num / den


def rate_destination(params: SystemParams, channels: ChannelSet, w, rho) -> float:
    return float(np.log2(1.0 + destination_sinr(params, channels, w, rho)))


def rate_eavesdropper(params: SystemParams, channels: ChannelSet, w, rho) -> float:
    """Eavesdropper rate with MRC over both hops."""
    gamma = first_hop_eve_sinr(params, channels) + second_hop_eve_sinr(params, channels, w, rho)
    return float(np.log2(1.0 + gamma))


def secrecy_gap(params: SystemParams, channels: ChannelSet, w, rho) -> float:
    """Unclamped half rate difference ``(R_d - R_e) / 2``."""
    return 0.5 * (rate_destination(params, channels, w, rho) - rate_eavesdropper(params, channels, w, rho))


def secrecy_rate(params: SystemParams, channels: ChannelSet, w, rho) -> float:
    return max(0.0, secrecy_gap(params, channels, w, rho))


def relay_tx_power(params: SystemParams, channels: ChannelSet, relay_index: int, w_i: complex, rho_i: float) -> float:
    _check_rho(rho_i)
    p = received_power(params, channels)[relay_index]
    s2 = params.noise_power
    return abs(w_i) ** 2 * ((1.0 - rho_i) * p + (2.0 - rho_i) * s2)


def constraint_residuals(params: SystemParams, channels: ChannelSet, sol: Solution) -> np.ndarray:
    """``tx_i + psi_i - harvested_i`` for every relay; zero at feasible points."""
    n = channels.relay_count
    out = np.empty(n)
    for i in range(n):
        out[i] = (relay_tx_power(params, channels, i, sol.w[i], sol.rho[i]) + sol.psi[i]
                  - harvested_power(params, channels, i, sol.rho[i]))
    return out
