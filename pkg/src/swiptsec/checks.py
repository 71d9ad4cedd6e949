"""Independent reference computations used by the self-check and the tests.

Nothing here calls the compiled kernels: rates are rebuilt from per-relay
scalar sums, gradients from central differences of the matrix-form model,
and the single-relay optimum from a dense grid.
"""
from __future__ import annotations

import numpy as np

from .model import (
    ChannelSet,
    Solution,
    SystemParams,
    constraint_residuals,
    first_hop_eve_sinr,
    secrecy_gap,
)


def random_instance(rng: np.random.Generator, n: int):
    """Well-scaled random (params, channels, solution, lambda) for derivative checks."""
    params = SystemParams(
        source_power=rng.uniform(0.5, 2.0),
        an_power=rng.uniform(0.5, 2.0),
        noise_power=rng.uniform(0.05, 0.5),
        efficiency=rng.uniform(0.2, 0.8),
        relay_count=n,
    )

    def cn(size=None):
        return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)

    channels = ChannelSet(cn(n), cn(n), cn(n), cn(), cn(), cn(n))
    sol = Solution(cn(n), rng.uniform(0.05, 0.95, n), rng.uniform(0.0, 1.0, n))
    return params, channels, sol, rng.uniform(0.1, 5.0)


def scalar_sinrs(params: SystemParams, channels: ChannelSet, w, rho):
    """Destination SINR and both eavesdropper SINR terms from explicit per-relay sums.

    Relays apply ``conj(w_i)`` to their received signal, matching ``w^H M w``.
    """
    ps, pd, s2 = params.source_power, params.an_power, params.noise_power
    sig_d = sig_e = an_e = 0j
    noise_d = noise_e = 0.0
    for i in range(len(w)):
        amp = np.sqrt(1.0 - rho[i]) * np.conj(w[i])
        sig_d += amp * channels.h_relay_d[i] * channels.h_s_relay[i]
        sig_e += amp * channels.h_relay_eve[i] * channels.h_s_relay[i]
        an_e += amp * channels.h_relay_eve[i] * channels.h_d_relay[i]
        # amplified relay noise plus conversion noise
        noise_d += ((1.0 - rho[i]) + 1.0) * abs(channels.h_relay_d[i] * w[i]) ** 2 * s2
        noise_e += ((1.0 - rho[i]) + 1.0) * abs(channels.h_relay_eve[i] * w[i]) ** 2 * s2
    sinr_d = ps * abs(sig_d) ** 2 / (noise_d + s2)
    sinr_e1 = ps * abs(channels.h_s_eve) ** 2 / (pd * abs(channels.h_d_eve) ** 2 + s2)
    sinr_e2 = ps * abs(sig_e) ** 2 / (pd * abs(an_e) ** 2 + noise_e + s2)
    return sinr_d, sinr_e1, sinr_e2


def reference_penalty(params, channels, sol: Solution, lam: float) -> float:
    gap = secrecy_gap(params, channels, sol.w, sol.rho)
    return gap - lam * float(np.sum(constraint_residuals(params, channels, sol) ** 2))


def fd_gradient(params, channels, sol: Solution, lam: float, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences of the penalty objective, ordered (Re w, Im w, rho, psi)."""
    n = len(sol.w)
    x = np.concatenate([sol.w.real, sol.w.imag, sol.rho, sol.psi])

    def f(v):
        s = Solution(v[:n] + 1j * v[n:2 * n], v[2 * n:3 * n], v[3 * n:])
        return reference_penalty(params, channels, s, lam)

    g = np.empty_like(x)
    for j in range(x.size):
        h = rel_step * max(1.0, abs(x[j]))
        up, dn = x.copy(), x.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (f(up) - f(dn)) / (2.0 * h)
    return g


def gradient_rel_errors(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3) -> np.ndarray:
    """Per-partial relative error; the denominator never drops below ``floor * max|numeric|``."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor * np.max(np.abs(numeric)))
    return np.abs(analytic - numeric) / np.where(scale > 0, scale, 1.0)


def single_relay_grid_optimum(params: SystemParams, channels: ChannelSet, step: float = 0.01):
    """Best clamped secrecy rate over a (rho, power-fraction) grid for one relay.

    The relay spends fraction ``t`` of its harvested power; the phase of its
    beamformer does not matter with a single relay. Returns (rate, rho, t).
    """
    if channels.relay_count != 1:
        raise ValueError("grid oracle handles a single relay only")
    count = int(round(1.0 / step))
    rho, t = np.meshgrid(step * np.arange(1, count), step * np.arange(1, count + 1), indexing="ij")
    ps, pd, s2, eta = params.source_power, params.an_power, params.noise_power, params.efficiency
    h_si, h_di = channels.h_s_relay[0], channels.h_d_relay[0]
    h_id, h_ie = channels.h_relay_d[0], channels.h_relay_eve[0]
    p = ps * abs(h_si) ** 2 + pd * abs(h_di) ** 2
    harvested = eta * rho * (p + s2)
    w2 = t * harvested / ((1.0 - rho) * p + (2.0 - rho) * s2)
    sig = (1.0 - rho) * w2
    noise = (2.0 - rho) * w2
    snr_d = ps * abs(h_id * h_si) ** 2 * sig / (abs(h_id) ** 2 * s2 * noise + s2)
    snr_e2 = ps * abs(h_ie * h_si) ** 2 * sig / (pd * abs(h_ie * h_di) ** 2 * sig + abs(h_ie) ** 2 * s2 * noise + s2)
    gap = 0.5 * (np.log2(1.0 + snr_d) - np.log2(1.0 + first_hop_eve_sinr(params, channels) + snr_e2))
    rates = np.maximum(gap, 0.0)
    k = np.unravel_index(int(np.argmax(rates)), rates.shape)
    return float(rates[k]), float(rho[k]), float(t[k])
