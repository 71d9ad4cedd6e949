"""Block-wise penalty function method for secrecy-rate maximization.

The power constraint of every relay becomes an equality with a nonnegative
slack ``psi_i`` and moves into the objective as a quadratic penalty.  For a
fixed penalty weight, Gauss-Seidel sweeps of projected gradient ascent run
over the blocks ``w_i``, then ``rho_i``, then ``psi_i``, each with Armijo
backtracking; then the weight grows geometrically.

The rate term is the unclamped ``(R_d - R_e) / 2``: the positive-part clamp
has zero slope wherever the eavesdropper wins and would freeze the ascent.
The clamp is applied only to reported secrecy rates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .model import ChannelSet, Solution, SystemParams, secrecy_rate


@dataclass(frozen=True)
class PenaltyConfig:
    lambda0: float = 35.0
    lambda_growth: float = 1.2
    tolerance: float = 1e-6
    max_outer_iters: int = 500
    armijo_init: float = 1.0
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    max_backtracks: int = 40
    rho_init: float = 0.1
    # sweeps per penalty weight; 1 gives a single sweep per weight
    max_inner_sweeps: int = 2000
    # scaled projected-gradient level that ends the sweeps at one weight
    inner_tolerance: float = 3e-4

    def __post_init__(self):
        checks = [
            (self.lambda0 > 0, "lambda0", "> 0"),
            (self.lambda_growth >= 1, "lambda_growth", ">= 1"),
            (self.tolerance > 0, "tolerance", "> 0"),
            (self.max_outer_iters >= 1, "max_outer_iters", ">= 1"),
            (0 < self.armijo_init <= 1, "armijo_init", "in (0,1]"),
            (0 < self.armijo_shrink < 1, "armijo_shrink", "in (0,1)"),
            (0 < self.armijo_slope < 1, "armijo_slope", "in (0,1)"),
            (self.max_backtracks >= 1, "max_backtracks", ">= 1"),
            (0 <= self.rho_init <= 1, "rho_init", "in [0,1]"),
            (self.max_inner_sweeps >= 1, "max_inner_sweeps", ">= 1"),
            (self.inner_tolerance > 0, "inner_tolerance", "> 0"),
        ]
        for ok, name, rule in checks:
            if not ok:
                raise ValueError(f"{name} must be {rule}, got {getattr(self, name)}")

    def armijo_array(self) -> np.ndarray:
        return np.array([self.armijo_init, self.armijo_shrink, self.armijo_slope, self.max_backtracks], dtype=float)


@dataclass
class SolveTrace:
    """Per-sweep history of one solve.

    Row ``s`` describes the iterate after sweep ``s``. ``lam`` identifies
    the penalty weight of each sweep; consecutive rows with equal ``lam``
    form one segment. ``block_objectives[s]`` holds the penalty objective
    before sweep ``s`` followed by its value after each of the 3N block
    updates.
    """

    objective: np.ndarray
    rate_term: np.ndarray
    residual_sq: np.ndarray
    lam: np.ndarray
    w: np.ndarray
    rho: np.ndarray
    psi: np.ndarray
    block_objectives: np.ndarray
    converged: bool = False
    best_index: int = -1

    def __len__(self):
        return len(self.objective)

    @property
    def secrecy_rates(self) -> np.ndarray:
        return np.maximum(self.rate_term, 0.0)

    def segments(self) -> list:
        """``(start, stop)`` row ranges sharing one penalty weight."""
        edges = np.flatnonzero(np.diff(self.lam) != 0) + 1
        bounds = np.concatenate([[0], edges, [len(self.lam)]])
        return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


@dataclass
class GradientBundle:
    """Partials of the penalty objective; ``w`` holds d/dRe + 1j*d/dIm."""

    w: np.ndarray
    rho: np.ndarray
    psi: np.ndarray

    def as_real_vector(self) -> np.ndarray:
        return np.concatenate([self.w.real, self.w.imag, self.rho, self.psi])


class PenaltyProblem:
    """Instance constants in the array layout the kernels expect."""

    def __init__(self, params: SystemParams, channels: ChannelSet):
        if channels.relay_count != params.relay_count:
            raise ValueError(f"channels carry {channels.relay_count} relays, params say {params.relay_count}")
        self.params = params
        self.n = channels.relay_count
        ps, pd, s2 = params.source_power, params.an_power, params.noise_power
        h_si, h_di = channels.h_s_relay, channels.h_d_relay
        h_id, h_ie = channels.h_relay_d, channels.h_relay_eve
        # w^H g g^H w = |sum_i conj(g_i) w_i|^2
        self.k = np.ascontiguousarray(np.conj(np.vstack([h_id * h_si, h_ie * h_si, h_ie * h_di])))
        self.q = np.vstack([np.abs(h_id) ** 2 * s2, np.abs(h_ie) ** 2 * s2])
        self.pn = ps * np.abs(h_si) ** 2 + pd * np.abs(h_di) ** 2 + s2
        gamma1 = ps * abs(channels.h_s_eve) ** 2 / (pd * abs(channels.h_d_eve) ** 2 + s2)
        self.sc = np.array([ps, pd, s2, params.efficiency, gamma1])

    @property
    def consts(self):
        return self.k, self.q, self.pn, self.sc

    def objective(self, w, rho, psi, lam) -> float:
        return K.objective(w, rho, psi, float(lam), *self.consts)

    def rate_term(self, w, rho) -> float:
        return K.rate_term(w, rho, *self.consts)

    def residual_sq(self, w, rho, psi) -> float:
        return K.residual_sq(w, rho, psi, self.pn, self.sc)

    def gradient(self, w, rho, psi, lam):
        return K.gradient(w, rho, psi, float(lam), *self.consts)

    def projected_grad_norm(self, w, rho, psi, lam) -> float:
        return K.projected_grad_norm(w, rho, psi, float(lam), *self.consts)


def _arrays(sol: Solution):
    return sol.w.astype(complex), sol.rho.astype(float), sol.psi.astype(float)


def penalty_objective(params: SystemParams, channels: ChannelSet, sol: Solution, lam: float) -> float:
    """Unclamped secrecy term minus ``lam`` times the summed squared residuals."""
    if lam < 0:
        raise ValueError(f"penalty weight must be >= 0, got {lam}")
    return PenaltyProblem(params, channels).objective(*_arrays(sol), lam)


def grad_blocks(params: SystemParams, channels: ChannelSet, sol: Solution, lam: float) -> GradientBundle:
    return GradientBundle(*PenaltyProblem(params, channels).gradient(*_arrays(sol), lam))


def kkt_residual(params: SystemParams, channels: ChannelSet, sol: Solution, lam: float) -> float:
    """Norm of the projected gradient of the penalty objective.

    Components pushing ``rho`` outside [0, 1] or ``psi`` below 0 at an active
    bound are dropped.
    """
    return PenaltyProblem(params, channels).projected_grad_norm(*_arrays(sol), lam)


def armijo_search(objective: Callable, x0, direction, slope: float, cfg: PenaltyConfig,
                  f0: Optional[float] = None, project: Optional[Callable] = None) -> float:
    """Largest ``armijo_init * armijo_shrink**m`` passing the sufficient-increase test.

    The test is ``f(x) - f0 >= armijo_slope * alpha * slope`` with
    ``x = project(x0 + alpha * direction)``. Returns 0.0 if nothing passes
    within ``max_backtracks`` reductions.
    """
    if f0 is None:
        f0 = objective(x0)
    alpha = cfg.armijo_init
    for _ in range(cfg.max_backtracks + 1):
        x = x0 + alpha * direction
        if project is not None:
            x = project(x)
        if objective(x) - f0 >= cfg.armijo_slope * alpha * slope:
            return alpha
        alpha *= cfg.armijo_shrink
    return 0.0


def block_sweep(params: SystemParams, channels: ChannelSet, sol: Solution, lam: float,
                cfg: PenaltyConfig = PenaltyConfig()) -> Solution:
    """One Gauss-Seidel pass; the objective never decreases across it."""
    prob = PenaltyProblem(params, channels)
    w, rho, psi = (a.copy() for a in _arrays(sol))
    f = prob.objective(w, rho, psi, lam)
    K.sweep(w, rho, psi, float(lam), f, cfg.armijo_array(), *prob.consts, np.empty(3 * prob.n),
            np.empty((prob.n + 1, 6), complex))
    return Solution(w, rho, psi)


def initial_solution(params: SystemParams, channels: ChannelSet, rho_init: float = 0.1) -> Solution:
    """Feasible start: half the SAF gain at ``rho_init``, co-phased toward the destination."""
    from .baseline import saf_beamformer

    n = channels.relay_count
    rho = np.full(n, float(rho_init))
    g1 = channels.h_relay_d * channels.h_s_relay
    w = 0.5 * saf_beamformer(params, channels, rho).real * np.exp(1j * np.angle(g1))
    prob = PenaltyProblem(params, channels)
    psi = np.array([max(0.0, -K.residual(i, w[i], rho[i], 0.0, prob.pn, prob.sc)) for i in range(n)])
    return Solution(w, rho, psi)


def solve_pa(params: SystemParams, channels: ChannelSet, cfg: PenaltyConfig = PenaltyConfig(),
             init: Optional[Solution] = None) -> tuple[Solution, SolveTrace]:
    """Maximize the secrecy rate with the block-wise penalty method.

    At each penalty weight, sweeps repeat until the projected gradient norm
    drops to ``inner_tolerance * (1 + |objective|)`` or ``max_inner_sweeps``
    is reached. The run stops once the squared relative changes of ``w``,
    ``rho`` and ``psi`` across the weight, and the summed squared residual,
    are all <= ``tolerance``; otherwise the weight grows by
    ``lambda_growth``. After stopping, sweeps continue at the final weight
    until no ratio moves by more than ``tolerance`` in one sweep. If ``max_outer_iters`` weights pass without
    stopping, the iterate with the smallest summed squared residual is
    returned and ``trace.converged`` is False.
    """
    prob = PenaltyProblem(params, channels)
    if init is None:
        init = initial_solution(params, channels, cfg.rho_init)
    w, rho, psi = (a.copy() for a in _arrays(init))
    n, m = prob.n, cfg.max_inner_sweeps
    acfg = cfg.armijo_array()
    chunks = []

    def segment(lam, step_tol):
        buf = dict(
            objective=np.empty(m), rate_term=np.empty(m), residual_sq=np.empty(m),
            w=np.empty((m, n), complex), rho=np.empty((m, n)), psi=np.empty((m, n)),
            block_objectives=np.empty((m, 3 * n + 1)),
        )
        done = K.run_segment(w, rho, psi, lam, acfg, m, cfg.inner_tolerance, step_tol, *prob.consts,
                             buf["objective"], buf["rate_term"], buf["residual_sq"],
                             buf["w"], buf["rho"], buf["psi"], buf["block_objectives"])
        chunk = {key: val[:done] for key, val in buf.items()}
        chunk["lam"] = np.full(done, lam)
        chunks.append(chunk)
        return chunk

    lam = cfg.lambda0
    converged = False
    for _ in range(cfg.max_outer_iters):
        start = (w.copy(), rho.copy(), psi.copy())
        chunk = segment(lam, np.inf)
        measures = (K._rel_change(w, start[0]), K._rel_change(rho, start[1]),
                    K._rel_change(psi, start[2]), chunk["residual_sq"][-1])
        if max(measures) <= cfg.tolerance:
            converged = True
            break
        lam *= cfg.lambda_growth
    if converged and len(chunks[-1]["rho"]) > 0:
        # settle the ratios at the final weight so successive sweeps agree to within the tolerance
        last = chunks[-1]["rho"]
        prev = last[-2] if len(last) > 1 else start[1]
        if np.abs(last[-1] - prev).max() > cfg.tolerance:
            segment(lam, cfg.tolerance)

    trace = SolveTrace(**{key: np.concatenate([c[key] for c in chunks]) for key in chunks[0]},
                       converged=converged)
    if converged:
        trace.best_index = len(trace) - 1
    else:
        # last occurrence of the smallest residual
        res = trace.residual_sq
        trace.best_index = len(res) - 1 - int(np.argmin(res[::-1]))
    b = trace.best_index
    return Solution(trace.w[b], trace.rho[b], trace.psi[b]), trace


def reported_secrecy_rate(params: SystemParams, channels: ChannelSet, sol: Solution) -> float:
    """Clamped secrecy rate of a solver output."""
    return secrecy_rate(params, channels, sol.w, sol.rho)
