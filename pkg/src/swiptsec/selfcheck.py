"""Fast property suite run by ``swiptsec selfcheck``."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import checks
from .baseline import SafConfig, saf_beamformer, saf_search
from .model import (
    NetworkGeometry,
    SystemParams,
    dbm_to_watts,
    destination_sinr,
    draw_channels,
    first_hop_eve_sinr,
    harvested_power,
    relay_tx_power,
    second_hop_eve_sinr,
)
from .optimizer import grad_blocks, reported_secrecy_rate, solve_pa


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_gradient(seed=0, instances=20, tol=1e-5, perturb=0.0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for j in range(instances):
        params, ch, sol, lam = checks.random_instance(rng, 1 + j % 3)
        analytic = grad_blocks(params, ch, sol, lam).as_real_vector() + perturb
        worst = max(worst, float(checks.gradient_rel_errors(analytic, checks.fd_gradient(params, ch, sol, lam)).max()))
    return worst <= tol, f"max rel err {worst:.2e} (limit {tol:g})"


def check_equivalence(seed=1, instances=20, tol=1e-10) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for j in range(instances):
        params, ch, sol, _ = checks.random_instance(rng, 1 + j % 5)
        ref = checks.scalar_sinrs(params, ch, sol.w, sol.rho)
        got = (destination_sinr(params, ch, sol.w, sol.rho), first_hop_eve_sinr(params, ch),
               second_hop_eve_sinr(params, ch, sol.w, sol.rho))
        worst = max(worst, max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(got, ref)))
    return worst <= tol, f"max rel err {worst:.2e} (limit {tol:g})"


def check_single_relay_oracle(seeds=range(5), ratio=0.95) -> tuple[bool, str]:
    params = SystemParams(dbm_to_watts(40.0), dbm_to_watts(40.0), dbm_to_watts(-40.0), 0.5, 1)
    geo = NetworkGeometry.default(1)
    worst = np.inf
    for s in seeds:
        ch = draw_channels(geo, s)
        sol, _ = solve_pa(params, ch)
        best = checks.single_relay_grid_optimum(params, ch)[0]
        got = reported_secrecy_rate(params, ch, sol)
        worst = min(worst, got / best if best > 0 else (1.0 if got >= 0 else 0.0))
    return worst >= ratio, f"worst PA/grid ratio {worst:.4f} (limit {ratio:g})"


def check_saf_power_balance(seed=2, pairs=200, tol=1e-12) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        params, ch, _, _ = checks.random_instance(rng, 1)
        rho = rng.uniform(0.0, 0.99)
        theta = saf_beamformer(params, ch, [rho])[0]
        tx = relay_tx_power(params, ch, 0, theta, rho)
        eh = harvested_power(params, ch, 0, rho)
        worst = max(worst, abs(tx - eh) / eh if eh > 0 else abs(tx))
    return worst <= tol, f"max rel err {worst:.2e} (limit {tol:g})"


def run_selfcheck(perturb_gradient: float = 0.0, out=print) -> list[CheckResult]:
    """Run every check, print one status line each, and return the results.

    ``perturb_gradient`` is added to every analytic partial before the
    finite-difference comparison; it exists to prove the check can fail.
    """
    suite = [
        ("gradient-vs-finite-difference", lambda: check_gradient(perturb=perturb_gradient)),
        ("matrix-vs-scalar-sinr", check_equivalence),
        ("single-relay-grid-oracle", check_single_relay_oracle),
        ("saf-power-balance", check_saf_power_balance),
    ]
    results = []
    for name, fn in suite:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not an aborted suite
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        res = CheckResult(name, bool(ok), detail, time.perf_counter() - t0)
        results.append(res)
        out(f"{'PASS' if res.passed else 'FAIL'}  {name}: {detail} [{res.seconds:.1f}s]")
    return results
