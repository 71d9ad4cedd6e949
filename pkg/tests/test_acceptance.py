"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured value
against its threshold, then asserts. Run with ``pytest tests/test_acceptance.py``
or directly as a script.
"""
import dataclasses
import subprocess
import sys
import time

import numpy as np
import pytest

from swiptsec import (
    NetworkGeometry,
    SystemParams,
    constraint_residuals,
    dbm_to_watts,
    draw_channels,
    grad_blocks,
    harvested_power,
    kkt_residual,
    penalty_objective,
    relay_tx_power,
    saf_gain,
    secrecy_rate,
    solve_pa,
)
from swiptsec.checks import (
    fd_gradient,
    gradient_rel_errors,
    random_instance,
    scalar_sinrs,
    single_relay_grid_optimum,
)
from swiptsec.experiments import DEFAULT_SWEEPS, ExperimentConfig, default_params, run_sweep
from swiptsec.model import destination_sinr, first_hop_eve_sinr, second_hop_eve_sinr

pytestmark = pytest.mark.acceptance


# filled by report(); conftest prints these in the terminal summary
RESULTS: list = []


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def paper_params(n):
    return SystemParams(dbm_to_watts(40.0), dbm_to_watts(40.0), dbm_to_watts(-40.0), 0.5, n)


def test_01_gradient_oracle():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for j in range(200):
        p, ch, sol, lam = random_instance(rng, 1 + j % 3)
        analytic = grad_blocks(p, ch, sol, lam).as_real_vector()
        worst = max(worst, float(gradient_rel_errors(analytic, fd_gradient(p, ch, sol, lam)).max()))
    dt = time.perf_counter() - t0
    report(1, "gradient vs central differences", worst <= 1e-5 and dt <= 30,
           f"max rel err {worst:.2e} (<= 1e-5) over 200 instances in {dt:.1f}s (<= 30s)")


def test_02_matrix_scalar_equivalence():
    rng = np.random.default_rng(2025)
    worst = 0.0
    for j in range(100):
        p, ch, sol, _ = random_instance(rng, 1 + j % 6)
        ref = scalar_sinrs(p, ch, sol.w, sol.rho)
        got = (destination_sinr(p, ch, sol.w, sol.rho), first_hop_eve_sinr(p, ch),
               second_hop_eve_sinr(p, ch, sol.w, sol.rho))
        worst = max(worst, max(abs(a - b) / abs(b) for a, b in zip(got, ref)))
    report(2, "matrix forms vs scalar sums", worst <= 1e-10, f"max rel err {worst:.2e} (<= 1e-10) over 100 instances")


def test_03_monotone_and_feasible():
    p, geo = paper_params(5), NetworkGeometry.default(5)
    worst_drop, worst_res, converged = 0.0, 0.0, 0
    for seed in range(50):
        ch = draw_channels(geo, seed)
        sol, tr = solve_pa(p, ch)
        for a, b in tr.segments():
            # values before the first block and after every block update, in order
            seq = np.concatenate([tr.block_objectives[a, :1], tr.block_objectives[a:b, 1:].ravel()])
            worst_drop = max(worst_drop, float(-np.diff(seq).min(initial=0.0)))
        if tr.converged:
            converged += 1
            res = float(np.sum(constraint_residuals(p, ch, sol) ** 2))
            worst_res = max(worst_res, res)
    ok = worst_drop == 0.0 and worst_res <= 1e-6
    report(3, "block-update monotonicity and feasibility", ok,
           f"largest objective drop {worst_drop:.1e} (== 0); max residual^2 {worst_res:.2e} (<= 1e-6) "
           f"over {converged}/50 converged runs")


def test_04_single_relay_near_optimal():
    p, geo = paper_params(1), NetworkGeometry.default(1)
    t0 = time.perf_counter()
    ratios = []
    for seed in range(50):
        ch = draw_channels(geo, seed)
        sol, _ = solve_pa(p, ch)
        best = single_relay_grid_optimum(p, ch)[0]
        got = secrecy_rate(p, ch, sol.w, sol.rho)
        ratios.append(got / best if best > 0 else (1.0 if got >= 0 else 0.0))
    dt = time.perf_counter() - t0
    share = float(np.mean(np.array(ratios) >= 0.95))
    report(4, "N=1 PA vs 2-D grid optimum", share >= 0.9 and dt <= 120,
           f"{share:.0%} of 50 instances reach 0.95x (>= 90%), min ratio {min(ratios):.4f}, {dt:.1f}s (<= 120s)")


def test_05_snr_sweep_pa_beats_saf():
    t0 = time.perf_counter()
    res = run_sweep(ExperimentConfig(scenario="snr-sweep", sweep_values=DEFAULT_SWEEPS["snr-sweep"],
                                     realizations=100))
    dt = time.perf_counter() - t0
    pairs = [(v, res.point(v, "PA").mean, res.point(v, "SAF").mean) for v in DEFAULT_SWEEPS["snr-sweep"]]
    ok = all(pa >= saf for _, pa, saf in pairs) and dt <= 300
    detail = ", ".join(f"{v:g}dB PA {pa:.3f} / SAF {saf:.3f}" for v, pa, saf in pairs)
    report(5, "N=5 mean(PA) >= mean(SAF) at every SNR", ok, f"{detail}; {dt:.0f}s (<= 300s)")


def test_06_relay_and_jamming_trends():
    means = {}
    for pd in (30.0, 40.0):
        params = dataclasses.replace(default_params(), an_power=dbm_to_watts(pd))
        res = run_sweep(ExperimentConfig(scenario="relay-sweep", sweep_values=(1, 3, 5), realizations=100,
                                         params=params, methods=("PA",)))
        for n in (1, 3, 5):
            means[pd, n] = res.point(n, "PA").mean
    in_n = all(means[pd, 1] <= means[pd, 3] <= means[pd, 5] for pd in (30.0, 40.0))
    in_pd = all(means[30.0, n] <= means[40.0, n] for n in (1, 3, 5))
    detail = "; ".join(f"Pd={pd:g}dBm N=1,3,5: " + ", ".join(f"{means[pd, n]:.3f}" for n in (1, 3, 5))
                       for pd in (30.0, 40.0))
    report(6, "PA nondecreasing in N and in jamming power", in_n and in_pd, detail)


@pytest.fixture(scope="module")
def convergence_run():
    cfg = ExperimentConfig(scenario="convergence", params=paper_params(5))
    return cfg, run_sweep(cfg).convergence


def test_07a_ratio_traces_settle(convergence_run):
    cfg, tr = convergence_run
    steps = np.abs(np.diff(tr.rho, axis=0)).max(axis=1)
    cap = cfg.penalty_cfg.max_outer_iters * cfg.penalty_cfg.max_inner_sweeps
    ok = tr.converged and steps[-1] < 1e-6 and len(tr.rho) < cap
    report("7a", "N=5 ratio traces settle", ok,
           f"final max |rho step| {steps[-1]:.2e} (< 1e-6) after {len(tr.rho)} sweeps (cap {cap})")


def test_07b_rate_nondecreasing_within_weight(convergence_run):
    _, tr = convergence_run
    edges = np.flatnonzero(np.diff(tr.lam) != 0) + 1
    bounds = np.concatenate([[0], edges, [len(tr.lam)]])
    drops = [float(-np.diff(tr.secrecy_rate[a:b]).min(initial=0.0)) for a, b in zip(bounds[:-1], bounds[1:])]
    worst = max(drops)
    report("7b", "N=5 secrecy rate nondecreasing within each penalty weight", worst <= 0.0,
           f"largest drop {worst:.2e} bit/s/Hz (== 0) across {len(drops)} weights")


def test_08_saf_power_balance():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        p, ch, _, _ = random_instance(rng, 1)
        rho = float(rng.uniform(0.0, 1.0))
        theta = saf_gain(p, ch, 0, rho)
        eh = harvested_power(p, ch, 0, rho)
        worst = max(worst, abs(relay_tx_power(p, ch, 0, theta, rho) - eh) / eh)
    report(8, "SAF transmit power equals harvested power", worst <= 1e-12,
           f"max rel err {worst:.2e} (<= 1e-12) over 1000 pairs")


def test_09_kkt_residual():
    p, geo = paper_params(3), NetworkGeometry.default(3)
    scaled, seed = [], 0
    while len(scaled) < 20:
        ch = draw_channels(geo, seed)
        sol, tr = solve_pa(p, ch)
        seed += 1
        if not tr.converged:
            continue
        lam = tr.lam[-1]
        scaled.append(kkt_residual(p, ch, sol, lam) / (1 + abs(penalty_objective(p, ch, sol, lam))))
    worst = max(scaled)
    report(9, "scaled projected gradient at N=3 solutions", worst <= 1e-3,
           f"max {worst:.2e} (<= 1e-3) over 20 converged solves ({seed} tried)")


def test_10_byte_identical_csv(tmp_path):
    files = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        cmd = [sys.executable, "-m", "swiptsec.cli", "sweep", "--scenario", "relay-sweep",
               "--experiment.sweep_values", "1 2", "--realizations", "4", "--seed", "3", "--out", str(out)]
        subprocess.run(cmd, check=True, capture_output=True)
        files.append(out.read_bytes())
    report(10, "repeated sweep gives identical CSV bytes", files[0] == files[1] and len(files[0]) > 0,
           f"{len(files[0])} bytes, identical={files[0] == files[1]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
