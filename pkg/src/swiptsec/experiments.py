"""Monte Carlo sweeps comparing the penalty method (PA) with the SAF baseline."""
from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .baseline import SafConfig, saf_search
from .model import NetworkGeometry, SystemParams, dbm_to_watts, draw_channels
from .optimizer import PenaltyConfig, reported_secrecy_rate, solve_pa

SCENARIOS = ("snr-sweep", "an-sweep", "relay-sweep", "convergence")
METHODS = ("PA", "SAF")

DEFAULT_SWEEPS = {
    "snr-sweep": (10.0, 20.0, 30.0, 40.0, 50.0),
    "an-sweep": (30.0, 40.0),
    "relay-sweep": (1, 3, 5),
    "convergence": (5,),
}


def default_params(relay_count: int = 5) -> SystemParams:
    return SystemParams(
        source_power=dbm_to_watts(40.0),
        an_power=dbm_to_watts(40.0),
        noise_power=dbm_to_watts(-40.0),
        efficiency=0.5,
        relay_count=relay_count,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep.

    ``sweep_values`` are SNR_s in dB (source power over noise power) for
    ``snr-sweep``, AN power in dBm for ``an-sweep`` and relay counts for
    ``relay-sweep``. The convergence scenario runs one solve at
    ``params.relay_count`` relays with seed ``base_seed`` and ignores the
    sweep values.
    """

    scenario: str = "snr-sweep"
    sweep_values: tuple = DEFAULT_SWEEPS["snr-sweep"]
    realizations: int = 100
    base_seed: int = 0
    geometry: Optional[NetworkGeometry] = None
    params: SystemParams = field(default_factory=default_params)
    penalty_cfg: PenaltyConfig = field(default_factory=PenaltyConfig)
    saf_cfg: SafConfig = field(default_factory=SafConfig)
    methods: tuple = METHODS
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ValueError(f"realizations must be an integer >= 1, got {self.realizations}")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError(f"methods must not repeat, got {self.methods}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.scenario == "relay-sweep":
            bad = [v for v in self.sweep_values if int(v) != v or v < 1]
            if bad:
                raise ValueError(f"relay-sweep values must be positive integers, got {bad}")

    def geometry_for(self, relay_count: int) -> NetworkGeometry:
        """The configured geometry if it has ``relay_count`` relays, else the default layout
        around the configured source, destination and eavesdropper."""
        g = self.geometry
        if g is None:
            return NetworkGeometry.default(relay_count)
        if g.relay_count == relay_count:
            return g
        return NetworkGeometry.default(relay_count, g.source_pos, g.dest_pos, g.eve_pos)

    def point_params(self, value) -> SystemParams:
        p = self.params
        if self.scenario == "snr-sweep":
            return dataclasses.replace(p, source_power=p.noise_power * 10.0 ** (float(value) / 10.0))
        if self.scenario == "an-sweep":
            return dataclasses.replace(p, an_power=dbm_to_watts(float(value)))
        if self.scenario == "relay-sweep":
            return dataclasses.replace(p, relay_count=int(value))
        return p


@dataclass
class SweepPoint:
    sweep_value: float
    method: str
    rates: np.ndarray  # per-run reported rates, NaN where the solver did not converge
    failures: int

    @property
    def mean(self) -> float:
        ok = self.rates[~np.isnan(self.rates)]
        return float(np.mean(ok)) if ok.size else float("nan")

    @property
    def stderr(self) -> float:
        ok = self.rates[~np.isnan(self.rates)]
        if ok.size < 2:
            return float("nan")
        return float(np.std(ok, ddof=1) / np.sqrt(ok.size))


@dataclass
class ConvergenceTrace:
    rho: np.ndarray  # (sweeps, N)
    secrecy_rate: np.ndarray  # (sweeps,)
    lam: np.ndarray
    converged: bool


@dataclass
class SweepResult:
    scenario: str
    points: list = field(default_factory=list)
    convergence: Optional[ConvergenceTrace] = None

    def point(self, value, method) -> SweepPoint:
        for p in self.points:
            if p.sweep_value == value and p.method == method:
                return p
        raise KeyError((value, method))


def _one_run(cfg: ExperimentConfig, value, run: int) -> dict:
    params = cfg.point_params(value)
    channels = draw_channels(cfg.geometry_for(params.relay_count), cfg.base_seed + run)
    out = {}
    if "PA" in cfg.methods:
        sol, trace = solve_pa(params, channels, cfg.penalty_cfg)
        out["PA"] = reported_secrecy_rate(params, channels, sol) if trace.converged else float("nan")
    if "SAF" in cfg.methods:
        out["SAF"] = saf_search(params, channels, cfg.saf_cfg)[1]
    return out


def _run_task(args):
    return _one_run(*args)


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Average each method's reported secrecy rate over ``cfg.realizations`` channel draws.

    Run ``r`` uses seed ``base_seed + r`` at every sweep point. PA runs that
    do not converge are excluded from the mean and counted as failures.
    """
    if cfg.scenario == "convergence":
        return SweepResult(cfg.scenario, convergence=convergence_trace(cfg))

    tasks = [(cfg, v, r) for v in cfg.sweep_values for r in range(cfg.realizations)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            outs = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        outs = [_run_task(t) for t in tasks]

    result = SweepResult(cfg.scenario)
    for j, v in enumerate(cfg.sweep_values):
        block = outs[j * cfg.realizations:(j + 1) * cfg.realizations]
        for m in cfg.methods:
            rates = np.array([o[m] for o in block], dtype=float)
            result.points.append(SweepPoint(v, m, rates, int(np.isnan(rates).sum())))
    return result


def convergence_trace(cfg: ExperimentConfig) -> ConvergenceTrace:
    params = cfg.params
    channels = draw_channels(cfg.geometry_for(params.relay_count), cfg.base_seed)
    _, trace = solve_pa(params, channels, cfg.penalty_cfg)
    return ConvergenceTrace(trace.rho.copy(), trace.secrecy_rates.copy(), trace.lam.copy(), trace.converged)


def _fmt(x) -> str:
    return "%.12g" % x


def emit_csv(result: SweepResult, path, comments=()) -> None:
    """Write ``result`` as UTF-8 CSV, optionally preceded by ``# `` comment lines."""
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc
    with fh:
        for line in comments:
            fh.write(f"# {line}\n")
        out = csv.writer(fh, lineterminator="\n")
        if result.scenario == "convergence":
            out.writerow(["iteration", "relay_index", "rho", "secrecy_rate"])
            tr = result.convergence
            if tr is not None:
                for k in range(tr.rho.shape[0]):
                    for i in range(tr.rho.shape[1]):
                        out.writerow([k, i, _fmt(tr.rho[k, i]), _fmt(tr.secrecy_rate[k])])
        else:
            out.writerow(["sweep_value", "method", "mean_secrecy_rate_bits", "stderr", "failures"])
            for p in result.points:
                out.writerow([_fmt(p.sweep_value), p.method, _fmt(p.mean), _fmt(p.stderr), p.failures])


def read_csv(path) -> list[dict]:
    """Rows of an emitted CSV as dicts, skipping comment lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))
