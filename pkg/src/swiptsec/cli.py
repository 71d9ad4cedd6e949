"""Command-line front end: ``swiptsec {solve,sweep,selfcheck}``.

Configuration comes from defaults, then an optional file, then flags. The
file holds one ``section.key = value`` pair per line; ``#`` and ``;`` start
comments. Every key is also a flag, e.g. ``--params.an_power_dbm 30``.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import datetime
import os
import sys
from typing import Callable, NamedTuple, Optional, Sequence

from .baseline import SafConfig, saf_beamformer, saf_search
from .experiments import DEFAULT_SWEEPS, ExperimentConfig, emit_csv, run_sweep
from .model import NetworkGeometry, SystemParams, dbm_to_watts, draw_channels
from .optimizer import PenaltyConfig, reported_secrecy_rate, solve_pa

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFCHECK = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


def _point(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'x,y', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _points(text: str):
    text = text.strip()
    if not text or text.lower() == "default":
        return None
    return tuple(_point(p) for p in text.split(";") if p.strip())


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _words(text: str) -> tuple:
    return tuple(v for v in text.replace(",", " ").split())


class Key(NamedTuple):
    parse: Callable
    default: object
    help: str


def _penalty_keys():
    out = {}
    for f in dataclasses.fields(PenaltyConfig):
        kind = int if isinstance(f.default, int) and not isinstance(f.default, bool) else float
        out[f"penalty.{f.name}"] = Key(kind, f.default, "penalty method setting")
    return out


KEYS: dict = {
    "params.source_power_dbm": Key(float, 40.0, "source transmit power (dBm)"),
    "params.an_power_dbm": Key(float, 40.0, "artificial-noise power of the destination (dBm)"),
    "params.noise_power_dbm": Key(float, -40.0, "noise power at every node (dBm)"),
    "params.efficiency": Key(float, 0.5, "energy-harvesting efficiency, in (0,1)"),
    "params.relay_count": Key(int, 5, "number of active relays"),
    "geometry.source": Key(_point, (0.0, 0.0), "source position 'x,y' in meters"),
    "geometry.destination": Key(_point, (10.0, 0.0), "destination position"),
    "geometry.eavesdropper": Key(_point, (4.0, 1.5), "eavesdropper position"),
    "geometry.relays": Key(_points, None, "relay positions 'x,y; x,y; ...' or 'default'"),
    **_penalty_keys(),
    "saf.grid_step": Key(float, SafConfig.grid_step, "SAF grid spacing of rho"),
    "saf.search_mode": Key(str, SafConfig.search_mode, "full-grid or cyclic-coordinate"),
    "saf.max_cycles": Key(int, SafConfig.max_cycles, "coordinate-search cycles"),
    "experiment.scenario": Key(str, "snr-sweep", "snr-sweep, an-sweep, relay-sweep or convergence"),
    "experiment.sweep_values": Key(_floats, None, "sweep points; empty means the scenario default"),
    "experiment.realizations": Key(int, 100, "channel realizations per sweep point"),
    "experiment.base_seed": Key(int, 0, "seed of realization 0; run r uses base_seed + r"),
    "experiment.methods": Key(_words, ("PA", "SAF"), "subset of PA SAF"),
    "experiment.workers": Key(int, 1, "worker processes"),
}

ALIASES = {
    "--seed": "experiment.base_seed",
    "--scenario": "experiment.scenario",
    "--realizations": "experiment.realizations",
    "--relay-count": "params.relay_count",
}


def _parse_value(key: str, text):
    if not isinstance(text, str):
        return text
    try:
        return KEYS[key].parse(text.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}: {exc}") from exc


def read_config_file(path) -> dict:
    """Flat ``section.key = value`` pairs from ``path``; unknown keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_string("[top]\n" + fh.read(), source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if cp.sections() != ["top"]:
        raise ConfigError(f"malformed config file {path}: use dotted keys, not [sections]")
    raw = dict(cp["top"])
    unknown = sorted(k for k in raw if k not in KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s) in {path}: {', '.join(unknown)}")
    return {k: _parse_value(k, v) for k, v in raw.items()}


def resolve(values: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from flat key values layered over the defaults."""
    unknown = sorted(k for k in values if k not in KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    v = {k: key.default for k, key in KEYS.items()}
    v.update({k: _parse_value(k, x) for k, x in values.items()})

    def build(section, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{section}: {exc}") from exc

    params = build("params", lambda: SystemParams(
        source_power=dbm_to_watts(v["params.source_power_dbm"]),
        an_power=dbm_to_watts(v["params.an_power_dbm"]),
        noise_power=dbm_to_watts(v["params.noise_power_dbm"]),
        efficiency=v["params.efficiency"],
        relay_count=v["params.relay_count"],
    ))
    relays = v["geometry.relays"]
    if relays is not None and len(relays) != params.relay_count:
        raise ConfigError(f"geometry.relays lists {len(relays)} positions but params.relay_count is {params.relay_count}")

    def geometry():
        src, dst, eve = v["geometry.source"], v["geometry.destination"], v["geometry.eavesdropper"]
        if relays is None:
            return NetworkGeometry.default(params.relay_count, src, dst, eve)
        return NetworkGeometry(src, dst, eve, relays)

    geo = build("geometry", geometry)
    penalty = build("penalty", lambda: PenaltyConfig(**{
        f.name: v[f"penalty.{f.name}"] for f in dataclasses.fields(PenaltyConfig)}))
    saf = build("saf", lambda: SafConfig(v["saf.grid_step"], v["saf.search_mode"], v["saf.max_cycles"]))
    scenario = v["experiment.scenario"]
    sweep = v["experiment.sweep_values"]
    if sweep is None:
        sweep = DEFAULT_SWEEPS.get(scenario, (0.0,))
    if scenario == "relay-sweep":
        sweep = tuple(int(x) if float(x).is_integer() else x for x in sweep)
    return build("experiment", lambda: ExperimentConfig(
        scenario=scenario,
        sweep_values=sweep,
        realizations=v["experiment.realizations"],
        base_seed=v["experiment.base_seed"],
        geometry=geo,
        params=params,
        penalty_cfg=penalty,
        saf_cfg=saf,
        methods=v["experiment.methods"],
        workers=v["experiment.workers"],
    ))


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="FILE", help="config file of 'section.key = value' lines")
    g = p.add_argument_group("config keys (override the file)")
    for key, spec in KEYS.items():
        g.add_argument(f"--{key}", dest=key, metavar="VALUE", default=None, help=spec.help)
    for flag, key in ALIASES.items():
        g.add_argument(flag, dest=key, metavar="VALUE", default=None, help=f"same as --{key}")


def _overrides(ns: argparse.Namespace) -> dict:
    return {k: getattr(ns, k) for k in KEYS if getattr(ns, k, None) is not None}


def parse_config(args: Sequence[str] = (), config_path: Optional[str] = None) -> ExperimentConfig:
    """Resolve defaults, then ``config_path`` (or ``--config``), then flags in ``args``."""
    p = argparse.ArgumentParser(add_help=False)
    _add_config_flags(p)
    try:
        ns = p.parse_args(list(args))
    except SystemExit as exc:
        raise ConfigError(f"bad arguments: {' '.join(args)}") from exc
    return _resolve_ns(ns, config_path)


def _resolve_ns(ns, config_path=None) -> ExperimentConfig:
    values = {}
    path = ns.config or config_path
    if path:
        values.update(read_config_file(path))
    values.update(_overrides(ns))
    return resolve(values)


def describe(cfg: ExperimentConfig) -> list:
    """``key = value`` lines describing a resolved config in linear units."""
    p, g = cfg.params, cfg.geometry
    lines = [
        f"scenario = {cfg.scenario}",
        f"sweep_values = {' '.join(str(x) for x in cfg.sweep_values)}",
        f"realizations = {cfg.realizations}",
        f"base_seed = {cfg.base_seed}",
        f"methods = {' '.join(cfg.methods)}",
        f"source_power_w = {p.source_power!r}",
        f"an_power_w = {p.an_power!r}",
        f"noise_power_w = {p.noise_power!r}",
        f"efficiency = {p.efficiency!r}",
        f"relay_count = {p.relay_count}",
    ]
    if g is not None:
        lines += [f"source = {g.source_pos}", f"destination = {g.dest_pos}", f"eavesdropper = {g.eve_pos}",
                  f"relays = {list(g.relay_pos)}"]
    lines += [f"penalty.{k} = {v!r}" for k, v in dataclasses.asdict(cfg.penalty_cfg).items()]
    lines += [f"saf.{k} = {v!r}" for k, v in dataclasses.asdict(cfg.saf_cfg).items()]
    return lines


def _output_path(out: Optional[str], scenario: str, label: Optional[str]) -> str:
    if label is None:
        label = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
    name = f"{scenario}-{label}.csv"
    if out is None:
        return name
    if os.path.isdir(out):
        return os.path.join(out, name)
    return out


def _cmd_solve(cfg: ExperimentConfig, args) -> int:
    params = cfg.params
    channels = draw_channels(cfg.geometry_for(params.relay_count), cfg.base_seed)
    print(f"seed {cfg.base_seed}, {params.relay_count} relay(s)")
    if "PA" in cfg.methods:
        sol, trace = solve_pa(params, channels, cfg.penalty_cfg)
        rate = reported_secrecy_rate(params, channels, sol)
        status = "converged" if trace.converged else "NOT converged"
        print(f"PA  secrecy rate {rate:.6f} bit/s/Hz ({status}, {len(trace)} sweeps, "
              f"final penalty weight {trace.lam[-1]:.4g})")
        for i in range(params.relay_count):
            w = sol.w[i]
            print(f"    relay {i}: rho {sol.rho[i]:.6f}  w {w.real:+.6e}{w.imag:+.6e}j  psi {sol.psi[i]:.3e}")
    if "SAF" in cfg.methods:
        rho, rate = saf_search(params, channels, cfg.saf_cfg)
        theta = saf_beamformer(params, channels, rho).real
        print(f"SAF secrecy rate {rate:.6f} bit/s/Hz")
        for i in range(params.relay_count):
            print(f"    relay {i}: rho {rho[i]:.2f}  theta {theta[i]:.6e}")
    return EXIT_OK


def _cmd_sweep(cfg: ExperimentConfig, args) -> int:
    path = _output_path(args.out, cfg.scenario, args.label)
    result = run_sweep(cfg)
    emit_csv(result, path, comments=describe(cfg))
    if args.verbose:
        for p in result.points:
            print(f"{p.sweep_value:g} {p.method}: {p.mean:.6f} +- {p.stderr:.6f} (failures {p.failures})")
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swiptsec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("solve", "solve one channel realization (seed = experiment.base_seed)"),
                       ("sweep", "run a Monte Carlo sweep and write CSV")]:
        p = sub.add_parser(name, help=text, description=text)
        _add_config_flags(p)
        p.add_argument("-v", "--verbose", action="count", default=0)
        if name == "sweep":
            p.add_argument("--out", help="output CSV path or directory")
            p.add_argument("--label", help="file-name label used instead of a timestamp")
    p = sub.add_parser("selfcheck", help="run the fast property suite")
    p.add_argument("--perturb-gradient", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selfcheck":
        from .selfcheck import run_selfcheck

        results = run_selfcheck(perturb_gradient=args.perturb_gradient)
        return EXIT_OK if all(r.passed for r in results) else EXIT_SELFCHECK
    try:
        cfg = _resolve_ns(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return (_cmd_solve if args.command == "solve" else _cmd_sweep)(cfg, args)
    except (OSError, ValueError, ArithmeticError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
