"""Command-line front end.

Subcommands:

* ``run``       execute a built-in or file-defined scenario, write CSV + manifest
* ``list``      print the built-in scenario names
* ``analytic``  evaluate one closed-form law at given parameters
* ``validate``  check a scenario file against every config invariant

Exit codes: 0 success, 2 config/validation failure, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

from . import analytic
from .channel import PowerDelayProfile
from .core import ConfigError, Geometry, SystemConfig, db_to_linear
from .experiment import Comparator, Scenario, run_scenario, write_outputs
from .scenarios import BUILTIN_SCENARIOS, get_scenario

# Friendly aliases accepted by --set and scenario files.
KEY_ALIASES = {
    "K": "n_users", "N": "n_irs_elements", "Q": "n_pilots", "L": "n_taps",
    "M": "n_subcarriers", "tau": "pf_window_tau", "zeta": "pilot_fraction_zeta",
    "alpha": "gm_alpha", "seed": "master_seed", "nu": "pdp_decay_nu",
    "theta_a": "theta_a_deg", "P_dbm": "tx_power_dbm",
}

CONFIG_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}
GEOMETRY_FIELDS = {f.name for f in dataclasses.fields(Geometry)}

LAWS = ("theorem1", "theorem2", "theorem3", "theorem4")


def _coerce(value: str):
    if isinstance(value, (int, float, bool, list)):
        return value
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    if value.lower() in ("none", "null"):
        return None
    return value


def parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not of the form key=value")
        key, value = pair.split("=", 1)
        key = KEY_ALIASES.get(key, key)
        out[key] = _coerce(value)
    return out


def split_overrides(overrides: dict) -> tuple[dict, dict]:
    cfg_kw, geo_kw = {}, {}
    for key, value in overrides.items():
        if key in CONFIG_FIELDS:
            cfg_kw[key] = value
        elif key in GEOMETRY_FIELDS:
            geo_kw[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return cfg_kw, geo_kw


def load_scenario_file(path: str) -> tuple[SystemConfig, Geometry]:
    """Flat JSON key/value document onto SystemConfig + Geometry."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: top level must be a flat object")
    flat = {KEY_ALIASES.get(k, k): _coerce(v) for k, v in raw.items()}
    cfg_kw, geo_kw = split_overrides(flat)
    for key in ("bs_position", "irs_position", "region_corner_a", "region_corner_b"):
        if key in geo_kw:
            geo_kw[key] = tuple(geo_kw[key])
    return SystemConfig(**cfg_kw), Geometry(**geo_kw)


def scenario_from_config(name: str, cfg: SystemConfig, geo: Geometry) -> Scenario:
    """Single-point scenario running the configured scheme."""
    if cfg.scheme == "Beamforming":
        comp = Comparator("bf_fair_share", "bf_fair_share")
    else:
        comp = Comparator(cfg.scheme.lower(), "simulated", scheme=cfg.scheme)
    return Scenario(name, "K", (cfg.n_users,), (comp,), cfg, geo)


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("IRS_OPSIM_THREADS")
    return int(env) if env else 1


def cmd_run(args) -> int:
    overrides = parse_overrides(args.set)
    cfg_kw, geo_kw = split_overrides(overrides)
    if args.scenario:
        scenario = get_scenario(args.scenario)
        if cfg_kw:
            scenario.config = scenario.config.with_overrides(**cfg_kw)
        if geo_kw:
            scenario.geometry = dataclasses.replace(scenario.geometry, **geo_kw)
    elif args.config:
        cfg, geo = load_scenario_file(args.config)
        if cfg_kw:
            cfg = cfg.with_overrides(**cfg_kw)
        if geo_kw:
            geo = dataclasses.replace(geo, **geo_kw)
        name = os.path.splitext(os.path.basename(args.config))[0]
        scenario = scenario_from_config(name, cfg, geo)
    else:
        raise ConfigError("run needs --scenario NAME or --config FILE")
    if args.seed is not None:
        scenario.config = scenario.config.with_overrides(master_seed=args.seed)
    scenario.validate()

    t0 = time.perf_counter()
    table = run_scenario(scenario, n_trials=args.trials,
                         threads=_resolve_threads(args))
    wall = time.perf_counter() - t0
    assumptions = {}
    if scenario.config.equal_path_loss:
        assumptions["equal_path_loss_beta"] = "region mean gain"
    csv_path, manifest_path = write_outputs(table, scenario, args.out, wall,
                                            assumptions)
    print(f"wrote {csv_path}")
    print(f"wrote {manifest_path}")
    if args.plot:
        try:
            from irs_plotkit.render import render_csv
        except ImportError:
            print("plotting requested but irs-plotkit is not installed",
                  file=sys.stderr)
            return 3
        image = render_csv(csv_path, os.path.join(
            args.out, f"{scenario.name}.png"))
        print(f"wrote {image}")
    return 0


def cmd_list(_args) -> int:
    for name in sorted(BUILTIN_SCENARIOS):
        print(name)
    return 0


def cmd_analytic(args) -> int:
    p = parse_overrides(args.set)
    k = int(p.get("n_users", 1000))
    n = int(p.get("n_irs_elements", 8))
    m = int(p.get("n_subcarriers", 1024))
    zeta = float(p.get("pilot_fraction_zeta", 0.01))
    q = p.get("n_pilots", 1)
    snr_db = float(p.get("snr_db", 4.3))
    snr = db_to_linear(snr_db)
    if args.law == "theorem1":
        if q == "star":
            _, q = analytic.optimal_q(k, n, zeta, snr)
        value = analytic.rate_theorem1(snr, n, k, int(q), zeta)
    elif args.law == "theorem2":
        value = analytic.rate_theorem2(snr, n, k)
    elif args.law == "theorem3":
        pdp = PowerDelayProfile.exponential(int(p.get("n_taps", 25)),
                                            float(p.get("pdp_decay_nu", 1.0)))
        pair = analytic.rate_theorem3(m * snr, n, k, pdp, m)
        print(f"{pair.exact:.6f}")
        print(f"approx {pair.approx:.6f}")
        return 0
    else:  # theorem4; snr_db is the per-subcarrier reference SNR
        value = analytic.rate_theorem4(m * snr, n, k, m)
    print(f"{value:.6f}")
    return 0


def cmd_validate(args) -> int:
    cfg, geo = load_scenario_file(args.config_path)
    cfg.validate(geo)
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs-opsim",
        description="IRS-assisted opportunistic scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write CSV + manifest")
    run_p.add_argument("--scenario", help="built-in scenario name (see `list`)")
    run_p.add_argument("--config", help="flat JSON scenario file")
    run_p.add_argument("--set", action="append", nargs="+", metavar="KEY=VALUE",
                       help="config override, repeatable")
    run_p.add_argument("--seed", type=int, help="master seed override")
    run_p.add_argument("--out", default=".", help="output directory")
    run_p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    run_p.add_argument("--threads", type=int,
                       help="worker processes (or IRS_OPSIM_THREADS)")
    run_p.add_argument("--plot", action="store_true",
                       help="render the CSV with irs-plotkit when installed")
    run_p.set_defaults(func=cmd_run)

    list_p = sub.add_parser("list", help="print built-in scenario names")
    list_p.set_defaults(func=cmd_list)

    ana_p = sub.add_parser("analytic", help="evaluate a closed-form law")
    ana_p.add_argument("--law", required=True, choices=LAWS)
    ana_p.add_argument("--set", action="append", nargs="+", metavar="KEY=VALUE")
    ana_p.set_defaults(func=cmd_analytic)

    val_p = sub.add_parser("validate", help="validate a scenario file")
    val_p.add_argument("config_path")
    val_p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "set", None):
        args.set = [item for group in args.set for item in group]
    try:
        return args.func(args)
    except (ConfigError, KeyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - runtime failures map to exit 3
        print(f"runtime error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
