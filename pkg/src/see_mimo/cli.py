"""Command-line front end: single solves and figure sweeps.

Configuration precedence: built-in defaults < JSON config file < the
SEE_MIMO_SEED environment variable (master seed only) < explicit flags.
Exit codes: 0 success, 2 invalid configuration or spec, 3 non-converged
solve under --strict, 130 interrupted (partial sweep results are flushed
with a .partial suffix).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, fields, replace

import numpy as np

from .antenna_selection import solve_algorithm3, solve_algorithm4
from .cell_division import solve_algorithm2
from .channel import generate_layout
from .config import ConfigError, SystemConfig, config_from_dict
from .harness import (
    SweepInterrupted,
    SweepSpec,
    builtin_figure_specs,
    rows_to_csv,
    run_sweep,
    write_sweep,
)
from .power_alloc import equal_power_baseline, solve_algorithm1

ALGORITHM_CHOICES = ("equal", "alg1", "alg2", "alg3", "alg4")


def _coerce(name: str, raw: str):
    ftypes = {f.name: f.type for f in fields(SystemConfig)}
    if name not in ftypes:
        raise ConfigError(f"unknown config key {name!r}")
    t = ftypes[name]
    if t == "int":
        return int(raw)
    if t == "float":
        return float(raw)
    if t == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean {name}={raw!r}")
    return raw


def _load_config(path: str | None, overrides: list, seed: int | None) -> SystemConfig:
    data: dict = {}
    if path is not None:
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(raw.pop("config", {}) if "config" in raw else raw)
    env_seed = os.environ.get("SEE_MIMO_SEED")
    if env_seed is not None:
        data["seed"] = int(env_seed)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        data[key] = _coerce(key, raw)
    if seed is not None:
        data["seed"] = seed
    return config_from_dict(data)


def _solve_dispatch(cfg: SystemConfig, layout, algorithm: str, scheme: str):
    if algorithm == "equal":
        return equal_power_baseline(cfg, scheme)
    if algorithm == "alg1":
        return solve_algorithm1(cfg, scheme)
    if algorithm == "alg2":
        return solve_algorithm2(cfg, layout, scheme)
    if algorithm == "alg3":
        return solve_algorithm3(cfg, scheme)
    return solve_algorithm4(cfg, layout, scheme)


def cmd_solve(args) -> int:
    try:
        cfg = _load_config(args.config, args.set or [], args.seed)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    rng = np.random.default_rng(cfg.seed)
    layout = generate_layout(cfg, rng)
    cfg_t = replace(cfg, zeta_e=layout.zeta_e)
    try:
        cfg_t.validate_scheme(args.scheme)
        sol = _solve_dispatch(cfg_t, layout, args.alg, args.scheme)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = {
        "algorithm": sol.algorithm,
        "scheme": sol.scheme,
        "converged": sol.converged,
        "iterations": len(sol.trace),
        "m_active": sol.m_active,
        "powers_w": list(sol.p),
        "sum_power_w": sum(sol.p),
        "multipliers": {"Psi": sol.dual.Psi, "Gamma": list(sol.dual.Gamma)},
        "rate_sec_bps_hz": list(sol.report.rate_sec),
        "ee_sec_bps_hz_per_w": sol.report.ee_sec,
        "flags": list(sol.flags),
        "seed": cfg.seed,
    }
    if sol.budget is not None:
        out["group_budget"] = {
            "Lambda": sol.budget.Lambda,
            "P1": sol.budget.P1,
            "P2": sol.budget.P2,
            "Psi1": sol.budget.Psi1,
            "Psi2": sol.budget.Psi2,
        }
    if sol.theta is not None:
        out["antenna_selection"] = {
            "theta_bps_per_w": sol.theta.theta,
            "m_active": sol.theta.M_active,
            "mu": sol.theta.mu,
        }
    print(json.dumps(out, indent=2, sort_keys=True))
    if args.strict and not sol.converged:
        return 3
    return 0


def _spec_from_file(path: str, base: SystemConfig, trials: int | None) -> SweepSpec:
    with open(path) as fh:
        raw = json.load(fh)
    cfg = config_from_dict({**asdict(base), **raw.get("config", {})})
    return SweepSpec(
        variable=raw["variable"],
        values=tuple(raw["values"]),
        algorithms=tuple(raw.get("algorithms", ALGORITHM_CHOICES)),
        schemes=tuple(raw.get("schemes", ("mrt", "zf"))),
        trials=trials or int(raw.get("trials", 1000)),
        base=cfg,
        name=raw.get("name", os.path.splitext(os.path.basename(path))[0]),
    )


def cmd_sweep(args) -> int:
    try:
        cfg = _load_config(args.config, args.set or [], args.seed)
        builtin = builtin_figure_specs(base=cfg, trials=args.trials or 1000)
        if args.target in builtin:
            spec = builtin[args.target]
        elif os.path.exists(args.target):
            spec = _spec_from_file(args.target, cfg, args.trials)
        else:
            print(
                f"error: {args.target!r} is neither a built-in figure "
                f"({', '.join(sorted(builtin))}) nor a spec file",
                file=sys.stderr,
            )
            return 2
    except (ConfigError, KeyError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: invalid sweep spec: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_sweep(
            spec, master_seed=cfg.seed, jobs=args.jobs, keep_trials=args.dump_trials
        )
    except SweepInterrupted as partial:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{spec.name}.csv.partial")
        with open(path, "w") as fh:
            fh.write(rows_to_csv(partial.rows))
        print(f"interrupted; partial results in {path}", file=sys.stderr)
        return 130

    paths = write_sweep(result, args.out)
    print(json.dumps({"written": paths}, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="see-mimo",
        description="Secrecy-aware energy-efficient massive MIMO power allocation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run one algorithm on one generated instance")
    ps.add_argument("--config", help="JSON config file")
    ps.add_argument("--alg", choices=ALGORITHM_CHOICES, default="alg1")
    ps.add_argument("--scheme", choices=("mrt", "zf"), default="mrt")
    ps.add_argument("--seed", type=int, help="override the RNG seed")
    ps.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override one config field (repeatable)")
    ps.add_argument("--strict", action="store_true",
                    help="exit 3 when the solver does not converge")
    ps.set_defaults(func=cmd_solve)

    pw = sub.add_parser("sweep", help="run a figure sweep and write CSV + manifest")
    pw.add_argument("target", help="built-in figure name (fig2..fig9) or spec JSON path")
    pw.add_argument("--out", default=".", help="output directory")
    pw.add_argument("--config", help="JSON config file with base parameters")
    pw.add_argument("--trials", type=int, help="override the trial count")
    pw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    pw.add_argument("--seed", type=int, help="override the master seed")
    pw.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override one config field (repeatable)")
    pw.add_argument("--dump-trials", action="store_true",
                    help="also write the per-trial records")
    pw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
