"""Monte-Carlo experiment driver: trials, sweeps, aggregation, CSV output.

Each trial draws a fresh user/eavesdropper layout from a per-trial generator
seeded by (master seed, sweep-point index, trial index), so results are
reproducible and independent of execution order.  Trials are independent
work units and can fan out to worker processes; aggregation sorts records
before reducing, keeping the output byte-identical across job counts.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from .antenna_selection import solve_algorithm3, solve_algorithm4
from .cell_division import solve_algorithm2
from .channel import generate_layout
from .config import MRT, ZF, SystemConfig
from .power_alloc import equal_power_baseline, solve_algorithm1

CSV_HEADER = (
    "x_variable,x_value,algorithm,scheme,mean_ee_sec_bps_hz_per_w,"
    "std_ee_sec,convergence_rate,mean_iters,mean_m_active"
)


class SweepInterrupted(RuntimeError):
    """Carries the aggregate rows of the cells completed before interruption."""

    def __init__(self, rows):
        super().__init__("sweep interrupted")
        self.rows = rows


ANTENNA_COUNT = "antenna_count"
MAX_POWER = "max_power"

ALGORITHMS = ("equal", "alg1", "alg2", "alg3", "alg4")


@dataclass(frozen=True)
class SweepSpec:
    variable: str                  # ANTENNA_COUNT or MAX_POWER
    values: tuple
    algorithms: tuple = ALGORITHMS
    schemes: tuple = (MRT, ZF)
    trials: int = 1000
    base: SystemConfig = field(default_factory=SystemConfig)
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.variable not in (ANTENNA_COUNT, MAX_POWER):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if not self.values or list(self.values) != sorted(set(self.values)):
            raise ValueError("sweep values must be non-empty and strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        bad = set(self.schemes) - {MRT, ZF}
        if bad:
            raise ValueError(f"unknown schemes: {sorted(bad)}")


@dataclass(frozen=True)
class TrialRecord:
    value_index: int
    x_value: float
    algorithm: str
    scheme: str
    trial: int
    ee_sec: float
    converged: bool
    iters: int
    m_active: int
    error: str = ""


@dataclass(frozen=True)
class SweepRow:
    x_variable: str
    x_value: float
    algorithm: str
    scheme: str
    mean_ee_sec: float
    std_ee_sec: float
    convergence_rate: float
    mean_iters: float
    mean_m_active: float


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    master_seed: int
    rows: tuple
    trial_records: tuple = ()


def _apply_value(cfg: SystemConfig, variable: str, value) -> SystemConfig:
    if variable == ANTENNA_COUNT:
        return replace(cfg, M=int(value))
    return replace(cfg, P_max=float(value))


def _solve_one(cfg: SystemConfig, layout, algorithm: str, scheme: str):
    if algorithm == "equal":
        return equal_power_baseline(cfg, scheme)
    if algorithm == "alg1":
        return solve_algorithm1(cfg, scheme)
    if algorithm == "alg2":
        return solve_algorithm2(cfg, layout, scheme)
    if algorithm == "alg3":
        return solve_algorithm3(cfg, scheme)
    if algorithm == "alg4":
        return solve_algorithm4(cfg, layout, scheme)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _run_trial(args) -> list:
    """All (algorithm, scheme) solves for one (sweep point, trial) cell."""
    spec, master_seed, value_index, trial = args
    value = spec.values[value_index]
    cfg_x = _apply_value(spec.base, spec.variable, value)
    rng = np.random.default_rng([master_seed, value_index, trial])
    layout = generate_layout(cfg_x, rng)
    cfg_t = replace(cfg_x, zeta_e=layout.zeta_e)

    records = []
    for algorithm in spec.algorithms:
        for scheme in spec.schemes:
            try:
                sol = _solve_one(cfg_t, layout, algorithm, scheme)
                records.append(
                    TrialRecord(
                        value_index=value_index,
                        x_value=float(value),
                        algorithm=algorithm,
                        scheme=scheme,
                        trial=trial,
                        ee_sec=sol.report.ee_sec,
                        converged=sol.converged,
                        iters=len(sol.trace),
                        m_active=sol.m_active,
                    )
                )
            except Exception as exc:  # recorded failure, not fatal
                records.append(
                    TrialRecord(
                        value_index=value_index,
                        x_value=float(value),
                        algorithm=algorithm,
                        scheme=scheme,
                        trial=trial,
                        ee_sec=math.nan,
                        converged=False,
                        iters=0,
                        m_active=0,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )
    return records


def _aggregate(spec: SweepSpec, records) -> tuple:
    """Reduce trial records to one row per (value, algorithm, scheme)."""
    ordered = sorted(
        records, key=lambda r: (r.value_index, r.algorithm, r.scheme, r.trial)
    )
    rows = []
    for vi, value in enumerate(spec.values):
        for algorithm in spec.algorithms:
            for scheme in spec.schemes:
                cell = [
                    r
                    for r in ordered
                    if r.value_index == vi and r.algorithm == algorithm and r.scheme == scheme
                ]
                ok = [r for r in cell if not r.error]
                ees = np.array([r.ee_sec for r in ok], dtype=float)
                n_conv = sum(1 for r in cell if r.converged and not r.error)
                rows.append(
                    SweepRow(
                        x_variable=spec.variable,
                        x_value=float(value),
                        algorithm=algorithm,
                        scheme=scheme,
                        mean_ee_sec=float(np.mean(ees)) if len(ees) else math.nan,
                        std_ee_sec=float(np.std(ees)) if len(ees) else math.nan,
                        convergence_rate=n_conv / len(cell) if cell else math.nan,
                        mean_iters=float(np.mean([r.iters for r in ok])) if ok else math.nan,
                        mean_m_active=float(np.mean([r.m_active for r in ok])) if ok else math.nan,
                    )
                )
    return tuple(rows)


def run_sweep(
    spec: SweepSpec,
    master_seed: int | None = None,
    jobs: int = 1,
    keep_trials: bool = False,
) -> SweepResult:
    """Execute the sweep and aggregate per-point statistics.

    Per-trial errors are recorded and excluded from the means; they count
    against the convergence rate.  Results depend only on (spec, master_seed).
    """
    seed = spec.base.seed if master_seed is None else master_seed
    tasks = [
        (spec, seed, vi, t)
        for vi in range(len(spec.values))
        for t in range(spec.trials)
    ]
    records: list = []
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for batch in pool.map(_run_trial, tasks, chunksize=8):
                    records.extend(batch)
        else:
            for task in tasks:
                records.extend(_run_trial(task))
    except (KeyboardInterrupt, SystemExit) as exc:
        raise SweepInterrupted(_aggregate(spec, records)) from exc

    rows = _aggregate(spec, records)
    return SweepResult(
        spec=spec,
        master_seed=seed,
        rows=rows,
        trial_records=tuple(records) if keep_trials else (),
    )


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.x_variable,
                    _fmt(r.x_value),
                    r.algorithm,
                    r.scheme,
                    _fmt(r.mean_ee_sec),
                    _fmt(r.std_ee_sec),
                    _fmt(r.convergence_rate),
                    _fmt(r.mean_iters),
                    _fmt(r.mean_m_active),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def trials_to_csv(records) -> str:
    lines = ["x_value,algorithm,scheme,trial,ee_sec,converged,iters,m_active,error"]
    for r in sorted(records, key=lambda r: (r.value_index, r.algorithm, r.scheme, r.trial)):
        lines.append(
            ",".join(
                [
                    _fmt(r.x_value),
                    r.algorithm,
                    r.scheme,
                    str(r.trial),
                    _fmt(r.ee_sec),
                    str(int(r.converged)),
                    str(r.iters),
                    str(r.m_active),
                    r.error.replace(",", ";"),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_sweep(result: SweepResult, out_dir: str, stem: str | None = None) -> dict:
    """Write the aggregate CSV plus a JSON manifest (and per-trial dump if kept)."""
    os.makedirs(out_dir, exist_ok=True)
    stem = stem or result.spec.name
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    with open(csv_path, "w") as fh:
        fh.write(rows_to_csv(result.rows))
    paths = {"csv": csv_path}

    if result.trial_records:
        trial_path = os.path.join(out_dir, f"{stem}_trials.csv")
        with open(trial_path, "w") as fh:
            fh.write(trials_to_csv(result.trial_records))
        paths["trials"] = trial_path

    manifest = {
        "tool": "see-mimo",
        "version": "0.1.0",
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "master_seed": result.master_seed,
        "spec": {
            "name": result.spec.name,
            "variable": result.spec.variable,
            "values": list(result.spec.values),
            "algorithms": list(result.spec.algorithms),
            "schemes": list(result.spec.schemes),
            "trials": result.spec.trials,
        },
        "config": asdict(result.spec.base),
        "outputs": paths,
    }
    manifest_path = os.path.join(out_dir, f"{stem}_manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["manifest"] = manifest_path
    return paths


def builtin_figure_specs(base: SystemConfig | None = None, trials: int = 1000) -> dict:
    """Named sweep specifications matching the eight comparison figures."""
    cfg = base or SystemConfig()
    m_values = tuple(range(50, 301, 25))
    p_values = (0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0, 30.0, 40.0)

    def spec(name, variable, values, algorithms):
        return SweepSpec(
            variable=variable,
            values=values,
            algorithms=algorithms,
            schemes=(MRT, ZF),
            trials=trials,
            base=cfg,
            name=name,
        )

    return {
        "fig2": spec("fig2", ANTENNA_COUNT, m_values, ("equal", "alg1", "alg2")),
        "fig3": spec("fig3", MAX_POWER, p_values, ("equal", "alg1", "alg2")),
        "fig4": spec("fig4", ANTENNA_COUNT, m_values, ("alg1", "alg3")),
        "fig5": spec("fig5", MAX_POWER, p_values, ("equal", "alg1", "alg3")),
        "fig6": spec("fig6", MAX_POWER, p_values, ("alg2", "alg3")),
        "fig7": spec("fig7", ANTENNA_COUNT, m_values, ("alg2", "alg3")),
        "fig8": spec("fig8", ANTENNA_COUNT, m_values, ("alg2", "alg3", "alg4")),
        "fig9": spec("fig9", MAX_POWER, p_values, ("equal", "alg1", "alg2", "alg3", "alg4")),
    }
