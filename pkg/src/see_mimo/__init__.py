"""Secrecy-aware energy-efficient power allocation for massive MIMO downlinks."""

from .config import CENTRAL, EDGE, MRT, ZF, ConfigError, SystemConfig, config_from_dict
from .channel import (
    ChannelRealization,
    UserLayout,
    empirical_sinr,
    generate_channel,
    generate_layout,
    upsilon_analytic,
    upsilon_empirical,
)
from .metrics import RateReport, report, sinr_eva, sinr_mrt, sinr_zf
from .power_alloc import (
    DualState,
    PowerSolution,
    equal_power_baseline,
    power_update_mrt,
    power_update_zf,
    solve_algorithm1,
    stationarity_residual,
)
from .cell_division import GroupBudget, compute_lambda, power_update_group, solve_algorithm2
from .antenna_selection import ThetaState, m_opt_mrt, m_opt_zf, solve_algorithm3, solve_algorithm4
from .harness import SweepSpec, SweepResult, builtin_figure_specs, run_sweep

__version__ = "0.1.0"

__all__ = [
    "CENTRAL",
    "EDGE",
    "MRT",
    "ZF",
    "ChannelRealization",
    "ConfigError",
    "DualState",
    "GroupBudget",
    "PowerSolution",
    "RateReport",
    "SweepResult",
    "SweepSpec",
    "SystemConfig",
    "ThetaState",
    "UserLayout",
    "builtin_figure_specs",
    "compute_lambda",
    "config_from_dict",
    "empirical_sinr",
    "equal_power_baseline",
    "generate_channel",
    "generate_layout",
    "m_opt_mrt",
    "m_opt_zf",
    "power_update_group",
    "power_update_mrt",
    "power_update_zf",
    "report",
    "run_sweep",
    "sinr_eva",
    "sinr_mrt",
    "sinr_zf",
    "solve_algorithm1",
    "solve_algorithm2",
    "solve_algorithm3",
    "solve_algorithm4",
    "stationarity_residual",
    "upsilon_analytic",
    "upsilon_empirical",
]
