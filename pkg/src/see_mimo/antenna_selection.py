"""Antenna-count selection wrapped around the power-allocation loop.

The active antenna count trades rate against per-antenna circuit power.  A
Newton-style fractional iteration tracks the bandwidth-scaled efficiency
value; each pass re-selects the antenna count from a closed-form rule, then
runs the usual per-user power updates at that count.  The joint solver adds
the cell-division group budgets to the same loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .channel import UserLayout
from .config import MRT, SystemConfig
from .errors import EmptyGroup, NonPositiveTheta
from .power_alloc import LN2, PowerSolution, _Grouping, _solve_dual_loop
from .cell_division import compute_lambda, group_indices


@dataclass(frozen=True)
class ThetaState:
    theta: float      # current bandwidth-scaled efficiency [bits/s per W]
    M_active: int     # currently selected antenna count
    mu: float         # parametric surplus at (theta, M_active)


def m_opt_mrt(theta: float, cfg: SystemConfig) -> int:
    """Antenna count maximizing the MRT parametric objective at `theta`."""
    if theta <= 0.0:
        raise NonPositiveTheta("antenna rule needs theta > 0")
    raw = math.ceil(cfg.B / (theta * cfg.P_c * LN2))
    return min(max(raw, 3), cfg.M)


def m_opt_zf(theta: float, cfg: SystemConfig) -> int:
    """Antenna count maximizing the ZF parametric objective at `theta`."""
    if theta <= 0.0:
        raise NonPositiveTheta("antenna rule needs theta > 0")
    raw = math.ceil(cfg.B / (theta * cfg.P_c * LN2) + cfg.K)
    return min(max(raw, cfg.K + 1), cfg.M)


def solve_algorithm3(cfg: SystemConfig, scheme: str) -> PowerSolution:
    """Power allocation with antenna-count selection."""
    return _solve_dual_loop(cfg, scheme, select_antennas=True, algorithm="alg3")


def solve_algorithm4(cfg: SystemConfig, layout: UserLayout, scheme: str) -> PowerSolution:
    """Joint cell-division and antenna-selection solver; falls back to the
    selection-only solver when a group is empty."""
    try:
        lam = compute_lambda(layout)
    except EmptyGroup:
        sol = solve_algorithm3(cfg, scheme)
        return replace(
            sol,
            algorithm="alg4",
            flags=sol.flags + ("empty_group_fallback",),
        )
    grouping = _Grouping(group_indices(layout), lam, cfg)
    return _solve_dual_loop(
        cfg, scheme, grouping=grouping, select_antennas=True, algorithm="alg4"
    )
