"""Two-group (central/edge) power allocation with a distance-weighted budget split.

The total budget is divided between the groups in proportion to their summed
BS distances; each group then gets its own budget multiplier in the dual
loop.  With both group multipliers equal, the per-user update collapses to
the single-budget form, so the plain solver is the degenerate case.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .channel import UserLayout
from .config import CENTRAL, SystemConfig
from .errors import EmptyGroup
from .power_alloc import (
    DualState,
    PowerSolution,
    _Grouping,
    _raw_update,
    _solve_dual_loop,
    solve_algorithm1,
)


@dataclass(frozen=True)
class GroupBudget:
    Lambda: float   # fraction of P_max assigned to the first (central) group
    P1: float       # central-group budget [W]
    P2: float       # edge-group budget [W]
    Psi1: float     # central-group budget multiplier
    Psi2: float     # edge-group budget multiplier


def group_indices(layout: UserLayout) -> tuple:
    """0 for central users, 1 for edge users."""
    return tuple(0 if g == CENTRAL else 1 for g in layout.group)


def compute_lambda(layout: UserLayout) -> float:
    """Distance-ratio budget share of the central group."""
    d_central = sum(di for di, g in zip(layout.d, layout.group) if g == CENTRAL)
    d_edge = sum(di for di, g in zip(layout.d, layout.group) if g != CENTRAL)
    if d_central == 0.0 or d_edge == 0.0:
        raise EmptyGroup("cell division needs at least one user in each group")
    return d_central / (d_central + d_edge)


def power_update_group(
    p: Sequence[float],
    dual: DualState,
    cfg: SystemConfig,
    k: int,
    group_multiplier: float,
    scheme: str = "mrt",
    cap: Optional[float] = None,
) -> float:
    """One per-user update with the group's own budget multiplier.

    Identical functional form to the single-budget updates; only the
    multiplier (and the clamp ceiling, the group budget) differ.
    """
    ceiling = cfg.P_max if cap is None else cap
    val = _raw_update(p, dual.Gamma, group_multiplier, dual.q, cfg, scheme, k)
    return min(max(val, 0.0), ceiling)


def solve_algorithm2(cfg: SystemConfig, layout: UserLayout, scheme: str) -> PowerSolution:
    """Cell-division power allocation; falls back to the plain solver when a
    group is empty."""
    try:
        lam = compute_lambda(layout)
    except EmptyGroup:
        sol = solve_algorithm1(cfg, scheme)
        return replace(
            sol,
            algorithm="alg2",
            flags=sol.flags + ("empty_group_fallback",),
        )
    grouping = _Grouping(group_indices(layout), lam, cfg)
    return _solve_dual_loop(cfg, scheme, grouping=grouping, algorithm="alg2")
