"""Lagrange-dual power allocation (the base iterative scheme).

One shared loop drives all four solvers: per-user power updates, projected
multiplier steps for the power budget(s) and the QoS floors, and a
fractional-programming update of the efficiency value.  The stopping quantity
is the surplus

    sum_k rate_sec_k - q * (sum_k p_k + M * P_c)

evaluated with the efficiency value that produced the current powers; it
shrinks to zero at a fixed point.

The closed-form single-step updates (``power_update_mrt``/``power_update_zf``)
invert the per-user stationarity condition with the eavesdropper coupling
frozen at the previous iterate.  Iterating that inversion directly is
unstable (the frozen coupling makes interior fixed points repelling), so the
loop instead solves the same stationarity condition exactly in the scalar
power, coupling included -- a block-coordinate ascent with identical fixed
points.  Group-budget and antenna-count variants hook into the same loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .config import MRT, ZF, SystemConfig
from .errors import PerfectCsiUnsupported, UpdateSingular
from .metrics import RateReport, report

LN2 = math.log(2.0)

_SINGULAR_EPS = 1e-12
_GAMMA_BLOWUP = 1e3
# sweeps of unrestricted pattern search before updates turn basin-local
_LOCAL_PHASE_START = 100


@dataclass(frozen=True)
class DualState:
    Psi: float            # power-budget multiplier (first group's when split)
    Gamma: tuple          # per-user QoS multipliers
    q: float              # current secure-EE value [bits/s/Hz per W]
    iter: int             # iterations executed


@dataclass(frozen=True)
class PowerSolution:
    p: tuple              # per-user powers [W]
    dual: DualState
    report: RateReport
    converged: bool
    trace: tuple          # (iter, q, sum_p, surplus) per iteration
    scheme: str
    m_active: int         # antenna count the solution uses
    algorithm: str
    flags: tuple = ()
    budget: object = None  # GroupBudget for the cell-division solvers
    theta: object = None   # ThetaState for the antenna-selection solvers


def _own_pole(cfg: SystemConfig, scheme: str) -> float:
    """Pole offset of the own-rate derivative term: own(x) = w / ((x + pole) ln2).

    Returns inf when the term vanishes (perfect CSI under ZF, or the single
    perfect-CSI MRT user), which is the correct degenerate limit.
    """
    if scheme == MRT:
        coeff = cfg.K - cfg.delta**2
        return cfg.K / coeff if coeff > 0.0 else math.inf
    if cfg.delta >= 1.0:
        return math.inf
    ups = (cfg.M - cfg.K) / cfg.K
    a = ups * (1.0 - cfg.delta**2) / ((cfg.M - 1) * (cfg.M - 2))
    return 1.0 / a


def _s_term(p: Sequence[float], gamma: Sequence[float], zeta_e: float, k: int) -> float:
    """Marginal secrecy gain of user k's power through the other users' EVA terms."""
    total = sum(p)
    inv_ze = 1.0 / zeta_e
    s = 0.0
    for j in range(len(p)):
        if j != k:
            s += (1.0 + gamma[j]) / ((total - p[j] + inv_ze) * LN2)
    return s


def _raw_update(
    p: Sequence[float],
    gamma: Sequence[float],
    psi: float,
    q: float,
    cfg: SystemConfig,
    scheme: str,
    k: int,
) -> float:
    """Unclamped closed-form power value for user k (may be negative or huge)."""
    if scheme == ZF and cfg.delta >= 1.0:
        raise PerfectCsiUnsupported("closed-form ZF update undefined at delta = 1")
    if scheme == MRT and cfg.K - cfg.delta**2 <= 0.0:
        raise PerfectCsiUnsupported("closed-form MRT update undefined at K = 1, delta = 1")
    s_k = _s_term(p, gamma, cfg.zeta_e, k)
    bracket = s_k - q - psi
    if abs(bracket) < _SINGULAR_EPS:
        raise UpdateSingular(f"update denominator ~0 for user {k}")
    lead = (1.0 + gamma[k]) / (bracket * LN2)
    return lead - _own_pole(cfg, scheme)


def power_update_mrt(p: Sequence[float], dual: DualState, cfg: SystemConfig, k: int) -> float:
    """One closed-form MRT power step for user k, clamped to [0, P_max]."""
    val = _raw_update(p, dual.Gamma, dual.Psi, dual.q, cfg, MRT, k)
    return min(max(val, 0.0), cfg.P_max)


def power_update_zf(p: Sequence[float], dual: DualState, cfg: SystemConfig, k: int) -> float:
    """One closed-form ZF power step for user k, clamped to [0, P_max]."""
    val = _raw_update(p, dual.Gamma, dual.Psi, dual.q, cfg, ZF, k)
    return min(max(val, 0.0), cfg.P_max)


def stationarity_residual(
    p: Sequence[float],
    gamma: Sequence[float],
    psi: float,
    q: float,
    cfg: SystemConfig,
    scheme: str,
    k: int,
) -> float:
    """First-order optimality residual for user k at the given dual point."""
    s_k = _s_term(p, gamma, cfg.zeta_e, k)
    pole = _own_pole(cfg, scheme)
    own = 0.0 if math.isinf(pole) else (1.0 + gamma[k]) / ((p[k] + pole) * LN2)
    return own - s_k + q + psi


def _coord_update(
    p: Sequence[float],
    gamma: Sequence[float],
    psi: float,
    q: float,
    cfg: SystemConfig,
    scheme: str,
    k: int,
    cap: float,
    local: bool = False,
) -> float:
    """Per-user maximizer of the dual objective on [0, cap].

    The objective in user k's power x keeps every clamp of the secrecy rates:

        (1+G_k) * [own secrecy rate]+  +  sum_j (1+G_j) * [their secrecy rate]+
        - (q + psi) * x

    The own term is decreasing in x, the cross terms (the eavesdropper sees
    more interference) are increasing, and each clamp contributes one kink.
    Between kinks every gradient term is a hyperbola, so interior stationary
    points come from a bracketed Newton iteration.  The update enumerates the
    local maxima (interior roots, kink maxima, locally-maximal endpoints) and
    returns the best one; in local mode it returns the maximum reached by
    continuous ascent from the current power, which keeps the allocation
    pattern stable while the multipliers settle.
    """
    from .metrics import sinr_per_watt

    t_others = sum(p) - p[k]
    inv_ze = 1.0 / cfg.zeta_e
    c = q + psi
    w_own = 1.0 + gamma[k]

    if scheme == MRT:
        csi = cfg.delta**2 if cfg.mrt_delta_squared else cfg.delta
        d1 = cfg.K - cfg.delta**2
        d0 = float(cfg.K)
        h = csi * cfg.M
    else:
        ups = (cfg.M - cfg.K) / cfg.K
        d1 = ups * (1.0 - cfg.delta**2) / ((cfg.M - 1) * (cfg.M - 2))
        d0 = 1.0
        h = ups * cfg.delta**2
    num_own = h * (t_others + inv_ze)
    # own secrecy rate positive only below this power
    if d1 > 0.0 and num_own > 0.0:
        x_bar = (num_own - d0) / d1
    else:
        x_bar = math.inf if num_own > d0 else 0.0

    ws: list = []
    bs: list = []
    ys: list = []
    for j in range(len(p)):
        if j == k:
            continue
        g_j = sinr_per_watt(p[j], cfg, scheme)
        if g_j <= 0.0:
            continue
        b_j = t_others - p[j] + inv_ze
        ws.append(1.0 + gamma[j])
        bs.append(b_j)
        ys.append(1.0 / g_j - b_j)  # cross term active above this power

    def phi(x: float) -> float:
        val = -c * x
        if num_own > 0.0:
            r = num_own / (d1 * x + d0)
            if r > 1.0:
                val += w_own * math.log2(r)
        for w, b, y in zip(ws, bs, ys):
            if x > y:
                val += w * math.log2((b + x) / (b + y))
        return val

    def phi_prime(x: float) -> float:
        s = 0.0
        for w, b, y in zip(ws, bs, ys):
            if x > y:
                s += w / (b + x)
        if d1 > 0.0 and x < x_bar:
            s -= w_own * d1 / (d1 * x + d0)
        return s / LN2 - c

    def phi_second(x: float) -> float:
        s = 0.0
        for w, b, y in zip(ws, bs, ys):
            if x > y:
                s -= w / (b + x) ** 2
        if d1 > 0.0 and x < x_bar:
            s += w_own * d1 * d1 / (d1 * x + d0) ** 2
        return s / LN2

    def newton_root(lo: float, hi: float, start: float) -> float:
        x = min(max(start, lo), hi)
        for _ in range(60):
            gx = phi_prime(x)
            if gx > 0.0:
                lo = x
            else:
                hi = x
            if hi - lo <= 1e-14 * (1.0 + cap):
                break
            d2 = phi_second(x)
            ok = d2 < 0.0
            if ok:
                x_new = x - gx / d2
                ok = lo < x_new < hi
            if not ok:
                x_new = 0.5 * (lo + hi)
            if abs(x_new - x) <= 1e-15 * (1.0 + cap):
                x = x_new
                break
            x = x_new
        return x

    cur = min(max(p[k], 0.0), cap)

    cuts = {0.0, cap}
    if 0.0 < x_bar < cap:
        cuts.add(x_bar)
    for y in ys:
        if 0.0 < y < cap:
            cuts.add(y)
    bounds = sorted(cuts)

    maxima: list = []
    first_da = None
    prev_db = None
    for a, b in zip(bounds[:-1], bounds[1:]):
        eps = 1e-12 * (1.0 + b - a)
        da = phi_prime(a + eps)
        db = phi_prime(b - eps)
        if first_da is None:
            first_da = da
        if prev_db is not None and prev_db >= 0.0 and da <= 0.0:
            maxima.append(a)  # kink maximum
        if da > 0.0 >= db:
            maxima.append(newton_root(a, b, cur))
        prev_db = db
    if first_da is not None and first_da <= 0.0:
        maxima.append(0.0)
    if prev_db is not None and prev_db >= 0.0:
        maxima.append(cap)
    if not maxima:
        maxima = [0.0, cap]

    if len(maxima) == 1:
        return min(max(maxima[0], 0.0), cap)

    if local:
        # continuous ascent from the current power lands on the nearest
        # maximum uphill; the allocation pattern cannot jump basins
        d_cur = phi_prime(cur)
        if d_cur > 0.0:
            ahead = [m for m in maxima if m >= cur - 1e-15]
            best = min(ahead) if ahead else max(maxima)
        elif d_cur < 0.0:
            behind = [m for m in maxima if m <= cur + 1e-15]
            best = max(behind) if behind else min(maxima)
        else:
            best = min(maxima, key=lambda m: abs(m - cur))
        return min(max(best, 0.0), cap)

    values = [(phi(x), x) for x in maxima]
    best_val = max(v for v, _ in values)
    # hysteresis: among near-tied maxima keep the one closest to the current
    # power, so plateau ties cannot flip the allocation pattern back and
    # forth while the multipliers settle
    tol = 1e-9 * (1.0 + abs(best_val))
    best = min(
        (x for v, x in values if v >= best_val - tol),
        key=lambda x: abs(x - cur),
    )
    return min(max(best, 0.0), cap)


def _m_floor(cfg: SystemConfig, scheme: str) -> int:
    return 3 if scheme == MRT else cfg.K + 1


def _equal_power_secure_sum(cfg: SystemConfig, scheme: str, p_eq: float, m: int) -> float:
    """K times the per-user secrecy rate at equal powers and antenna count m."""
    others = (cfg.K - 1) * p_eq
    cover = others + 1.0 / cfg.zeta_e
    if scheme == MRT:
        csi = cfg.delta**2 if cfg.mrt_delta_squared else cfg.delta
        ratio = csi * m / ((cfg.K - cfg.delta**2) * p_eq + cfg.K) * cover
    else:
        ups = (m - cfg.K) / cfg.K
        err = ups * (1.0 - cfg.delta**2) / ((m - 1) * (m - 2))
        ratio = ups * cfg.delta**2 / (err * p_eq + 1.0) * cover
    if ratio <= 1.0:
        return 0.0
    return cfg.K * math.log2(ratio)


def _init_theta(cfg: SystemConfig, scheme: str, p: Sequence[float]) -> float:
    """Starting efficiency value for the antenna-count loop.

    The Newton/ratio iteration needs a start at or above the optimum (its
    parametric maximum must be <= 0 there), so the equal-power ratio at the
    full array is doubled until that holds over the whole admissible antenna
    range.
    """
    q0 = report(p, cfg, scheme).ee_sec
    theta = cfg.B * q0
    if theta <= 0.0:
        return 0.0
    floor = _m_floor(cfg, scheme)
    sum_p = sum(p)
    p_eq = sum_p / cfg.K
    sums = [
        (m, cfg.B * _equal_power_secure_sum(cfg, scheme, p_eq, m))
        for m in range(floor, cfg.M + 1)
    ]
    for _ in range(200):
        mu = max(om1 - theta * (sum_p + m * cfg.P_c) for m, om1 in sums)
        if mu <= 0.0:
            break
        theta *= 2.0
    return theta


class _Grouping:
    """Static per-user group assignment with split power budgets."""

    def __init__(self, groups: Sequence[int], lam: float, cfg: SystemConfig):
        self.of = tuple(groups)
        self.lam = lam
        self.budgets = (lam * cfg.P_max, (1.0 - lam) * cfg.P_max)

    def group_sum(self, p: Sequence[float], g: int) -> float:
        return sum(pk for pk, gi in zip(p, self.of) if gi == g)


class _MultiplierEq:
    """Drives one projected multiplier toward its constraint equilibrium.

    The violation v(psi) = slack of the constraint is increasing in psi.  Far
    from the root the update is the base projected step with a geometrically
    growing scale; once both sides of the root have been seen it bisects
    between them.  Brackets age out when the rest of the state drifts past
    them.  If the bracket collapses while the violation stays finite (the
    constraint response jumps across its boundary), the multiplier pins to
    the feasible side so the loop can terminate.
    """

    def __init__(self, base: float):
        self.base = base
        self.scale = 1.0
        self.lo = 0.0       # highest multiplier still on the violated side
        self.hi = None      # lowest multiplier on the slack side
        self.pinned = False

    def update(self, psi: float, v: float, tol: float):
        """Return (next multiplier, constraint-settled flag).

        The settled band sits on the feasible side only: a settled constraint
        is never violated by more than a hair, so the returned solution does
        not need a stationarity-breaking projection.
        """
        eps = 1e-5 * tol
        if self.pinned:
            if v >= -eps:
                return psi, True
            # the constraint moved back into violation: resume control
            self.pinned = False
            self.lo = psi
            self.hi = None
        if v < -eps:
            # constraint violated: raise the multiplier; a violated state is
            # never reported as settled
            self.lo = max(self.lo, psi)
            if self.hi is not None and self.hi <= self.lo:
                self.hi = None
            if self.hi is None:
                self.scale = min(self.scale * 1.6, 1e3)
                nxt = psi - self.base * self.scale * v
            else:
                nxt = 0.5 * (psi + self.hi)
                if self.hi - self.lo <= 1e-12 * (1.0 + self.hi):
                    # bracket exhausted: park on the recorded feasible side
                    # and age the bracket out in case the state has drifted
                    nxt = self.hi
                    self.lo = 0.0
            return nxt, False
        if v <= tol:
            # feasible and (if priced) at the boundary within the band
            return psi, True
        # slack beyond the band
        if psi <= 0.0:
            return 0.0, True
        if self.hi is None or psi < self.hi:
            self.hi = psi
        if self.lo >= self.hi:
            self.lo = 0.0
        if self.lo > 0.0:
            nxt = 0.5 * (psi + self.lo)
            if self.hi - self.lo <= 1e-10 * (1.0 + self.hi):
                # the response jumps across the boundary: hold the feasible
                # price until the constraint is violated again
                self.pinned = True
                return self.hi, True
        else:
            self.scale = min(self.scale * 1.6, 1e3)
            nxt = max(0.0, psi - self.base * self.scale * v)
        return nxt, False


def _select_m(theta: float, cfg: SystemConfig, scheme: str) -> int:
    """Antenna count for the current efficiency value.

    The closed-form rule balances the marginal rate gain of one extra antenna
    against its circuit power.  By default the rate side carries the full sum
    over served users; setting ``antenna_rule_k_scaled`` to False drops that
    factor, reproducing the per-user form of the rule.
    """
    from .antenna_selection import m_opt_mrt, m_opt_zf

    eff = theta / cfg.K if cfg.antenna_rule_k_scaled else theta
    return m_opt_mrt(eff, cfg) if scheme == MRT else m_opt_zf(eff, cfg)


def _solve_dual_loop(
    cfg: SystemConfig,
    scheme: str,
    *,
    grouping: Optional[_Grouping] = None,
    select_antennas: bool = False,
    algorithm: str = "alg1",
) -> PowerSolution:
    """Shared dual-loop engine behind all four iterative solvers."""
    cfg.validate_scheme(scheme)
    k_users = cfg.K
    flags: list = []

    if grouping is None:
        group_of = (0,) * k_users
        budgets = [cfg.P_max]
        psi = [0.01]
    else:
        group_of = grouping.of
        budgets = list(grouping.budgets)
        psi = [0.01, 0.01]
    gamma = [0.01] * k_users
    p = [cfg.P_max / k_users] * k_users
    psi_eqs = [_MultiplierEq(cfg.iota) for _ in psi]
    gamma_eqs = [_MultiplierEq(cfg.varpi) for _ in gamma]

    m_active = cfg.M
    cfg_m = cfg
    rep = report(p, cfg_m, scheme)
    q = rep.ee_sec
    if select_antennas:
        theta = _init_theta(cfg, scheme, p)
        if theta > 0.0:
            q = theta / cfg.B
    else:
        theta = cfg.B * q

    trace: list = []
    converged = False
    surplus_tol = cfg.beta_tol if not select_antennas else cfg.rho_tol / cfg.B

    m_prev = m_active
    m_alternations = 0
    m_frozen = False

    it = 0
    for it in range(1, cfg.max_iters + 1):
        m_changed = False
        if select_antennas and not m_frozen and theta > 0.0:
            m_new = _select_m(theta, cfg, scheme)
            if m_new != m_active:
                if m_new == m_prev:
                    m_alternations += 1
                    if m_alternations > 10:
                        m_new = min(m_new, m_active)
                        m_frozen = True
                        flags.append("m_oscillation_frozen")
                else:
                    m_alternations = 0
                m_prev = m_active
                m_changed = m_new != m_active
                if m_changed:
                    m_active = m_new
                    cfg_m = replace(cfg, M=m_active)

        old_p = list(p)
        source = old_p if cfg.jacobi_updates else p
        new_p = p
        if cfg.jacobi_updates:
            new_p = list(p)
        local = it > _LOCAL_PHASE_START
        for k in range(k_users):
            cap = budgets[group_of[k]]
            new_p[k] = _coord_update(
                source, gamma, psi[group_of[k]], q, cfg_m, scheme, k, cap, local=local
            )
        if cfg.jacobi_updates:
            p = new_p

        rep = report(p, cfg_m, scheme)
        sum_p = sum(p)
        surplus = sum(rep.rate_sec) - q * (sum_p + m_active * cfg.P_c)

        # multiplier equilibration with deadbands; *_ok means the constraint
        # sits at its boundary (or is slack with a zero multiplier)
        budgets_ok = True
        if grouping is None:
            violations = [cfg.P_max - sum_p]
        else:
            refs = [
                cfg.P_max if cfg.algorithm2_printed_budgets else budgets[g]
                for g in range(2)
            ]
            violations = [refs[g] - grouping.group_sum(p, g) for g in range(2)]
        tol_b = 1e-7 * (1.0 + abs(cfg.P_max))
        for g, v in enumerate(violations):
            psi[g], ok = psi_eqs[g].update(psi[g], v, tol_b)
            budgets_ok = budgets_ok and ok

        qos_ok = True
        tol_r = 1e-7 * (1.0 + cfg.R_min)
        gamma_new = []
        for gk, rs, eq in zip(gamma, rep.rate_sec, gamma_eqs):
            gk, ok = eq.update(gk, rs - cfg.R_min, tol_r)
            qos_ok = qos_ok and ok
            gamma_new.append(gk)
        gamma = gamma_new

        q_new = rep.ee_sec
        trace.append((it, q_new, sum_p, surplus))

        dp = max(abs(a - b) for a, b in zip(p, old_p))
        settled = (
            abs(surplus) <= surplus_tol
            and dp <= cfg.power_tol
            and budgets_ok
            and qos_ok
            and not m_changed
        )

        q = q_new
        theta = cfg.B * q

        if settled:
            converged = True
            break
        if max(gamma) > _GAMMA_BLOWUP:
            flags.append("infeasible")
            break

    if any(eq.pinned for eq in psi_eqs + gamma_eqs):
        flags.append("multiplier_pinned")

    # Feasibility projection: a run stopped mid-flight can overshoot a budget.
    scaled = False
    for g, budget in enumerate(budgets):
        in_g = [k for k in range(k_users) if group_of[k] == g]
        total_g = sum(p[k] for k in in_g)
        if total_g > budget + 1e-11 * (1.0 + budget) and total_g > 0.0:
            factor = budget / total_g
            for k in in_g:
                p[k] *= factor
            scaled = True
    if scaled:
        flags.append("budget_projected")
        rep = report(p, cfg_m, scheme)

    dual = DualState(Psi=psi[0], Gamma=tuple(gamma), q=rep.ee_sec, iter=it)
    budget_state = None
    if grouping is not None:
        from .cell_division import GroupBudget

        budget_state = GroupBudget(
            Lambda=grouping.lam,
            P1=grouping.budgets[0],
            P2=grouping.budgets[1],
            Psi1=psi[0],
            Psi2=psi[1],
        )
    theta_state = None
    if select_antennas:
        from .antenna_selection import ThetaState

        om1 = cfg.B * sum(rep.rate_sec)
        om2 = sum(p) + m_active * cfg.P_c
        theta_state = ThetaState(
            theta=cfg.B * rep.ee_sec,
            M_active=m_active,
            mu=om1 - cfg.B * rep.ee_sec * om2,
        )
    return PowerSolution(
        p=tuple(p),
        dual=dual,
        report=rep,
        converged=converged,
        trace=tuple(trace),
        scheme=scheme,
        m_active=m_active,
        algorithm=algorithm,
        flags=tuple(flags),
        budget=budget_state,
        theta=theta_state,
    )


def solve_algorithm1(cfg: SystemConfig, scheme: str) -> PowerSolution:
    """Iterative power allocation without cell division or antenna selection."""
    return _solve_dual_loop(cfg, scheme, algorithm="alg1")


def equal_power_baseline(cfg: SystemConfig, scheme: str) -> PowerSolution:
    """Uniform split of the full budget across users; no iteration."""
    cfg.validate_scheme(scheme)
    p = tuple(cfg.P_max / cfg.K for _ in range(cfg.K))
    rep = report(p, cfg, scheme)
    dual = DualState(Psi=0.0, Gamma=(0.0,) * cfg.K, q=rep.ee_sec, iter=0)
    return PowerSolution(
        p=p,
        dual=dual,
        report=rep,
        converged=True,
        trace=(),
        scheme=scheme,
        m_active=cfg.M,
        algorithm="equal",
    )
