"""Closed-form SINRs, secure rates, and secure energy efficiency.

These are the objective pieces shared by every allocation algorithm.  All
functions are pure and operate on plain floats/sequences; the per-user rate
is the log2-of-SINR lower bound, the secrecy rate clamps its user/EVA gap at
zero, and the efficiency divides the summed secrecy rate by transmit plus
circuit power.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .config import MRT, ZF, SystemConfig
from .errors import DegenerateDenominator, InvalidDimension


@dataclass(frozen=True)
class RateReport:
    sinr: tuple           # per-user SINR under the active precoder
    sinr_eva: tuple       # per-user SINR observed by the eavesdropper
    rate_lb: tuple        # log2(sinr) lower-bound rates [bits/s/Hz]
    rate_eva: tuple       # eavesdropper rates [bits/s/Hz]
    rate_sec: tuple       # clamped secrecy rates [bits/s/Hz]
    ee_sec: float         # secure energy efficiency [bits/s/Hz per W]
    flags: tuple          # diagnostic markers, e.g. "non_positive_sinr"


def sinr_mrt(p_k: float, cfg: SystemConfig) -> float:
    """Closed-form per-user SINR under maximum-ratio transmission."""
    if p_k < 0:
        raise ValueError("power must be nonnegative")
    csi = cfg.delta**2 if cfg.mrt_delta_squared else cfg.delta
    denom = (cfg.K - cfg.delta**2) * p_k + cfg.K
    if denom == 0.0:
        raise DegenerateDenominator("MRT SINR denominator is zero")
    return csi * p_k * cfg.M / denom


def sinr_zf(p_k: float, cfg: SystemConfig) -> float:
    """Closed-form per-user SINR under zero-forcing precoding."""
    if p_k < 0:
        raise ValueError("power must be nonnegative")
    if cfg.M < 3 or cfg.M <= cfg.K:
        raise InvalidDimension("ZF SINR needs M >= 3 and M > K")
    ups = (cfg.M - cfg.K) / cfg.K
    err = ups * (1.0 - cfg.delta**2) / ((cfg.M - 1) * (cfg.M - 2))
    return ups * cfg.delta**2 * p_k / (err * p_k + 1.0)


def sinr_eva(p, k: int, cfg: SystemConfig) -> float:
    """Eavesdropper SINR on user k's stream; remaining users act as interference."""
    others = sum(p) - p[k]
    return cfg.zeta_e * p[k] / (cfg.zeta_e * others + 1.0)


def _rate(sinr: float) -> float:
    return math.log2(sinr) if sinr > 0.0 else -math.inf


def sinr_per_watt(p_k: float, cfg: SystemConfig, scheme: str) -> float:
    """Closed-form SINR-to-power ratio; finite down to p_k = 0."""
    if scheme == MRT:
        csi = cfg.delta**2 if cfg.mrt_delta_squared else cfg.delta
        return csi * cfg.M / ((cfg.K - cfg.delta**2) * p_k + cfg.K)
    ups = (cfg.M - cfg.K) / cfg.K
    err = ups * (1.0 - cfg.delta**2) / ((cfg.M - 1) * (cfg.M - 2))
    return ups * cfg.delta**2 / (err * p_k + 1.0)


def secure_rate(p_k: float, others: float, cfg: SystemConfig, scheme: str) -> float:
    """Clamped secrecy rate of one user given the other users' total power.

    Evaluated through the user/EVA SINR ratio, in which the own power
    cancels: for p_k > 0 this equals max(0, rate_lb - rate_eva) exactly, and
    it extends that expression continuously to p_k = 0 (where both logs
    diverge but their gap does not).
    """
    ratio = sinr_per_watt(p_k, cfg, scheme) * (others + 1.0 / cfg.zeta_e)
    if ratio <= 0.0:
        return 0.0
    return max(0.0, math.log2(ratio))


def report(p, cfg: SystemConfig, scheme: str) -> RateReport:
    """Evaluate the full rate/efficiency chain at the given power vector.

    A diagnostic flag records when any transmitting user sits below the 0 dB
    lower-bound threshold (negative rate_lb); this is not an error, the
    clamp in the secrecy rate keeps everything downstream well-defined.
    """
    sinr_user = sinr_mrt if scheme == MRT else sinr_zf
    if scheme not in (MRT, ZF):
        raise ValueError(f"unknown scheme {scheme!r}")

    total = sum(p)
    sinr = tuple(sinr_user(pk, cfg) for pk in p)
    s_eva = tuple(sinr_eva(p, k, cfg) for k in range(len(p)))
    rate_lb = tuple(_rate(x) for x in sinr)
    rate_eva = tuple(_rate(x) for x in s_eva)
    rate_sec = tuple(
        secure_rate(pk, total - pk, cfg, scheme) for pk in p
    )
    ee = sum(rate_sec) / (sum(p) + cfg.M * cfg.P_c)

    flags = []
    if any(pk > 0.0 and x <= 1.0 for pk, x in zip(p, sinr)):
        flags.append("non_positive_sinr")
    return RateReport(
        sinr=sinr,
        sinr_eva=s_eva,
        rate_lb=rate_lb,
        rate_eva=rate_eva,
        rate_sec=rate_sec,
        ee_sec=ee,
        flags=tuple(flags),
    )
