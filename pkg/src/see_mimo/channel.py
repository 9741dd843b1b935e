"""User layouts, Rayleigh channel realizations with imperfect CSI, and precoders.

Realization matrices are kept at unit per-entry variance so that the
closed-form SINR expressions in :mod:`see_mimo.metrics` can be validated
against the literal matrix SINR by Monte-Carlo averaging.  Large-scale gains
(path loss, shadowing) live in the layout, already divided by the thermal
noise power, and enter the rate model only through the eavesdropper gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import CENTRAL, EDGE, MRT, ZF, SystemConfig
from .errors import InvalidDimension


@dataclass(frozen=True)
class UserLayout:
    positions: np.ndarray    # (K, 2) user coordinates [m], BS at the origin
    eva_position: np.ndarray  # (2,) eavesdropper coordinates [m]
    d: np.ndarray            # (K,) BS-user distances [m]
    zeta: np.ndarray         # (K,) noise-normalized large-scale gains
    group: tuple             # (K,) labels, CENTRAL or EDGE
    zeta_e: float            # noise-normalized eavesdropper gain

    def __post_init__(self) -> None:
        k = len(self.d)
        if not (len(self.positions) == len(self.zeta) == len(self.group) == k):
            raise ValueError("layout fields must all have K entries")
        if np.any(self.d <= 0) or np.any(self.zeta <= 0) or self.zeta_e <= 0:
            raise ValueError("distances and gains must be positive")


@dataclass(frozen=True)
class ChannelRealization:
    C: np.ndarray         # (M, K) true channel
    C_hat: np.ndarray     # (M, K) MMSE channel estimate
    X: np.ndarray         # (M, K) estimation error
    B_precode: np.ndarray  # (M, K) precoding matrix
    upsilon: float        # power-normalization coefficient 1 / E{tr(B^H B)}


def _large_scale_gain(dist: float, shadow_db: float, cfg: SystemConfig) -> float:
    """Noise-normalized large-scale gain at distance `dist` [m]."""
    path = (dist / cfg.d_min) ** (-cfg.pathloss_exponent)
    shadow = 10.0 ** (shadow_db / 10.0)
    return path * shadow / cfg.noise_power


def _draw_position(cfg: SystemConfig, rng: np.random.Generator, n: int):
    """Uniform positions on the annulus d_min <= r <= D around the BS."""
    r = np.sqrt(rng.uniform(cfg.d_min**2, cfg.D**2, size=n))
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)]), r


def generate_layout(cfg: SystemConfig, rng: np.random.Generator) -> UserLayout:
    """Drop K users and one eavesdropper uniformly in the cell.

    Group labels split users into central/edge sets, by the D/2 distance
    threshold or by the median distance depending on ``cfg.group_rule``.
    """
    positions, d = _draw_position(cfg, rng, cfg.K)
    shadows_db = cfg.shadow_sigma_db * rng.standard_normal(cfg.K)
    zeta = np.array([_large_scale_gain(di, si, cfg) for di, si in zip(d, shadows_db)])

    eva_pos, d_e = _draw_position(cfg, rng, 1)
    eva_shadow_db = cfg.shadow_sigma_db * rng.standard_normal()
    zeta_e = _large_scale_gain(float(d_e[0]), float(eva_shadow_db), cfg)

    if cfg.group_rule == "median":
        cut = float(np.median(d))
    else:
        cut = cfg.D / 2.0
    group = tuple(CENTRAL if di <= cut else EDGE for di in d)

    return UserLayout(
        positions=positions,
        eva_position=eva_pos[0],
        d=d,
        zeta=zeta,
        group=group,
        zeta_e=float(zeta_e),
    )


def _complex_gaussian(rng: np.random.Generator, m: int, k: int) -> np.ndarray:
    """(m, k) matrix with i.i.d. CN(0, 1) entries."""
    return (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / math.sqrt(2.0)


def upsilon_analytic(scheme: str, m: int, k: int) -> float:
    """Closed-form normalization 1 / E{tr(B^H B)} for unit-variance estimates."""
    if scheme == MRT:
        return 1.0 / (m * k)
    if scheme == ZF:
        if m <= k:
            raise InvalidDimension("ZF normalization needs M > K")
        return (m - k) / k
    raise ValueError(f"unknown scheme {scheme!r}")


def generate_channel(
    cfg: SystemConfig,
    layout: UserLayout,
    scheme: str,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one imperfect-CSI channel realization and its precoder.

    The estimate and the error are independent unit-variance complex Gaussian
    fields; the true channel is their delta-weighted combination, so the
    reconstruction identity holds exactly by construction.
    """
    if scheme == ZF and cfg.M <= cfg.K:
        raise InvalidDimension("ZF precoding needs M > K")
    m, k = cfg.M, cfg.K
    c_hat = _complex_gaussian(rng, m, k)
    x = _complex_gaussian(rng, m, k)
    c = cfg.delta * c_hat + math.sqrt(1.0 - cfg.delta**2) * x

    if scheme == MRT:
        b = c_hat.copy()
    else:
        gram = c_hat.conj().T @ c_hat
        b = c_hat @ np.linalg.inv(gram)

    return ChannelRealization(
        C=c,
        C_hat=c_hat,
        X=x,
        B_precode=b,
        upsilon=upsilon_analytic(scheme, m, k),
    )


def upsilon_empirical(
    cfg: SystemConfig,
    layout: UserLayout,
    scheme: str,
    rng: np.random.Generator,
    realizations: int = 500,
) -> float:
    """Estimate 1 / E{tr(B^H B)} by averaging over channel draws."""
    total = 0.0
    for _ in range(realizations):
        real = generate_channel(cfg, layout, scheme, rng)
        total += float(np.real(np.trace(real.B_precode.conj().T @ real.B_precode)))
    return realizations / total


def empirical_sinr(
    real: ChannelRealization,
    p,
    k: int,
    cfg: SystemConfig,
) -> float:
    """Literal matrix SINR of user k for the given per-user powers.

    Signal power uses the estimated channel through the precoder; the two
    interference terms are the residual multi-user leakage seen through the
    estimate and the estimation error, plus unit noise.
    """
    ups = real.upsilon
    d2 = cfg.delta**2
    ch_k = real.C_hat[:, k]
    x_k = real.X[:, k]
    b = real.B_precode

    sig = ups * p[k] * d2 * abs(np.vdot(ch_k, b[:, k])) ** 2
    inter = 0.0
    for j in range(cfg.K):
        if j != k:
            inter += p[j] * abs(np.vdot(ch_k, b[:, j])) ** 2
    err = 0.0
    for i in range(cfg.K):
        err += p[i] * abs(np.vdot(x_k, b[:, i])) ** 2
    denom = ups * d2 * inter + ups * (1.0 - d2) * err + 1.0
    return float(sig / denom)
