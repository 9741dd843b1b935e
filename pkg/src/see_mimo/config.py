"""System configuration: every scalar parameter shared by the simulator and solvers.

All SINR/rate formulas downstream assume unit noise variance, so large-scale
gains are divided by the thermal noise power sigma2 = N0 * B once, at layout
time.  Default values follow the simulation setup (120 kHz bandwidth, -174
dBm/Hz noise density, 0.1 W circuit power per antenna, 0.01 multiplier steps);
the remaining defaults (antenna/user counts, cell radius, CSI accuracy, power
budget) are the calibrated operating point used for the sweep figures.
"""
from __future__ import annotations

from dataclasses import dataclass, fields


class ConfigError(ValueError):
    """A SystemConfig field violates one of its invariants."""


CENTRAL = "central"
EDGE = "edge"

MRT = "mrt"
ZF = "zf"

SCHEMES = (MRT, ZF)


@dataclass(frozen=True)
class SystemConfig:
    # Geometry and population
    M: int = 128              # BS antennas
    K: int = 5                # single-antenna users
    D: float = 500.0          # cell radius [m]
    d_min: float = 35.0       # minimum BS-user distance [m]

    # Channel quality
    delta: float = 0.95       # CSI estimation accuracy in [0, 1]
    zeta_e: float = 6.0e11    # noise-normalized eavesdropper large-scale gain
    pathloss_exponent: float = 3.8
    shadow_sigma_db: float = 10.0   # log-normal shadow-fading std [dB]
    noise_psd_dbm_hz: float = -174.0

    # Power and QoS
    P_max: float = 5.0        # total transmit power budget [W]
    P_c: float = 0.1          # circuit power per antenna [W]
    B: float = 120e3          # bandwidth [Hz]
    R_min: float = 0.0        # per-user secure-rate floor [bits/s/Hz]

    # Iteration control
    iota: float = 0.01        # step size for the power-budget multiplier
    varpi: float = 0.01       # step size for the QoS multipliers
    beta_tol: float = 1e-4    # stopping threshold on the fractional surplus
    rho_tol: float = 1e-2     # stopping threshold for antenna-selection runs (bandwidth-scaled surplus)
    power_tol: float = 1e-9   # additional stop criterion: max per-user power change [W]
    mult_tol: float = 1e-9    # additional stop criterion: max multiplier change
    max_iters: int = 2000
    seed: int = 1234

    # Variant switches
    mrt_delta_squared: bool = False        # square the CSI-accuracy factor in the MRT SINR numerator
    jacobi_updates: bool = False           # update powers from the previous sweep instead of in place
    algorithm2_printed_budgets: bool = False  # group multiplier steps against the full budget, not the split
    antenna_rule_k_scaled: bool = True     # scale the antenna-count rule by the number of served users
    group_rule: str = "threshold"          # "threshold" (D/2) or "median" distance split

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ConfigError("M must be a positive antenna count")
        if self.K < 1:
            raise ConfigError("K must be a positive user count")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError("delta must lie in [0, 1]")
        if self.zeta_e <= 0.0:
            raise ConfigError("zeta_e must be positive")
        if self.P_max <= 0.0:
            raise ConfigError("P_max must be positive")
        if self.P_c <= 0.0:
            raise ConfigError("P_c must be positive")
        if self.B <= 0.0:
            raise ConfigError("B must be positive")
        if self.R_min < 0.0:
            raise ConfigError("R_min must be nonnegative")
        if self.D <= 0.0 or self.d_min <= 0.0 or self.d_min >= self.D:
            raise ConfigError("require 0 < d_min < D")
        if self.shadow_sigma_db <= 0.0:
            raise ConfigError("shadow_sigma_db must be positive")
        if self.pathloss_exponent <= 0.0:
            raise ConfigError("pathloss_exponent must be positive")
        for name in ("iota", "varpi", "beta_tol", "rho_tol", "power_tol", "mult_tol"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be a positive integer")
        if self.group_rule not in ("threshold", "median"):
            raise ConfigError("group_rule must be 'threshold' or 'median'")

    @property
    def noise_power(self) -> float:
        """Thermal noise power sigma2 = N0 * B in Watts."""
        return 10.0 ** ((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.B

    def validate_scheme(self, scheme: str) -> None:
        """Check the dimension preconditions of the requested precoder."""
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown precoding scheme {scheme!r}")
        if scheme == ZF:
            if self.M <= self.K:
                raise ConfigError("ZF requires M > K")
            if self.M < 3:
                raise ConfigError("ZF requires M >= 3")


def config_from_dict(data: dict) -> SystemConfig:
    """Build a SystemConfig from a plain dict, rejecting unknown keys."""
    known = {f.name for f in fields(SystemConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return SystemConfig(**data)
