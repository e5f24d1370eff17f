"""Closed-form predictions for heralded photon pairs far below threshold.

Rates are in 1/s, pump power in mW and coincidence windows in ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (DomainError, InconsistentInputError, ParameterError,
                     UndefinedResultError)


@dataclass(frozen=True)
class PairSourceOperatingPoint:
    pair_rate_R: float  # pairs / (s mW)
    pump_power: float  # mW
    coincidence_window: float  # ns

    def __post_init__(self):
        if not self.pair_rate_R >= 0:
            raise ParameterError("pair_rate_R must be >= 0")
        if not self.pump_power > 0:
            raise ParameterError("pump_power must be > 0")
        if not self.coincidence_window > 0:
            raise ParameterError("coincidence_window must be > 0")

    @classmethod
    def from_pair_rate(cls, rp, window_ns, pump_power=1.0):
        """Build from the total generation rate R*P (pairs/s)."""
        return cls(rp / pump_power, pump_power, window_ns)

    @property
    def generation_rate(self):
        return self.pair_rate_R * self.pump_power

    @property
    def pair_probability(self):
        """Mean number of pairs per coincidence window, p = R P dt."""
        return self.generation_rate * self.coincidence_window * 1e-9


@dataclass(frozen=True)
class RateSummary:
    n_s: float
    n_i: float
    r: float
    duration: float = 1.0

    def __post_init__(self):
        for name in ("n_s", "n_i", "r", "duration"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be >= 0")


@dataclass(frozen=True)
class EfficiencySummary:
    eta_s: float
    eta_i: float
    eta_heralded: float
    R_inferred: float
    r_normalized: float


def heralded_g2_prediction(op_point):
    """Conditional g2 of the heralded signal: 2p - p**2 with p = R P dt."""
    p = op_point.pair_probability
    if p > 1.0:
        raise DomainError(f"p = R*P*dt = {p:g} exceeds one pair per window")
    return 2.0 * p - p * p


def bayes_g2c(g2_ss, g2_ii, g2_si):
    """Heralded g2 from the unconditioned auto- and cross-correlations."""
    if not g2_si > 0:
        raise DomainError("cross-correlation g2_si must be > 0")
    return g2_ss * g2_ii / g2_si


def predicted_cross_corr(g2_ii, op_point):
    """Signal-idler cross-correlation expected for a given pair rate.

    Uses the idler autocorrelation for both arms, so that
    g2_si = g2_ii**2 / g2_c.
    """
    g2c = heralded_g2_prediction(op_point)
    if g2c <= 0:
        raise UndefinedResultError("predicted g2_c is zero: cross-correlation diverges")
    return g2_ii * g2_ii / g2c


def efficiencies_from_rates(rates, eta_det, pump_power):
    if not 0 < eta_det <= 1:
        raise ParameterError("eta_det must lie in (0, 1]")
    if not pump_power > 0:
        raise ParameterError("pump_power must be > 0")
    if rates.r == 0:
        raise UndefinedResultError("no coincidences: efficiencies are undefined")
    if rates.r > min(rates.n_s, rates.n_i):
        raise InconsistentInputError(
            f"pair rate {rates.r:g} exceeds a singles rate ({rates.n_s:g}, {rates.n_i:g})")
    return EfficiencySummary(
        eta_s=rates.r / rates.n_i,
        eta_i=rates.r / rates.n_s,
        eta_heralded=rates.r / (eta_det * rates.n_i),
        R_inferred=rates.n_i * rates.n_s / (rates.r * pump_power),
        r_normalized=rates.r / pump_power,
    )


def expected_rates(source, arm_eff_s, arm_eff_i, dark_s=0.0, dark_i=0.0):
    """Forward model of singles and coincidence rates (per second).

    Coincidences include the flat accidental background n_s n_i dt.
    """
    for name, v in (("arm_eff_s", arm_eff_s), ("arm_eff_i", arm_eff_i)):
        if not 0 <= v <= 1:
            raise ParameterError(f"{name} must lie in [0, 1]")
    if dark_s < 0 or dark_i < 0:
        raise ParameterError("dark rates must be >= 0")
    rp = source.generation_rate
    n_s = arm_eff_s * rp + dark_s
    n_i = arm_eff_i * rp + dark_i
    r = arm_eff_s * arm_eff_i * rp + n_s * n_i * source.coincidence_window * 1e-9
    return RateSummary(n_s=n_s, n_i=n_i, r=min(r, n_s, n_i), duration=1.0)


def statistical_tolerance(rates, window_ns):
    """Relative bias of the efficiency round trip caused by accidentals.

    Ratio of the accidental rate n_s n_i dt to the true pair rate; the
    arm efficiencies are biased by exactly this much, R by less.
    """
    acc = window_ns * 1e-9 * rates.n_s * rates.n_i
    if rates.r <= acc:
        return math.inf
    return acc / (rates.r - acc)
