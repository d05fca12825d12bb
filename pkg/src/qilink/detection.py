"""Receiver noise, M-mode aggregation and threshold-test bit-error rates.

Each receiver sums M conditionally independent mode-pair photocounts per bit.
By the central limit theorem the sum is Gaussian with mean M n_{+/-} and
variance M sigma_tot^2, and a threshold test between two Gaussians with
unequal variances gives

    BER = Q((m_+ - m_-) / (sigma_+ + sigma_-))

when the threshold equalizes the false-alarm and miss probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .chain import (
    LinkParams,
    ModePairStats,
    alice_mode_stats,
    classical_alice_mode_stats,
    eve_mode_stats,
)
from .errors import DomainError


@dataclass(frozen=True)
class ReceiverNoiseParams:
    """Technical noise of a direct-detection receiver.

    Attributes:
        f_apd: APD excess-noise figure (>= 1).
        sigma_d_sq: Electronics-noise variance per mode.
        pump_fluct_fraction: Extra variance from pump-power fluctuations, as a
            fraction of the Bose-Einstein variance.
    """

    f_apd: float = 1.0
    sigma_d_sq: float = 0.0
    pump_fluct_fraction: float = 0.0

    def __post_init__(self):
        if not self.f_apd >= 1.0:
            raise DomainError(f"f_apd must be >= 1, got {self.f_apd}")
        if not self.sigma_d_sq >= 0.0:
            raise DomainError(f"sigma_d_sq must be >= 0, got {self.sigma_d_sq}")
        if not self.pump_fluct_fraction >= 0.0:
            raise DomainError(
                f"pump_fluct_fraction must be >= 0, got {self.pump_fluct_fraction}"
            )

    @classmethod
    def ideal(cls) -> ReceiverNoiseParams:
        return cls(1.0, 0.0, 0.0)

    @classmethod
    def alice_default(cls) -> ReceiverNoiseParams:
        return cls(f_apd=3.0, sigma_d_sq=6.0e-3, pump_fluct_fraction=0.2)

    @classmethod
    def eve_default(cls) -> ReceiverNoiseParams:
        return cls(f_apd=3.0, sigma_d_sq=6.0e-3, pump_fluct_fraction=0.0)

    @property
    def excess_factor(self) -> float:
        """Multiplier of the Bose-Einstein variance before electronics noise."""
        return self.f_apd * (1.0 + self.pump_fluct_fraction)


@dataclass(frozen=True)
class ConditionalDecisionStats:
    """Means and standard deviations of the per-bit decision statistic."""

    m_plus: float
    m_minus: float
    sigma_plus: float
    sigma_minus: float

    def __post_init__(self):
        if not (self.sigma_plus > 0 and self.sigma_minus > 0):
            raise DomainError(
                f"standard deviations must be positive, got {self.sigma_plus}, {self.sigma_minus}"
            )
        if self.m_plus < self.m_minus:
            raise DomainError(f"m_plus ({self.m_plus}) must be >= m_minus ({self.m_minus})")


def bose_einstein_variance(n: float) -> float:
    """Photocount variance n(n+1) of a thermal mode."""
    if not n >= 0:
        raise DomainError(f"mean photon number must be >= 0, got {n}")
    return n * (n + 1.0)


def total_mode_variance(be_var: float, noise: ReceiverNoiseParams) -> float:
    return noise.excess_factor * be_var + noise.sigma_d_sq


def aggregate_bit_stats(
    per_mode: ModePairStats,
    noise: ReceiverNoiseParams,
    m_modes: int,
    *,
    variance_source: ModePairStats | None = None,
) -> ConditionalDecisionStats:
    """Sum ``m_modes`` independent modes into per-bit decision statistics.

    Args:
        per_mode: Mean occupations that set the conditional means.
        noise: Receiver technical noise.
        m_modes: Mode pairs per bit.
        variance_source: Occupations that set the Bose-Einstein variances,
            when they differ from ``per_mode``.
    """
    if m_modes < 1:
        raise DomainError(f"m_modes must be >= 1, got {m_modes}")
    var_src = per_mode if variance_source is None else variance_source
    var_plus = total_mode_variance(bose_einstein_variance(var_src.n_plus), noise)
    var_minus = total_mode_variance(bose_einstein_variance(var_src.n_minus), noise)
    return ConditionalDecisionStats(
        m_plus=m_modes * per_mode.n_plus,
        m_minus=m_modes * per_mode.n_minus,
        sigma_plus=math.sqrt(m_modes * var_plus),
        sigma_minus=math.sqrt(m_modes * var_minus),
    )


def q_function(x):
    """Standard Gaussian tail probability Q(x) = erfc(x / sqrt(2)) / 2."""
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def decision_threshold(stats: ConditionalDecisionStats) -> float:
    """Threshold at which false-alarm and miss probabilities coincide."""
    s = stats
    # (m+ s- + m- s+)/(s+ + s-), written as an offset from m- to limit cancellation
    return s.m_minus + (s.m_plus - s.m_minus) * s.sigma_minus / (s.sigma_plus + s.sigma_minus)


def error_probabilities(stats: ConditionalDecisionStats, threshold: float) -> tuple[float, float]:
    """(P_F, P_M) for the rule "say +1 when x >= threshold"."""
    p_false_alarm = q_function((threshold - stats.m_minus) / stats.sigma_minus)
    p_miss = q_function((stats.m_plus - threshold) / stats.sigma_plus)
    return p_false_alarm, p_miss


def q_argument(stats: ConditionalDecisionStats) -> float:
    return (stats.m_plus - stats.m_minus) / (stats.sigma_plus + stats.sigma_minus)


def ber_from_stats(stats: ConditionalDecisionStats) -> float:
    return q_function(q_argument(stats))


def alice_decision_stats(
    params: LinkParams, noise: ReceiverNoiseParams, n_s: float
) -> ConditionalDecisionStats:
    return aggregate_bit_stats(alice_mode_stats(params, n_s), noise, params.M)


def alice_classical_decision_stats(
    params: LinkParams,
    noise: ReceiverNoiseParams,
    n_s: float,
    *,
    classical_variances: bool = False,
) -> ConditionalDecisionStats:
    """Decision statistics for a classical source with maximal correlation.

    By default the variances are those of the entangled-source receiver, so
    only the modulation depth changes. ``classical_variances`` evaluates the
    Bose-Einstein variances at the classical source's own occupations.
    """
    classical = classical_alice_mode_stats(params, n_s)
    var_src = classical if classical_variances else alice_mode_stats(params, n_s)
    return aggregate_bit_stats(classical, noise, params.M, variance_source=var_src)


def eve_decision_stats(
    params: LinkParams,
    noise: ReceiverNoiseParams,
    n_s: float,
    *,
    literal_variance: bool = False,
) -> ConditionalDecisionStats:
    """Decision statistics of Eve's interference receiver.

    ``literal_variance`` substitutes Alice's Bose-Einstein variances for
    Eve's own, for comparison against that reading of the noise model.
    """
    per_mode = eve_mode_stats(params, n_s)
    var_src = alice_mode_stats(params, n_s) if literal_variance else None
    return aggregate_bit_stats(per_mode, noise, params.M, variance_source=var_src)


def ber_alice(params: LinkParams, noise: ReceiverNoiseParams, n_s: float) -> float:
    return ber_from_stats(alice_decision_stats(params, noise, n_s))


def ber_alice_classical(
    params: LinkParams,
    noise: ReceiverNoiseParams,
    n_s: float,
    *,
    classical_variances: bool = False,
) -> float:
    return ber_from_stats(
        alice_classical_decision_stats(
            params, noise, n_s, classical_variances=classical_variances
        )
    )


def ber_eve(
    params: LinkParams,
    noise: ReceiverNoiseParams,
    n_s: float,
    *,
    literal_variance: bool = False,
) -> float:
    return ber_from_stats(
        eve_decision_stats(params, noise, n_s, literal_variance=literal_variance)
    )


def ase_variance_fraction(
    params: LinkParams, noise: ReceiverNoiseParams, n_s: float
) -> tuple[float, float]:
    """Share of Alice's total per-mode variance that is Bose-Einstein, for bits +1 and -1."""
    stats = alice_mode_stats(params, n_s)
    out = []
    for n in (stats.n_plus, stats.n_minus):
        be = bose_einstein_variance(n)
        out.append(be / total_mode_variance(be, noise))
    return out[0], out[1]
