"""Alice's Shannon information, a bound on Eve's Holevo information, and their gap.

All quantities are per transmitted bit. Eve's bound treats her M tapped mode
pairs as independent: the unconditional state has the covariance of 2M thermal
modes, whose entropy caps S(unconditional), while the conditional states are
Gaussian and their entropies follow from the symplectic spectrum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from . import gaussian as gc
from .chain import LinkParams, eve_tap_moments
from .detection import ReceiverNoiseParams, ber_alice
from .errors import DomainError, PhysicalityError

log = logging.getLogger(__name__)

NEGATIVE_CHI_TOL = 1e-9


@dataclass(frozen=True)
class InfoResult:
    """Information per transmitted bit.

    Attributes:
        i_ab: Alice's Shannon information.
        chi_ub: Upper bound on Eve's Holevo information.
        delta_lb: Lower bound on Alice's advantage, i_ab - chi_ub.
        ber_a: Alice's bit-error rate behind ``i_ab``.
    """

    i_ab: float
    chi_ub: float
    delta_lb: float
    ber_a: float


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log1p(-p) / math.log(2.0))


def shannon_info_bsc(ber: float) -> float:
    """Mutual information 1 - h2(ber) of a binary symmetric channel with equiprobable input."""
    if not 0.0 <= ber <= 0.5:
        raise DomainError(f"bit-error rate must lie in [0, 0.5], got {ber}")
    return 1.0 - binary_entropy(ber)


def eve_conditional_entropy(params: LinkParams, n_s: float, bit: int) -> float:
    """Entropy in bits of one of Eve's mode pairs given Bob's bit."""
    return gc.gaussian_state_entropy(eve_tap_moments(params, n_s, 1).state(bit))


def holevo_upper_bound(params: LinkParams, n_s: float) -> float:
    """Upper bound on Eve's Holevo information per transmitted bit.

    M [g(N_E1) + g(N_E3)] - M [S(+) + S(-)] / 2, evaluated per mode and scaled
    by M. Round-off below zero within ``NEGATIVE_CHI_TOL`` is clamped with a
    warning; anything larger is a numerical failure.
    """
    taps = eve_tap_moments(params, n_s, 1)
    thermal = gc.entropy_g(taps.n_e1) + gc.entropy_g(taps.n_e3)
    conditional = 0.5 * (
        gc.gaussian_state_entropy(taps.state(1)) + gc.gaussian_state_entropy(taps.state(-1))
    )
    chi = params.M * (thermal - conditional)
    if chi < 0.0:
        if chi < -NEGATIVE_CHI_TOL:
            raise PhysicalityError(f"Holevo bound came out negative ({chi}) at n_s={n_s}")
        log.warning("clamping Holevo bound %.3e to zero at n_s=%g", chi, n_s)
        chi = 0.0
    return chi


def info_advantage(params: LinkParams, noise: ReceiverNoiseParams, n_s: float) -> InfoResult:
    ber = ber_alice(params, noise, n_s)
    i_ab = shannon_info_bsc(ber)
    chi = holevo_upper_bound(params, n_s)
    return InfoResult(i_ab=i_ab, chi_ub=chi, delta_lb=i_ab - chi, ber_a=ber)
