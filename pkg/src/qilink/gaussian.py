"""Zero-mean two-mode Gaussian states described by their second moments.

A state is fixed by the two mode occupations and two real cross-correlations,

    n_k  = <a_k^dag a_k>,   c_ps = <a_1 a_2>,   c_pi = <a_1^dag a_2>,

with all single-mode phase-sensitive moments <a_k a_k> equal to zero. Every
state reachable from a two-mode squeezed vacuum through the passive and
phase-insensitive operations below stays in this family.

Quadrature convention: q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)), so
the vacuum has <q^2> = <p^2> = 1/2 and a thermal mode of occupation n has
quadrature variance n + 1/2. In (q1, p1, q2, p2) ordering the covariance
matrix is

    [[n1 + 1/2, 0,        c_pi + c_ps, 0          ],
     [0,        n1 + 1/2, 0,           c_pi - c_ps],
     [c_pi + c_ps, 0,     n2 + 1/2,    0          ],
     [0, c_pi - c_ps,     0,           n2 + 1/2   ]]

and a symplectic eigenvalue nu maps back to the thermal occupation nu - 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PhysicalityError

VACUUM_NU = 0.5
PHYSICALITY_TOL = 1e-9
CLASSICALITY_RTOL = 1e-9


@dataclass(frozen=True)
class SingleModeMoments:
    """Thermal single-mode state with mean photon number ``n``."""

    n: float

    def __post_init__(self):
        if not self.n >= 0:
            raise DomainError(f"mean photon number must be >= 0, got {self.n}")


@dataclass(frozen=True)
class TwoModeMoments:
    """Second moments of a zero-mean two-mode Gaussian state.

    Attributes:
        n1: Mean photon number of mode 1.
        n2: Mean photon number of mode 2.
        c_ps: Phase-sensitive cross-correlation <a1 a2>.
        c_pi: Phase-insensitive cross-correlation <a1^dag a2>.
    """

    n1: float
    n2: float
    c_ps: float = 0.0
    c_pi: float = 0.0

    def __post_init__(self):
        if not (self.n1 >= 0 and self.n2 >= 0):
            raise DomainError(
                f"mode occupations must be >= 0, got n1={self.n1}, n2={self.n2}"
            )

    def covariance_matrix(self) -> np.ndarray:
        """Quadrature covariance matrix in (q1, p1, q2, p2) ordering."""
        a = self.n1 + 0.5
        b = self.n2 + 0.5
        cq = self.c_pi + self.c_ps
        cp = self.c_pi - self.c_ps
        return np.array(
            [
                [a, 0.0, cq, 0.0],
                [0.0, a, 0.0, cp],
                [cq, 0.0, b, 0.0],
                [0.0, cp, 0.0, b],
            ]
        )

    def swapped(self) -> TwoModeMoments:
        """Same state with the mode labels exchanged."""
        # <a2^dag a1> is the conjugate of c_pi, which is real here.
        return TwoModeMoments(self.n2, self.n1, self.c_ps, self.c_pi)


def _check_mode(mode: int) -> None:
    if mode not in (1, 2):
        raise DomainError(f"mode selector must be 1 or 2, got {mode!r}")


def _with_mode(state: TwoModeMoments, mode: int, n: float, scale: float) -> TwoModeMoments:
    if mode == 1:
        return TwoModeMoments(n, state.n2, state.c_ps * scale, state.c_pi * scale)
    return TwoModeMoments(state.n1, n, state.c_ps * scale, state.c_pi * scale)


def _occupation(state: TwoModeMoments, mode: int) -> float:
    return state.n1 if mode == 1 else state.n2


def spdc_state(n_s: float) -> TwoModeMoments:
    """Two-mode squeezed vacuum with ``n_s`` photons per mode.

    Mode 1 is conventionally the idler and mode 2 the signal.
    """
    if not n_s >= 0:
        raise DomainError(f"source brightness must be >= 0, got {n_s}")
    return TwoModeMoments(n_s, n_s, math.sqrt(n_s * (n_s + 1.0)), 0.0)


def apply_loss(state: TwoModeMoments, mode: int, kappa: float) -> TwoModeMoments:
    """Pure-loss channel of transmissivity ``kappa`` on one mode."""
    _check_mode(mode)
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {kappa}")
    return _with_mode(state, mode, kappa * _occupation(state, mode), math.sqrt(kappa))


def apply_bpsk(state: TwoModeMoments, mode: int, bit: int) -> TwoModeMoments:
    """Binary phase shift (0 or pi) on one mode; ``bit`` is +1 or -1."""
    _check_mode(mode)
    if bit not in (1, -1):
        raise DomainError(f"bit must be +1 or -1, got {bit!r}")
    return _with_mode(state, mode, _occupation(state, mode), float(bit))


def apply_phase_insensitive_amp(
    state: TwoModeMoments, mode: int, gain: float, n_ase_out: float
) -> TwoModeMoments:
    """Phase-insensitive amplifier with gain ``gain`` adding ``n_ase_out`` photons.

    ``n_ase_out`` is the spontaneous-emission occupation at the amplifier
    output and can never fall below the quantum floor ``gain - 1``.
    """
    _check_mode(mode)
    if not gain >= 1.0:
        raise DomainError(f"amplifier gain must be >= 1, got {gain}")
    if n_ase_out < (gain - 1.0) * (1.0 - 1e-12):
        raise PhysicalityError(
            f"added noise {n_ase_out} is below the quantum limit gain - 1 = {gain - 1.0}"
        )
    n = gain * _occupation(state, mode) + n_ase_out
    return _with_mode(state, mode, n, math.sqrt(gain))


def apply_beam_splitter(state: TwoModeMoments, kappa: float) -> TwoModeMoments:
    """Mix the two modes on a beam splitter of transmissivity ``kappa``.

    Uses a1' = sqrt(k) a1 + sqrt(1-k) a2 and a2' = sqrt(1-k) a1 - sqrt(k) a2.
    With mode 2 in vacuum this is a tap: mode 1 keeps fraction ``kappa`` and
    mode 2 receives the rest, phase-insensitively correlated with mode 1.

    Mixing modes that share a phase-sensitive correlation would create
    single-mode squeezing, which this representation cannot hold, so a
    nonzero ``c_ps`` is rejected unless the splitter is trivial.
    """
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {kappa}")
    t, r = kappa, 1.0 - kappa
    tr = math.sqrt(t * r)
    if tr > 0.0 and state.c_ps != 0.0:
        raise DomainError("beam splitter on modes with phase-sensitive correlation")
    n1 = t * state.n1 + r * state.n2 + 2.0 * tr * state.c_pi
    n2 = r * state.n1 + t * state.n2 - 2.0 * tr * state.c_pi
    c_pi = tr * (state.n1 - state.n2) + (r - t) * state.c_pi
    c_ps = (r - t) * state.c_ps
    # Rounding can push an exactly-empty port a hair below zero.
    return TwoModeMoments(max(n1, 0.0), max(n2, 0.0), c_ps, c_pi)


def opa_output_occupation(state: TwoModeMoments, gain: float, eta_d: float = 1.0) -> float:
    """Idler-port occupation of a parametric amplifier.

    Mode 1 enters the idler port and mode 2 the signal port, so the output is
    a_out = sqrt(G) a_1 + sqrt(G - 1) a_2^dag. ``eta_d`` degrades only the
    interference term that converts ``c_ps`` into intensity.
    """
    if not gain >= 1.0:
        raise DomainError(f"amplifier gain must be >= 1, got {gain}")
    g1 = gain - 1.0
    return (
        gain * state.n1
        + g1 * (1.0 + state.n2)
        + 2.0 * eta_d * math.sqrt(gain * g1) * state.c_ps
    )


def interference_output_occupation(
    state: TwoModeMoments, eta: float, eta_d: float = 1.0
) -> float:
    """Occupation of sqrt(eta) a_1 + sqrt(1 - eta) a_2 after interfering the modes.

    ``eta_d`` degrades only the interference term that converts ``c_pi`` into
    intensity.
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"mixing transmissivity must lie in [0, 1], got {eta}")
    return (
        eta * state.n1
        + (1.0 - eta) * state.n2
        + 2.0 * eta_d * math.sqrt(eta * (1.0 - eta)) * state.c_pi
    )


def symplectic_eigenvalues(state: TwoModeMoments) -> tuple[float, float]:
    """Symplectic eigenvalues (nu_plus, nu_minus) with nu_plus >= nu_minus.

    The covariance matrix splits into a q block and a p block, so nu^2 are the
    eigenvalues of V_q V_p. The small root is taken as det(V)/nu_plus^2 rather
    than by subtraction, which keeps it accurate for strongly asymmetric
    states such as a weak mode correlated with a bright one.

    Raises:
        PhysicalityError: if nu_minus falls below the vacuum value by more
            than ``PHYSICALITY_TOL``.
    """
    a = state.n1 + 0.5
    b = state.n2 + 0.5
    cq = state.c_pi + state.c_ps
    cp = state.c_pi - state.c_ps
    det_q = a * b - cq * cq
    det_p = a * b - cp * cp
    det_v = det_q * det_p
    delta = a * a + b * b + 2.0 * cq * cp
    disc = (a * a - b * b) ** 2 + 4.0 * (a * cp + b * cq) * (a * cq + b * cp)
    nu_plus_sq = 0.5 * (delta + math.sqrt(max(disc, 0.0)))
    if det_q <= 0.0 or det_p <= 0.0 or nu_plus_sq <= 0.0:
        raise PhysicalityError(f"covariance matrix is not positive definite: {state}")
    nu_plus = math.sqrt(nu_plus_sq)
    nu_minus = math.sqrt(det_v) / nu_plus
    if nu_minus < VACUUM_NU - PHYSICALITY_TOL:
        raise PhysicalityError(
            f"smallest symplectic eigenvalue {nu_minus!r} is below the vacuum value: {state}"
        )
    return nu_plus, nu_minus


def is_physical(state: TwoModeMoments) -> bool:
    try:
        symplectic_eigenvalues(state)
    except PhysicalityError:
        return False
    return True


def entropy_g(n):
    """Von Neumann entropy in bits of a thermal mode with mean photon number ``n``.

    g(n) = (n+1) log2(n+1) - n log2(n), evaluated as log2(n+1) + n log(1 + 1/n)/ln 2,
    which avoids cancellation between the two large terms when n is large.
    Accepts scalars or arrays; g(0) = 0.
    """
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0) or np.any(np.isnan(n_arr)):
        raise DomainError(f"mean photon number must be >= 0, got {n}")
    # n log(1 + 1/n): log1p(1/n) for n >= 1, log1p(n) - log(n) below so 1/n cannot overflow
    safe = np.where(n_arr > 0, n_arr, 1.0)
    tail = np.where(
        n_arr >= 1.0,
        n_arr * np.log1p(1.0 / np.maximum(safe, 1.0)),
        n_arr * (np.log1p(safe) - np.log(safe)),
    )
    out = np.log1p(n_arr) / math.log(2.0) + tail / math.log(2.0)
    return float(out) if out.ndim == 0 else out


def gaussian_state_entropy(state: TwoModeMoments) -> float:
    """Von Neumann entropy in bits of a two-mode Gaussian state."""
    nus = symplectic_eigenvalues(state)
    return sum(entropy_g(max(nu - VACUUM_NU, 0.0)) for nu in nus)


def mutual_information(state: TwoModeMoments) -> float:
    """Quantum mutual information g(n1) + g(n2) - S(state), in bits."""
    return entropy_g(state.n1) + entropy_g(state.n2) - gaussian_state_entropy(state)


def is_classical_phase_sensitive(state: TwoModeMoments) -> bool:
    """True when the phase-sensitive correlation obeys c_ps^2 <= n1 n2.

    The boundary is tested with relative tolerance ``CLASSICALITY_RTOL``.
    """
    lhs = state.c_ps * state.c_ps
    rhs = state.n1 * state.n2
    return lhs - rhs <= CLASSICALITY_RTOL * max(lhs, rhs)


def max_phase_sensitive_correlation(n1: float, n2: float) -> float:
    """Largest |c_ps| allowed by quantum mechanics for the given occupations."""
    return math.sqrt(n1 * n2 + min(n1, n2))


__all__ = [
    "SingleModeMoments",
    "TwoModeMoments",
    "apply_beam_splitter",
    "apply_bpsk",
    "apply_loss",
    "apply_phase_insensitive_amp",
    "entropy_g",
    "gaussian_state_entropy",
    "interference_output_occupation",
    "is_classical_phase_sensitive",
    "is_physical",
    "max_phase_sensitive_correlation",
    "mutual_information",
    "opa_output_occupation",
    "spdc_state",
    "symplectic_eigenvalues",
]
