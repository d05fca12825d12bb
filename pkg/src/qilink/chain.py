"""Per-mode photon statistics of the Alice-Bob-Eve optical chain.

The signal path runs

    SPDC -> kappa_A -> kappa_1 split (Eve taps 1 - kappa_1) -> kappa_B -> BPSK
         -> EDFA(G_B, N_B) -> kappa_B' -> kappa_2 split (Eve taps 1 - kappa_2)
         -> kappa_A' -> Alice's OPA signal port

while the idler is held in Alice's terminal behind kappa_I. Alice detects the
OPA idler port through kappa_d; Eve attenuates her Bob-to-Alice tap by
kappa_E, interferes it with her Alice-to-Bob tap on a splitter of
transmissivity eta_E, and detects through kappa_d'.

Every quantity is available twice: as a closed-form expression, and through
``compose_chain_oracle``, which builds the same states by pushing a Gaussian
state through the individual operations in ``qilink.gaussian``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple, Optional

from . import gaussian as gc
from .errors import DomainError

_TRANSMISSIVITIES = (
    "kappa_A",
    "kappa_1",
    "kappa_B",
    "kappa_B_prime",
    "kappa_2",
    "kappa_A_prime",
    "kappa_I",
    "kappa_d",
    "kappa_E",
    "eta_E",
    "kappa_d_prime",
    "eta_d_A",
    "eta_d_E",
)


@dataclass(frozen=True)
class LinkParams:
    """Transmissivities, gains and noise of the link. Defaults are the measured values.

    ``M`` is the number of signal-idler mode pairs per bit. When both the
    fluorescence bandwidth ``W`` (Hz) and the bit duration ``T`` (s) are given,
    ``M`` must equal round(T * W).
    """

    kappa_A: float = 0.74
    kappa_1: float = 0.50
    kappa_B: float = 0.43
    G_B: float = 1.34e4
    N_B: float = 1.46e4
    kappa_B_prime: float = 0.39
    kappa_2: float = 0.90
    kappa_A_prime: float = 0.41
    kappa_I: float = 0.39
    G_A: float = 1.0 + 1.86e-5
    kappa_d: float = 0.45
    eta_d_A: float = 0.52
    M: int = 4_000_000
    kappa_E: float = 0.013
    eta_E: float = 0.99
    kappa_d_prime: float = 0.5
    eta_d_E: float = 0.17
    W: Optional[float] = 2e12
    T: Optional[float] = 2e-6

    def __post_init__(self):
        for name in _TRANSMISSIVITIES:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        if not self.G_B >= 1.0:
            raise DomainError(f"G_B must be >= 1, got {self.G_B}")
        if not self.G_A >= 1.0:
            raise DomainError(f"G_A must be >= 1, got {self.G_A}")
        if not self.N_B >= (self.G_B - 1.0) * (1.0 - 1e-12):
            raise DomainError(
                f"N_B must be >= G_B - 1 = {self.G_B - 1.0} (amplifier noise floor), got {self.N_B}"
            )
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M}")
        if self.W is not None and self.T is not None:
            if self.W <= 0 or self.T <= 0:
                raise DomainError(f"W and T must be positive, got W={self.W}, T={self.T}")
            if round(self.T * self.W) != self.M:
                raise DomainError(
                    f"M={self.M} is inconsistent with round(T*W)={round(self.T * self.W)}"
                )

    @property
    def g_a_excess(self) -> float:
        """OPA excess gain G_A - 1."""
        return self.G_A - 1.0

    @property
    def return_gain(self) -> float:
        """Signal power gain from the source to Alice's OPA signal port."""
        return (
            self.kappa_A_prime * self.kappa_2 * self.kappa_B_prime * self.G_B
            * self.kappa_B * self.kappa_1 * self.kappa_A
        )

    def ideal_receiver(self) -> LinkParams:
        """Copy with lossless detection and full modulation-depth efficiency."""
        return replace(self, eta_d_A=1.0, eta_d_E=1.0, kappa_d=1.0, kappa_d_prime=1.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class ModePairStats:
    """Mean detected photons per mode for bit +1 and bit -1."""

    n_plus: float
    n_minus: float

    def __post_init__(self):
        if not (self.n_plus >= 0 and self.n_minus >= 0):
            raise DomainError(f"occupations must be >= 0, got {self.n_plus}, {self.n_minus}")

    @property
    def depth(self) -> float:
        return self.n_plus - self.n_minus

    def occupation(self, bit: int) -> float:
        _check_bit(bit)
        return self.n_plus if bit == 1 else self.n_minus


@dataclass(frozen=True)
class EveTapMoments:
    """Moments of Eve's two tapped modes, conditioned on Bob's bit.

    ``n_e1`` is the Alice-to-Bob tap, ``n_e3`` the Bob-to-Alice tap, and
    ``c_pi_plus`` = <a_E1^dag a_E3> for bit +1 (bit -1 flips its sign).
    """

    n_e1: float
    n_e3: float
    c_pi_plus: float

    @property
    def c_pi_minus(self) -> float:
        return -self.c_pi_plus

    def state(self, bit: int) -> gc.TwoModeMoments:
        """Conditional two-mode state (E1, E3) for the given bit."""
        return gc.TwoModeMoments(self.n_e1, self.n_e3, 0.0, bit * self.c_pi_plus)


class ChainStates(NamedTuple):
    """States produced by ``compose_chain_oracle`` for one bit value.

    ``alice`` is (retained idler, returned signal) at the OPA input;
    ``eve`` is (Alice-to-Bob tap, Bob-to-Alice tap) as extracted from the link.
    """

    alice: gc.TwoModeMoments
    eve: gc.TwoModeMoments


def _check_ns(n_s: float) -> None:
    if not n_s >= 0:
        raise DomainError(f"source brightness must be >= 0, got {n_s}")


def _check_bit(bit: int) -> None:
    if bit not in (1, -1):
        raise DomainError(f"bit must be +1 or -1, got {bit!r}")


def _alice_direct_terms(p: LinkParams, n_s: float) -> float:
    g1 = p.g_a_excess
    return p.kappa_d * (
        p.G_A * p.kappa_I * n_s
        + g1
        + g1 * p.return_gain * n_s
        + g1 * p.kappa_A_prime * p.kappa_2 * p.kappa_B_prime * p.N_B
    )


def _alice_cross_term(p: LinkParams, correlation: float) -> float:
    """Half the modulation depth for a source phase-sensitive correlation."""
    return (
        2.0 * p.eta_d_A * p.kappa_d
        * math.sqrt(p.G_A * p.g_a_excess * p.kappa_I * p.return_gain)
        * correlation
    )


def alice_mode_stats(params: LinkParams, n_s: float) -> ModePairStats:
    """Alice's mean photons per mode at the OPA idler-port detector."""
    _check_ns(n_s)
    direct = _alice_direct_terms(params, n_s)
    cross = _alice_cross_term(params, math.sqrt(n_s * (n_s + 1.0)))
    return ModePairStats(direct + cross, direct - cross)


def classical_alice_mode_stats(params: LinkParams, n_s: float) -> ModePairStats:
    """As ``alice_mode_stats`` for a classical source whose correlation is n_s."""
    _check_ns(n_s)
    direct = _alice_direct_terms(params, n_s)
    cross = _alice_cross_term(params, n_s)
    return ModePairStats(direct + cross, direct - cross)


def alice_modulation_depth(params: LinkParams, n_s: float) -> float:
    """N_A^+ - N_A^- for the entangled source."""
    _check_ns(n_s)
    return 2.0 * _alice_cross_term(params, math.sqrt(n_s * (n_s + 1.0)))


def classical_alice_modulation_depth(params: LinkParams, n_s: float) -> float:
    """N_A^+ - N_A^- when the source correlation sits at the classical limit n_s."""
    _check_ns(n_s)
    return 2.0 * _alice_cross_term(params, n_s)


def eve_tap_moments(params: LinkParams, n_s: float, bit: int = 1) -> EveTapMoments:
    """Occupations and correlation of Eve's two tapped modes.

    The returned ``c_pi_plus`` already carries the sign of ``bit``: for
    bit = -1 it holds the bit -1 correlation.
    """
    _check_ns(n_s)
    _check_bit(bit)
    p = params
    tap1 = 1.0 - p.kappa_1
    tap2 = 1.0 - p.kappa_2
    amp_signal = p.G_B * p.kappa_B * p.kappa_1 * p.kappa_A
    n_e1 = tap1 * p.kappa_A * n_s
    n_e3 = tap2 * p.kappa_B_prime * amp_signal * n_s + tap2 * p.kappa_B_prime * p.N_B
    c = math.sqrt(
        p.kappa_A**2 * tap1 * tap2 * p.kappa_B_prime * p.G_B * p.kappa_B * p.kappa_1
    ) * n_s
    return EveTapMoments(n_e1, n_e3, bit * c)


def eve_mode_stats(params: LinkParams, n_s: float) -> ModePairStats:
    """Eve's mean photons per mode at her interference-receiver detector."""
    _check_ns(n_s)
    p = params
    tap1 = 1.0 - p.kappa_1
    tap2 = 1.0 - p.kappa_2
    eta = p.eta_E
    direct = p.kappa_d_prime * (
        eta * tap1 * p.kappa_A * n_s
        + (1.0 - eta) * p.kappa_E * tap2 * p.kappa_B_prime
        * (p.G_B * p.kappa_B * p.kappa_1 * p.kappa_A * n_s + p.N_B)
    )
    cross = 2.0 * p.eta_d_E * p.kappa_d_prime * math.sqrt(
        eta * (1.0 - eta) * tap1 * p.kappa_A**2 * p.kappa_E * tap2
        * p.kappa_B_prime * p.G_B * p.kappa_B * p.kappa_1
    ) * n_s
    return ModePairStats(direct + cross, direct - cross)


def eve_modulation_depth(params: LinkParams, n_s: float) -> float:
    return eve_mode_stats(params, n_s).depth


def classicality_threshold(params: LinkParams) -> float:
    """ASE occupation N_B above which Alice's returned and retained light is classical."""
    return params.kappa_1 * params.kappa_A * params.kappa_B * params.G_B


def classicality_margin_db(params: LinkParams) -> float:
    """How far N_B sits above the classicality threshold, in dB."""
    return 10.0 * math.log10(params.N_B / classicality_threshold(params))


def compose_chain_oracle(params: LinkParams, n_s: float, bit: int = 1) -> ChainStates:
    """Propagate the source through every element of the chain, one operation at a time.

    Two two-mode tracks are followed through the same signal path: Alice's
    (idler, signal) pair, and Eve's (signal, Alice-to-Bob tap) pair. A tap
    whose other port is never revisited acts on the tracked mode as plain loss.
    """
    _check_ns(n_s)
    _check_bit(bit)
    p = params

    # Alice's track: mode 1 = idler, mode 2 = signal.
    alice = gc.spdc_state(n_s)
    alice = gc.apply_loss(alice, 1, p.kappa_I)
    for kappa in (p.kappa_A, p.kappa_1, p.kappa_B):
        alice = gc.apply_loss(alice, 2, kappa)
    alice = gc.apply_bpsk(alice, 2, bit)
    alice = gc.apply_phase_insensitive_amp(alice, 2, p.G_B, p.N_B)
    for kappa in (p.kappa_B_prime, p.kappa_2, p.kappa_A_prime):
        alice = gc.apply_loss(alice, 2, kappa)

    # Eve's track: mode 1 = signal, mode 2 = vacuum port of Eve's first splitter.
    eve = gc.TwoModeMoments(n_s, 0.0)
    eve = gc.apply_loss(eve, 1, p.kappa_A)
    eve = gc.apply_beam_splitter(eve, p.kappa_1)
    eve = gc.apply_loss(eve, 1, p.kappa_B)
    eve = gc.apply_bpsk(eve, 1, bit)
    eve = gc.apply_phase_insensitive_amp(eve, 1, p.G_B, p.N_B)
    eve = gc.apply_loss(eve, 1, p.kappa_B_prime)
    eve = gc.apply_loss(eve, 1, 1.0 - p.kappa_2)
    return ChainStates(alice=alice, eve=eve.swapped())


def oracle_alice_occupation(params: LinkParams, n_s: float, bit: int, *, classical: bool = False) -> float:
    """Alice's detected occupation computed from the composed chain.

    With ``classical`` the source correlation is lowered to n_s before
    propagation, modelling a maximally correlated classical source.
    """
    states = compose_chain_oracle(params, n_s, bit)
    alice = states.alice
    if classical and n_s > 0:
        alice = gc.TwoModeMoments(
            alice.n1, alice.n2, alice.c_ps * n_s / math.sqrt(n_s * (n_s + 1.0)), alice.c_pi
        )
    return params.kappa_d * gc.opa_output_occupation(alice, params.G_A, params.eta_d_A)


def oracle_eve_occupation(params: LinkParams, n_s: float, bit: int) -> float:
    """Eve's detected occupation computed from the composed chain."""
    eve = compose_chain_oracle(params, n_s, bit).eve
    eve = gc.apply_loss(eve, 2, params.kappa_E)
    return params.kappa_d_prime * gc.interference_output_occupation(
        eve, params.eta_E, params.eta_d_E
    )


def alice_returned_state_is_classical(params: LinkParams, n_s: float = 1e-3) -> bool:
    """Classicality of Alice's returned/retained pair, from the composed chain."""
    return gc.is_classical_phase_sensitive(compose_chain_oracle(params, n_s, 1).alice)
