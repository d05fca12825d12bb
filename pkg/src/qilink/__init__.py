"""Gaussian-state simulator of an entanglement-assisted, eavesdropping-immune optical link."""

__version__ = "0.1.0"

from .chain import (
    EveTapMoments,
    LinkParams,
    ModePairStats,
    alice_mode_stats,
    alice_modulation_depth,
    classical_alice_modulation_depth,
    classicality_margin_db,
    classicality_threshold,
    compose_chain_oracle,
    eve_mode_stats,
    eve_tap_moments,
)
from .detection import (
    ConditionalDecisionStats,
    ReceiverNoiseParams,
    ber_alice,
    ber_alice_classical,
    ber_eve,
    q_function,
)
from .errors import ConfigError, DomainError, PhysicalityError, QilinkError
from .gaussian import TwoModeMoments, spdc_state
from .info import InfoResult, holevo_upper_bound, info_advantage, shannon_info_bsc

__all__ = [
    "ConditionalDecisionStats",
    "ConfigError",
    "DomainError",
    "EveTapMoments",
    "InfoResult",
    "LinkParams",
    "ModePairStats",
    "PhysicalityError",
    "QilinkError",
    "ReceiverNoiseParams",
    "TwoModeMoments",
    "alice_mode_stats",
    "alice_modulation_depth",
    "ber_alice",
    "ber_alice_classical",
    "ber_eve",
    "classical_alice_modulation_depth",
    "classicality_margin_db",
    "classicality_threshold",
    "compose_chain_oracle",
    "eve_mode_stats",
    "eve_tap_moments",
    "holevo_upper_bound",
    "info_advantage",
    "q_function",
    "shannon_info_bsc",
    "spdc_state",
]
