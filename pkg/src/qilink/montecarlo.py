"""Monte-Carlo cross-check of the analytic bit-error rates.

Each simulated bit sums ``m_modes`` Bose-Einstein photocounts (a sum of
geometric variables is negative-binomial, which is sampled directly) and adds
Gaussian technical noise carrying the APD excess, pump-fluctuation and
electronics variances. The decision uses the analytic threshold.

Randomness is split by block: bits are processed in blocks of ``block_size``
and block ``k`` draws from the streams SeedSequence(seed, spawn_key=(s, k)),
s = 0 for the bit values and s = 1 for the statistics. Results therefore do
not depend on how blocks are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np
from scipy import optimize, stats

from .chain import LinkParams, ModePairStats, alice_mode_stats, eve_mode_stats
from .detection import (
    ReceiverNoiseParams,
    aggregate_bit_stats,
    ber_from_stats,
    decision_threshold,
)
from .errors import DomainError

SamplingMode = Literal["exact-geometric", "gaussian-clt"]
SAMPLING_MODES = ("exact-geometric", "gaussian-clt")


@dataclass(frozen=True)
class SimConfig:
    m_modes: int = 10_000
    n_bits: int = 100_000
    seed: int = 0
    sampling_mode: SamplingMode = "exact-geometric"
    block_size: int = 8192

    def __post_init__(self):
        if self.m_modes < 1:
            raise DomainError(f"m_modes must be >= 1, got {self.m_modes}")
        if self.n_bits < 100:
            raise DomainError(f"n_bits must be >= 100, got {self.n_bits}")
        if self.sampling_mode not in SAMPLING_MODES:
            raise DomainError(f"unknown sampling mode {self.sampling_mode!r}")
        if self.block_size < 1:
            raise DomainError(f"block_size must be >= 1, got {self.block_size}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class BerEstimate:
    """Empirical error rate with a 95% Wilson interval."""

    ber_hat: float
    ci_low: float
    ci_high: float
    n_errors: int
    n_bits: int

    @classmethod
    def from_counts(cls, n_errors: int, n_bits: int) -> BerEstimate:
        ci = stats.binomtest(n_errors, n_bits).proportion_ci(0.95, method="wilson")
        ber_hat = n_errors / n_bits
        return cls(ber_hat, min(float(ci.low), ber_hat), max(float(ci.high), ber_hat), n_errors, n_bits)

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


@dataclass(frozen=True)
class RoundTrip:
    """Per-bit record of an end-to-end emulation."""

    bits: np.ndarray
    statistics: np.ndarray
    decoded: np.ndarray
    threshold: float
    estimate: BerEstimate

    def waveform_records(self) -> Iterator[dict]:
        for i, (b, x, d) in enumerate(zip(self.bits, self.statistics, self.decoded)):
            yield {"index": i, "sign": int(b), "statistic": float(x), "decoded": int(d)}


def _technical_sd(n: np.ndarray, noise: ReceiverNoiseParams, m_modes: int) -> np.ndarray:
    var = (noise.excess_factor - 1.0) * n * (n + 1.0) + noise.sigma_d_sq
    return np.sqrt(m_modes * var)


def sample_statistics(
    per_mode: ModePairStats,
    noise: ReceiverNoiseParams,
    cfg: SimConfig,
    bits: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one decision statistic per entry of ``bits`` (values +1/-1)."""
    bits = np.asarray(bits)
    n = np.where(bits > 0, per_mode.n_plus, per_mode.n_minus)
    m = cfg.m_modes
    if cfg.sampling_mode == "exact-geometric":
        counts = rng.negative_binomial(m, 1.0 / (1.0 + n)).astype(float)
        return counts + rng.normal(0.0, 1.0, size=n.shape) * _technical_sd(n, noise, m)
    total_var = noise.excess_factor * n * (n + 1.0) + noise.sigma_d_sq
    return m * n + rng.normal(0.0, 1.0, size=n.shape) * np.sqrt(m * total_var)


def sample_bit_statistic(
    per_mode: ModePairStats,
    noise: ReceiverNoiseParams,
    cfg: SimConfig,
    bit: int,
    rng: np.random.Generator | None = None,
) -> float:
    if bit not in (1, -1):
        raise DomainError(f"bit must be +1 or -1, got {bit!r}")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    return float(sample_statistics(per_mode, noise, cfg, np.array([bit]), rng)[0])


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def per_mode_stats(params: LinkParams, n_s: float, receiver: str) -> ModePairStats:
    if receiver == "alice":
        return alice_mode_stats(params, n_s)
    if receiver == "eve":
        return eve_mode_stats(params, n_s)
    raise DomainError(f"receiver must be 'alice' or 'eve', got {receiver!r}")


def simulate_bits(
    per_mode: ModePairStats,
    noise: ReceiverNoiseParams,
    cfg: SimConfig,
    *,
    workers: int | None = None,
    bits: np.ndarray | None = None,
) -> RoundTrip:
    """Simulate ``cfg.n_bits`` bits and decode them with the analytic threshold.

    Args:
        bits: Optional fixed +1/-1 pattern; by default bits are drawn
            equiprobably from the seeded bit stream.
        workers: Thread count for block evaluation. Output is identical for
            any value.
    """
    threshold = decision_threshold(aggregate_bit_stats(per_mode, noise, cfg.m_modes))
    n_blocks = math.ceil(cfg.n_bits / cfg.block_size)
    if bits is not None:
        bits = np.asarray(bits, dtype=np.int8)
        if bits.shape != (cfg.n_bits,) or not np.all(np.abs(bits) == 1):
            raise DomainError("bit pattern must hold n_bits entries of +1/-1")

    def run_block(k: int) -> tuple[np.ndarray, np.ndarray]:
        lo = k * cfg.block_size
        hi = min(lo + cfg.block_size, cfg.n_bits)
        if bits is None:
            block_bits = (2 * _block_rng(cfg.seed, 0, k).integers(0, 2, hi - lo) - 1).astype(np.int8)
        else:
            block_bits = bits[lo:hi]
        x = sample_statistics(per_mode, noise, cfg, block_bits, _block_rng(cfg.seed, 1, k))
        return block_bits, x

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run_block, range(n_blocks)))
    else:
        blocks = [run_block(k) for k in range(n_blocks)]
    all_bits = np.concatenate([b for b, _ in blocks])
    statistic = np.concatenate([x for _, x in blocks])
    decoded = np.where(statistic >= threshold, 1, -1).astype(np.int8)
    n_errors = int(np.count_nonzero(decoded != all_bits))
    return RoundTrip(
        bits=all_bits,
        statistics=statistic,
        decoded=decoded,
        threshold=threshold,
        estimate=BerEstimate.from_counts(n_errors, cfg.n_bits),
    )


def empirical_ber(
    params: LinkParams,
    noise: ReceiverNoiseParams,
    n_s: float,
    cfg: SimConfig,
    *,
    receiver: str = "alice",
    workers: int | None = None,
) -> BerEstimate:
    """Empirical BER of ``receiver`` with ``cfg.m_modes`` modes per bit."""
    per_mode = per_mode_stats(params, n_s, receiver)
    return simulate_bits(per_mode, noise, cfg, workers=workers).estimate


def bitstream_roundtrip(
    params: LinkParams,
    noise: ReceiverNoiseParams,
    n_s: float,
    cfg: SimConfig,
    *,
    receiver: str = "alice",
    bits: np.ndarray | None = None,
) -> RoundTrip:
    per_mode = per_mode_stats(params, n_s, receiver)
    return simulate_bits(per_mode, noise, cfg, bits=bits)


def analytic_ber(params: LinkParams, noise: ReceiverNoiseParams, n_s: float, m_modes: int,
                 receiver: str = "alice") -> float:
    """Analytic BER with ``m_modes`` modes per bit instead of ``params.M``."""
    per_mode = per_mode_stats(params, n_s, receiver)
    return ber_from_stats(aggregate_bit_stats(per_mode, noise, m_modes))


def n_s_for_target_ber(
    params: LinkParams,
    noise: ReceiverNoiseParams,
    target: float,
    m_modes: int,
    *,
    receiver: str = "alice",
    bracket: tuple[float, float] = (1e-9, 10.0),
) -> float:
    """Source brightness at which the analytic BER equals ``target``."""
    if not 0.0 < target < 0.5:
        raise DomainError(f"target BER must lie in (0, 0.5), got {target}")

    def gap(log_ns: float) -> float:
        return math.log(analytic_ber(params, noise, 10.0**log_ns, m_modes, receiver)) - math.log(target)

    lo, hi = (math.log10(b) for b in bracket)
    if gap(lo) * gap(hi) > 0:
        raise DomainError(f"target BER {target} is not reachable for n_s in {bracket}")
    return 10.0 ** optimize.brentq(gap, lo, hi, xtol=1e-14, rtol=1e-13)


def binomial_sigma(ber: float, n_bits: int) -> float:
    return math.sqrt(ber * (1.0 - ber) / n_bits)


def geometric_sample_variance(n: float, size: int, seed: int = 0) -> float:
    """Sample variance of ``size`` single-mode Bose-Einstein photocounts of mean ``n``."""
    rng = np.random.default_rng(seed)
    return float(np.var(rng.negative_binomial(1, 1.0 / (1.0 + n), size=size), ddof=1))


__all__ = [
    "BerEstimate",
    "RoundTrip",
    "SimConfig",
    "analytic_ber",
    "binomial_sigma",
    "bitstream_roundtrip",
    "empirical_ber",
    "geometric_sample_variance",
    "n_s_for_target_ber",
    "sample_bit_statistic",
    "sample_statistics",
    "simulate_bits",
]
