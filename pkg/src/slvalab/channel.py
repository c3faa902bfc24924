"""QPSK over AWGN: per-dimension modulation, seeded noise, pairwise error probability.

Each coded bit maps to one real dimension (a QPSK symbol is two consecutive
dimensions), so no padding is needed for odd-length coded sequences and the
pairwise error probability between codewords at Hamming distance d is exactly
Q(sqrt(d * gamma_s)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("linear SNR must be positive")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ChannelConfig:
    """AWGN channel at symbol SNR gamma_s = Es/N0 (linear)."""

    gamma_s: float
    es: float = field(default=1.0)

    def __post_init__(self) -> None:
        if not self.gamma_s > 0:
            raise ValueError("gamma_s must be positive (linear domain)")
        if not self.es > 0:
            raise ValueError("es must be positive")

    @classmethod
    def from_db(cls, snr_db: float, es: float = 1.0) -> "ChannelConfig":
        return cls(db_to_linear(snr_db), es)

    @property
    def n0(self) -> float:
        return self.es / self.gamma_s

    @property
    def noise_var_per_dim(self) -> float:
        return self.n0 / 2.0

    @property
    def amplitude(self) -> float:
        """Per-dimension amplitude: each coded bit is sent at +-sqrt(es/2)."""
        return math.sqrt(self.es / 2.0)


def modulate(coded_bits: np.ndarray, es: float = 1.0) -> np.ndarray:
    """Map bit 0 -> +sqrt(es/2), bit 1 -> -sqrt(es/2), one real dim per bit."""
    bits = np.asarray(coded_bits)
    a = math.sqrt(es / 2.0)
    return a * (1.0 - 2.0 * bits.astype(np.float64))


def add_noise(
    signal: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator
) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise with variance n0/2 per dimension."""
    var = cfg.noise_var_per_dim
    if var == 0.0:
        return np.array(signal, dtype=np.float64, copy=True)
    return signal + rng.normal(0.0, math.sqrt(var), size=np.shape(signal))


def qfunc(x):
    """Gaussian tail Q(x) = 0.5*erfc(x/sqrt(2)); accepts scalars or arrays."""
    if np.isscalar(x):
        return 0.5 * math.erfc(x / math.sqrt(2.0))
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def pairwise_error_prob(d: int, gamma_s: float):
    """Probability that noise flips a decision between words at distance d."""
    if np.any(np.asarray(d) < 1):
        raise ValueError("no error event of distance 0")
    if not np.all(np.asarray(gamma_s) > 0):
        raise ValueError("gamma_s must be positive")
    return qfunc(np.sqrt(np.multiply(d, gamma_s)))
