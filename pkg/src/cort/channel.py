"""Binary symmetric channel model and transmission sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

CHANNEL_STREAM = 0x4348414E
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class BscChannel:
    """Memoryless binary symmetric channel with crossover probability p.

    Requires 0 < p < 1/2 so the per-symbol log-likelihood scale
    log2((1-p)/p) is finite and positive.
    """

    p: float
    llr_scale: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.p < 0.5:
            raise ValueError(f"crossover probability must be in (0, 0.5), got {self.p}")
        object.__setattr__(self, "llr_scale", math.log2((1.0 - self.p) / self.p))

    def likelihood(self, x_bit: int, y_bit: int) -> float:
        """Per-symbol output likelihood P(y | x)."""
        return self.p if x_bit != y_bit else 1.0 - self.p

    def sequence_likelihood(self, x, y) -> float:
        """Joint likelihood of an output sequence; factorizes by memorylessness."""
        x = np.asarray(x, dtype=np.uint8)
        y = np.asarray(y, dtype=np.uint8)
        mism = int(np.count_nonzero(x != y))
        return self.p ** mism * (1.0 - self.p) ** (len(x) - mism)


def transmit(ch: BscChannel, x, seed: int) -> np.ndarray:
    """Send x through the channel: y = x XOR e with e ~ iid Bernoulli(p).

    The error pattern comes from a Philox stream keyed by
    (seed, CHANNEL_STREAM), independent of the generator-sampling stream
    for the same integer seed.
    """
    x = np.asarray(x, dtype=np.uint8)
    key = np.array([seed & _MASK64, CHANNEL_STREAM], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    errors = (rng.random(len(x)) < ch.p).astype(np.uint8)
    return x ^ errors


def error_weight_distribution(ch: BscChannel, n: int) -> np.ndarray:
    """Pr(W = w) for the number of flips in n uses, w = 0..n.

    Evaluated through the log-pmf for numerical stability at large n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return np.exp(stats.binom.logpmf(np.arange(n + 1), n, ch.p))
