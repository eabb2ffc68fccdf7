"""Discounted accumulating-error-cost measures for the BSC.

The cost of a coded prefix against the channel output is
    sum_t  scale * gamma^(t-1) * Delta * [x_t != y_t],
with Delta = log2((1-p)/p).  Every per-symbol term is non-negative, so the
prefix cost never decreases as the prefix grows (the accumulating property
the sequential decoder relies on).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import BscChannel

_MASK64 = (1 << 64) - 1
AEC_CHECK_STREAM = 0x414543


@dataclass(frozen=True, eq=False)
class CostModel:
    """Per-symbol mismatch penalties gamma^(t-1) * Delta, precomputed for n uses.

    gamma in (0, 1] discounts later symbols; scale multiplies every penalty
    and never changes cost comparisons (only absolute values).
    """

    channel: BscChannel
    gamma: float
    n: int
    scale: float = 1.0
    per_symbol_cost: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")
        w = self.scale * self.channel.llr_scale * self.gamma ** np.arange(self.n)
        w.setflags(write=False)
        object.__setattr__(self, "per_symbol_cost", w)

    @property
    def p(self) -> float:
        return self.channel.p


def prefix_cost(cm: CostModel, x_prefix, y) -> float:
    """Cost of a coded prefix against the first |x_prefix| output symbols."""
    x = np.asarray(x_prefix, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    if len(x) > len(y):
        raise ValueError(f"prefix length {len(x)} exceeds output length {len(y)}")
    t = len(x)
    return float(cm.per_symbol_cost[:t] @ (x != y[:t]))


def extend_cost(cm: CostModel, base_cost: float, x_segment, y_segment,
                t_start: int) -> float:
    """Incrementally add the cost of symbols t_start..t_start+len-1 (1-based).

    extend_cost(cm, prefix_cost(x[:t], y), x[t:t'], y[t:t'], t+1) equals
    prefix_cost(x[:t'], y).
    """
    x = np.asarray(x_segment, dtype=np.uint8)
    yseg = np.asarray(y_segment, dtype=np.uint8)
    if len(x) != len(yseg):
        raise ValueError("segment lengths differ")
    if t_start < 1:
        raise ValueError("t_start must be at least 1")
    t0 = t_start - 1
    return float(base_cost + cm.per_symbol_cost[t0:t0 + len(x)] @ (x != yseg))


def check_aec(cm, trials: int, n: int, seed: int) -> bool:
    """Verify on random (x, y) pairs that prefix costs never decrease in t.

    Works for any object exposing per_symbol_cost; a measure with a negative
    per-symbol entry fails.  Always true for CostModel instances.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    w = np.asarray(cm.per_symbol_cost[:n], dtype=float)
    key = np.array([seed & _MASK64, AEC_CHECK_STREAM], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    for _ in range(trials):
        x = rng.integers(0, 2, n, dtype=np.uint8)
        y = rng.integers(0, 2, n, dtype=np.uint8)
        increments = w * (x != y)
        costs = np.cumsum(increments)
        if np.any(np.diff(costs) < -1e-15) or costs[0] < -1e-15:
            return False
    return True
