"""Simulation harness: frame-error, give-up, and node-check statistics.

Trials are seeded as base_seed + trial_index, so any contiguous chunk of
trials can run on any worker and the merged counters are identical to a
serial run.  Each trial draws its message, generator matrix (when
resampling), and channel noise from Philox streams with distinct key
domains derived from the trial seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import BscChannel, transmit
from .decoder import ssdgu_decode
from .measure import CostModel, prefix_cost
from .tree_code import GeneratorMatrix, TreeProfile, encode, sample_generator

MESSAGE_STREAM = 0x4D5347
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrialConfig:
    """One simulation campaign: code profile, channel, measure, budget,
    trial count, seeding, and whether each trial draws a fresh generator."""

    profile: TreeProfile
    p: float
    gamma: float
    limit: int
    trials: int
    base_seed: int = 0
    resample_code: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    def cost_model(self) -> CostModel:
        return CostModel(channel=BscChannel(self.p), gamma=self.gamma,
                         n=self.profile.n)


@dataclass(frozen=True)
class SimStats:
    """Tallied outcomes with 95% confidence half-widths (Wilson for rates,
    normal for the node-check mean).  fer counts give-ups and wrong
    messages together, so fer = giveup_rate + undetected_error_rate exactly.
    """

    trials: int
    giveup_count: int
    undetected_count: int
    fer: float
    giveup_rate: float
    undetected_error_rate: float
    fer_ci: float
    giveup_ci: float
    undetected_ci: float
    mean_nodes_checked: float
    mean_nodes_ci: float
    max_nodes_checked: int
    max_stack_size: int

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "giveup_count": self.giveup_count,
            "undetected_count": self.undetected_count,
            "fer": self.fer,
            "giveup_rate": self.giveup_rate,
            "undetected_error_rate": self.undetected_error_rate,
            "fer_ci": self.fer_ci,
            "giveup_ci": self.giveup_ci,
            "undetected_ci": self.undetected_ci,
            "mean_nodes_checked": self.mean_nodes_checked,
            "mean_nodes_ci": self.mean_nodes_ci,
            "max_nodes_checked": self.max_nodes_checked,
            "max_stack_size": self.max_stack_size,
        }


def wilson_halfwidth(successes: int, trials: int, z: float = 1.959964) -> float:
    """Half-width of the 95% Wilson score interval for a binomial rate."""
    if trials == 0:
        return 0.0
    phat = successes / trials
    denom = 1.0 + z * z / trials
    halfwidth = z * math.sqrt(phat * (1.0 - phat) / trials
                              + z * z / (4.0 * trials * trials)) / denom
    return halfwidth


def draw_message(k: int, seed: int) -> np.ndarray:
    """Uniform k-bit message from the trial's message stream."""
    key = np.array([seed & _MASK64, MESSAGE_STREAM], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.integers(0, 2, k, dtype=np.uint8)


def _run_chunk(config: TrialConfig, start: int, stop: int):
    """Exact integer tallies for trials start..stop-1."""
    cm = config.cost_model()
    fixed_g = None
    if not config.resample_code:
        fixed_g = sample_generator(config.profile, config.base_seed)
    giveups = wrong = 0
    nc_sum = 0
    nc_sq_sum = 0
    nc_max = 0
    stack_max = 0
    for i in range(start, stop):
        seed = (config.base_seed + i) & _MASK64
        m = draw_message(config.profile.k, seed)
        g = fixed_g if fixed_g is not None else sample_generator(config.profile, seed)
        y = transmit(cm.channel, encode(g, m), seed)
        outcome = ssdgu_decode(g, y, cm, config.limit)
        if outcome.gave_up:
            giveups += 1
        elif outcome.result != tuple(int(b) for b in m):
            wrong += 1
        nc = outcome.nodes_checked
        nc_sum += nc
        nc_sq_sum += nc * nc
        nc_max = max(nc_max, nc)
        stack_max = max(stack_max, outcome.max_stack_size)
    return giveups, wrong, nc_sum, nc_sq_sum, nc_max, stack_max


def simulate(config: TrialConfig, workers: int = 1) -> SimStats:
    """Run the campaign and reduce exact counters; deterministic for any
    worker count."""
    trials = config.trials
    if workers <= 1 or trials < 64:
        parts = [_run_chunk(config, 0, trials)]
    else:
        chunk = -(-trials // workers)
        spans = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(spans),
                                  [a for a, _ in spans], [b for _, b in spans]))
    giveups = sum(p[0] for p in parts)
    wrong = sum(p[1] for p in parts)
    nc_sum = sum(p[2] for p in parts)
    nc_sq_sum = sum(p[3] for p in parts)
    nc_max = max(p[4] for p in parts)
    stack_max = max(p[5] for p in parts)

    errors = giveups + wrong
    mean_nc = nc_sum / trials
    var_nc = max(0.0, nc_sq_sum / trials - mean_nc * mean_nc)
    mean_ci = 1.959964 * math.sqrt(var_nc / trials)
    return SimStats(
        trials=trials,
        giveup_count=giveups,
        undetected_count=wrong,
        fer=errors / trials,
        giveup_rate=giveups / trials,
        undetected_error_rate=wrong / trials,
        fer_ci=wilson_halfwidth(errors, trials),
        giveup_ci=wilson_halfwidth(giveups, trials),
        undetected_ci=wilson_halfwidth(wrong, trials),
        mean_nodes_checked=mean_nc,
        mean_nodes_ci=mean_ci,
        max_nodes_checked=nc_max,
        max_stack_size=stack_max,
    )


def ml_oracle(g: GeneratorMatrix, y, cm: CostModel):
    """Exhaustive minimum-cost message over all 2^k candidates.

    Ties resolve to the lexicographically smallest message.  Feasible for
    k <= 20; evaluated in blocks to bound memory.
    """
    k = g.profile.k
    if k > 20:
        raise ValueError(f"brute force limited to k <= 20, got k={k}")
    y = np.asarray(y, dtype=np.uint8)
    weights = np.asarray(cm.per_symbol_cost, dtype=float)
    best_cost = math.inf
    best_index = -1
    block = 1 << 14
    shifts = np.arange(k - 1, -1, -1, dtype=np.uint32)
    for start in range(0, 1 << k, block):
        idx = np.arange(start, min(start + block, 1 << k), dtype=np.uint32)
        msgs = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
        codewords = (msgs @ g.bits.T) % 2
        costs = (codewords != y[None, :]) @ weights
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost = float(costs[i])
            best_index = int(idx[i])
    message = tuple((best_index >> int(s)) & 1 for s in shifts)
    return message, best_cost


def hamming_argmin(g: GeneratorMatrix, y):
    """Independent maximum-likelihood reference: message whose codeword is
    Hamming-closest to y (ties to the lexicographically smallest)."""
    k = g.profile.k
    if k > 20:
        raise ValueError(f"brute force limited to k <= 20, got k={k}")
    y = np.asarray(y, dtype=np.uint8)
    shifts = np.arange(k - 1, -1, -1, dtype=np.uint32)
    idx = np.arange(1 << k, dtype=np.uint32)
    msgs = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    dist = ((msgs @ g.bits.T) % 2 != y[None, :]).sum(axis=1)
    best = int(np.argmin(dist))
    return tuple((best >> int(s)) & 1 for s in shifts)


def estimate_cle(config: TrialConfig, workers: int = 1):
    """Monte Carlo estimate of the give-up probability: (rate, 95% ci)."""
    stats = simulate(config, workers=workers)
    return stats.giveup_rate, stats.giveup_ci


def non_giveup_costs_match_oracle(config: TrialConfig) -> bool:
    """Every non-give-up decode attains the brute-force minimum cost."""
    cm = config.cost_model()
    for i in range(config.trials):
        seed = (config.base_seed + i) & _MASK64
        m = draw_message(config.profile.k, seed)
        g = sample_generator(config.profile, seed) if config.resample_code \
            else sample_generator(config.profile, config.base_seed)
        y = transmit(cm.channel, encode(g, m), seed)
        outcome = ssdgu_decode(g, y, cm, config.limit)
        if outcome.gave_up:
            continue
        _, best_cost = ml_oracle(g, y, cm)
        decoded_cost = prefix_cost(cm, encode(g, outcome.result), y)
        if not math.isclose(decoded_cost, best_cost, rel_tol=1e-9, abs_tol=1e-12):
            return False
    return True
