"""Stack-based sequential decoding with give-up.

Best-first search over the code tree: the stack (a min-heap) is seeded with
the root's children, and the lowest-cost node is repeatedly popped and
expanded until a terminal node surfaces or the node-check budget L is
exhausted, in which case the decoder gives up and returns the error marker.

Because the cost measure only accumulates, a returned message is guaranteed
to attain the minimum full-path cost among all 2^k terminal nodes.

Heap ordering is (cost, depth descending, prefix lexicographic): the cost key
is the algorithm's; the depth-then-lexicographic tie-break is fixed here so
that runs are deterministic and terminals win cost ties.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .measure import CostModel, prefix_cost
from .tree_code import GeneratorMatrix, encode


@dataclass(frozen=True)
class StackEntry:
    """A node on the stack: its message prefix, branching stage, and the
    prefix cost through the last time the prefix determines."""

    message_prefix: tuple
    stage: int
    cost: float


@dataclass(frozen=True)
class DecodeOutcome:
    """Decoder result: the message (None when the decoder gave up), the final
    node-check count, and the peak stack occupancy."""

    result: tuple | None
    nodes_checked: int
    max_stack_size: int

    @property
    def gave_up(self) -> bool:
        return self.result is None


class _StageTables:
    """Per-stage expansion machinery for one generator matrix.

    Stage h (1-based) nodes have prefixes of length level[h]; expanding a
    stage-h node appends every suffix of length level[h+1]-level[h] and adds
    the cost of output segment (r_[h], r_[h+1]].
    """

    def __init__(self, g: GeneratorMatrix, cm: CostModel, y: np.ndarray):
        prof = g.profile
        r = prof.stage_end_times()
        levels = (0,) + prof.branch_levels
        self.levels = levels
        self.num_stages = prof.num_stages
        self.k = prof.k
        self.parent_cols = []
        self.suffix_outputs = []
        self.suffixes = []
        self.weights = []
        self.y_segments = []
        for h in range(prof.num_stages):
            lo, hi = r[h], r[h + 1]
            seg = slice(lo, hi)
            width = levels[h + 1] - levels[h]
            suffixes = np.array(
                [[(i >> (width - 1 - b)) & 1 for b in range(width)]
                 for i in range(2 ** width)],
                dtype=np.uint8,
            )
            self.parent_cols.append(g.bits[seg, : levels[h]])
            self.suffix_outputs.append((suffixes @ g.bits[seg, levels[h]: levels[h + 1]].T) % 2)
            self.suffixes.append([tuple(int(b) for b in row) for row in suffixes])
            self.weights.append(np.asarray(cm.per_symbol_cost[seg], dtype=float))
            self.y_segments.append(np.asarray(y[seg], dtype=np.uint8))

    def expand(self, prefix: tuple, stage: int, cost: float):
        """Children of a stage-`stage` node as (prefix, cost) pairs."""
        base = (self.parent_cols[stage] @ np.asarray(prefix, dtype=np.uint8)) % 2
        xs = self.suffix_outputs[stage] ^ base[None, :]
        costs = cost + (xs != self.y_segments[stage][None, :]) @ self.weights[stage]
        return [(prefix + suf, float(c))
                for suf, c in zip(self.suffixes[stage], costs)]


def ssdgu_decode(g: GeneratorMatrix, y, cm: CostModel, limit: int,
                 trace: list | None = None) -> DecodeOutcome:
    """Run the give-up stack decoder on one received word.

    The stack starts with the root's children and the check counter at c_0;
    while the counter stays within `limit`, the cheapest node is popped,
    returned if terminal, and otherwise replaced by its children (counting
    them).  When the loop exits on budget, the give-up marker is returned.

    If a trace list is supplied, one record per pop is appended.
    """
    prof = g.profile
    y = np.asarray(y, dtype=np.uint8)
    if len(y) != prof.n:
        raise ValueError(f"received word has length {len(y)}, expected {prof.n}")
    c0 = prof.branch_fanout[0]
    if limit < c0:
        raise ValueError(
            f"limit {limit} cannot cover the root expansion (c_0 = {c0})")

    tables = _StageTables(g, cm, y)
    heap = []
    for prefix, cost in tables.expand((), 0, 0.0):
        heapq.heappush(heap, (cost, -len(prefix), prefix))
    nodes_checked = c0
    max_stack = len(heap)

    iteration = 0
    while nodes_checked <= limit:
        cost, neg_len, prefix = heapq.heappop(heap)
        stage = tables.levels.index(-neg_len)
        entry = StackEntry(message_prefix=prefix, stage=stage, cost=cost)
        iteration += 1
        if trace is not None:
            trace.append({"iteration": iteration,
                          "prefix": entry.message_prefix,
                          "stage": entry.stage, "cost": entry.cost,
                          "nodes_checked": nodes_checked})
        if -neg_len == prof.k:
            return DecodeOutcome(result=entry.message_prefix,
                                 nodes_checked=nodes_checked,
                                 max_stack_size=max_stack)
        for child_prefix, child_cost in tables.expand(prefix, stage, cost):
            heapq.heappush(heap, (child_cost, -len(child_prefix), child_prefix))
        nodes_checked += prof.branch_fanout[stage]
        max_stack = max(max_stack, len(heap))

    return DecodeOutcome(result=None, nodes_checked=nodes_checked,
                         max_stack_size=max_stack)


def ml_consistency_check(g: GeneratorMatrix, y, cm: CostModel,
                         outcome: DecodeOutcome) -> bool:
    """True iff the decoded message attains the brute-force minimum full-path
    cost over all 2^k messages.  Feasible for k <= 20."""
    from .montecarlo import ml_oracle  # local import to avoid a cycle

    if outcome.result is None:
        raise ValueError("outcome is a give-up; nothing to check")
    _, best_cost = ml_oracle(g, y, cm)
    decoded_cost = prefix_cost(cm, encode(g, outcome.result), y)
    return bool(np.isclose(decoded_cost, best_cost, rtol=1e-9, atol=1e-12))
