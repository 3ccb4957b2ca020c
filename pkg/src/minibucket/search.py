"""Best-first search for the exact mpe guided by mini-bucket functions.

A node is a prefix ``x_1..x_p`` of the ordering.  Its score is
``f = g * h`` where ``g`` multiplies the CPTs already fully instantiated by
the prefix and ``h`` multiplies every function generated in a bucket beyond
the prefix that was placed in a bucket inside it.  Each such function bounds
the maximum over the eliminated variables, so ``f`` never underestimates the
best completion, and at full depth ``f`` is the joint probability.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .elimination import EliminationTrace, run_elimination
from .errors import ResourceLimitError
from .minibucket import MiniBucketConfig, approx_mpe, partitioner_for
from .network import BeliefNetwork, check_evidence

DEFAULT_FRONTIER_CAP = 2**22


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 0
    peak_frontier: int = 0
    popped: list[float] = field(default_factory=list)


@dataclass
class SearchResult:
    value: float
    assignment: tuple[int, ...]
    stats: SearchStats


class MiniBucketHeuristic:
    """Evaluation function over prefixes of ``trace.order``."""

    def __init__(self, bn: BeliefNetwork, evidence: Mapping[int, int] | None, trace: EliminationTrace):
        if any(len(b.variables) > 1 for b in trace.buckets):
            raise ValueError("search needs one bucket per variable")
        self.bn = bn
        self.evidence = check_evidence(bn, evidence)
        self.order = trace.order
        n = bn.n
        pos = {v: k for k, v in enumerate(self.order)}
        # CPTs whose latest variable sits at position p
        self.cpts_at: list[list] = [[] for _ in range(n)]
        for cpt in bn.cpts:
            self.cpts_at[max(pos[v] for v in cpt.scope)].append(cpt)
        # crossing[p]: functions made beyond a prefix of length p and stored inside it
        self.crossing: list[list] = [[] for _ in range(n + 1)]
        for msg in trace.messages:
            dest = -1 if msg.dest is None else msg.dest
            for p in range(dest + 1, msg.source + 1):
                self.crossing[p].append(msg.factor)
        self.root_constant = trace.constants[0]

    def h(self, depth: int, assignment: Mapping[int, int]) -> float:
        value = self.root_constant if depth == 0 else 1.0
        for f in self.crossing[depth]:
            value *= f.value(assignment)
        return value

    def g_step(self, depth: int, assignment: Mapping[int, int]) -> float:
        """Product of the CPTs completed by assigning position ``depth``."""
        value = 1.0
        for cpt in self.cpts_at[depth]:
            value *= cpt.value(assignment)
        return value

    def evaluate(self, prefix: Sequence[int]) -> float:
        """``f`` of a prefix given as values for ``order[0..len(prefix)-1]``."""
        assignment = dict(zip(self.order, prefix))
        for v, x in self.evidence.items():
            if v in assignment and assignment[v] != x:
                return 0.0
        g = 1.0
        for p in range(len(prefix)):
            g *= self.g_step(p, assignment)
        return g * self.h(len(prefix), assignment) if prefix else self.h(0, assignment)


def heuristic_value(heuristic: MiniBucketHeuristic, prefix: Sequence[int]) -> float:
    return heuristic.evaluate(prefix)


def build_heuristic(
    bn: BeliefNetwork, evidence: Mapping[int, int] | None, d: Sequence[int], cfg: MiniBucketConfig
) -> MiniBucketHeuristic:
    trace = run_elimination(bn, evidence, d, lambda b: "max", partitioner_for(cfg))
    return MiniBucketHeuristic(bn, evidence, trace)


def best_first_mpe(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    cfg: MiniBucketConfig,
    max_frontier: int | None = None,
) -> SearchResult:
    """Exact mpe by best-first search on ``f``.

    Nodes leave the frontier in decreasing ``f``; ties prefer deeper nodes,
    then lexicographically smaller value tuples.  The first complete
    assignment popped is optimal.
    """
    cap = DEFAULT_FRONTIER_CAP if max_frontier is None else max_frontier
    evidence = check_evidence(bn, evidence)
    heur = build_heuristic(bn, evidence, d, cfg)
    order = heur.order
    n = bn.n
    stats = SearchStats()
    root_f = heur.h(0, {})
    frontier = [(-root_f, 0, (), 1.0)]
    stats.generated = 1
    while frontier:
        neg_f, neg_depth, prefix, g = heapq.heappop(frontier)
        stats.popped.append(-neg_f)
        depth = -neg_depth
        if depth == n:
            assignment = dict(zip(order, prefix))
            return SearchResult(-neg_f, tuple(assignment[v] for v in range(n)), stats)
        stats.expanded += 1
        var = order[depth]
        values = [evidence[var]] if var in evidence else range(bn.cards[var])
        assignment = dict(zip(order, prefix))
        for x in values:
            assignment[var] = x
            g_child = g * heur.g_step(depth, assignment)
            f_child = g_child * heur.h(depth + 1, assignment)
            heapq.heappush(frontier, (-f_child, -(depth + 1), prefix + (x,), g_child))
            stats.generated += 1
        stats.peak_frontier = max(stats.peak_frontier, len(frontier))
        if len(frontier) > cap:
            best = approx_mpe(bn, evidence, order, cfg).lower
            raise ResourceLimitError(
                f"search frontier exceeded {cap} nodes", cells=len(frontier), cap=cap, best_lower=best
            )
    raise RuntimeError("search frontier emptied without reaching a complete assignment")
