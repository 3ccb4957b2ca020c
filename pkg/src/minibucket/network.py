"""Belief networks, evidence and the graph views derived from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ModelError
from .factor import Factor

NORMALIZATION_TOL = 1e-9

Graph = dict[int, set[int]]
Evidence = dict[int, int]
Assignment = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class BeliefNetwork:
    """A DAG plus one conditional probability table per variable.

    ``cpts[v]`` is stored in canonical form (ascending scope); ``parents[v]``
    records which of its variables are the conditioning ones.
    """

    cards: tuple[int, ...]
    parents: tuple[tuple[int, ...], ...]
    cpts: tuple[Factor, ...]
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.cards)
        object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))
        object.__setattr__(
            self, "parents", tuple(tuple(sorted(int(p) for p in ps)) for ps in self.parents)
        )
        object.__setattr__(self, "cpts", tuple(self.cpts))
        if any(c < 2 for c in self.cards):
            raise ModelError("every variable needs at least two values")
        if len(self.parents) != n or len(self.cpts) != n:
            raise ModelError("need one parent set and one CPT per variable")
        for v, (ps, cpt) in enumerate(zip(self.parents, self.cpts)):
            if v in ps or any(not 0 <= p < n for p in ps):
                raise ModelError(f"bad parent set {ps} for variable {v}")
            if cpt.scope != tuple(sorted(ps + (v,))):
                raise ModelError(f"CPT of {v} has scope {cpt.scope}, expected parents {ps} and child")
            for u, c in zip(cpt.scope, cpt.cards):
                if c != self.cards[u]:
                    raise ModelError(f"CPT of {v}: variable {u} has cardinality {c}")
            sums = cpt.table.sum(axis=cpt.scope.index(v))
            if np.max(np.abs(sums - 1.0), initial=0.0) > NORMALIZATION_TOL:
                raise ModelError(f"CPT of variable {v} is not normalized")
        if topological_order(self.parents) is None:
            raise ModelError("parent graph has a directed cycle")

    @classmethod
    def from_tables(cls, cards, parents, tables, meta=None) -> "BeliefNetwork":
        """Build from tables laid out as ``(parents ascending..., child)``."""
        cpts = []
        for v, (ps, t) in enumerate(zip(parents, tables)):
            ps = tuple(sorted(ps))
            shape = tuple(cards[p] for p in ps) + (cards[v],)
            cpts.append(Factor(ps + (v,), np.asarray(t, dtype=float).reshape(shape)))
        return cls(tuple(cards), tuple(tuple(sorted(p)) for p in parents), tuple(cpts), meta or {})

    @property
    def n(self) -> int:
        return len(self.cards)

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for v, ps in enumerate(self.parents):
            for p in ps:
                out[p].append(v)
        return out

    def family(self, v: int) -> tuple[int, ...]:
        return self.cpts[v].scope

    def max_family_size(self) -> int:
        return max((len(ps) + 1 for ps in self.parents), default=0)

    def state_space(self) -> int:
        return int(np.prod(self.cards, dtype=object))

    def same_as(self, other: "BeliefNetwork") -> bool:
        return (
            self.cards == other.cards
            and self.parents == other.parents
            and all(a == b for a, b in zip(self.cpts, other.cpts))
        )


def topological_order(parents: Sequence[Sequence[int]]) -> list[int] | None:
    """Kahn's algorithm, lowest id first; ``None`` if there is a cycle."""
    import heapq

    n = len(parents)
    indeg = [len(ps) for ps in parents]
    kids: list[list[int]] = [[] for _ in range(n)]
    for v, ps in enumerate(parents):
        for p in ps:
            kids[p].append(v)
    ready = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in kids[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    return order if len(order) == n else None


def check_evidence(bn: BeliefNetwork, evidence: Mapping[int, int] | None) -> Evidence:
    evidence = dict(evidence or {})
    for v, x in evidence.items():
        if not 0 <= v < bn.n:
            raise ModelError(f"evidence on unknown variable {v}")
        if not 0 <= x < bn.cards[v]:
            raise ModelError(f"evidence value {x} out of range for variable {v}")
    return {int(v): int(x) for v, x in evidence.items()}


def joint_probability(bn: BeliefNetwork, x: Sequence[int], evidence: Mapping[int, int] | None = None) -> float:
    """Product of all CPT entries at ``x``; zero if ``x`` contradicts the evidence."""
    if len(x) != bn.n:
        raise ModelError(f"assignment has {len(x)} values for {bn.n} variables")
    for v, val in (evidence or {}).items():
        if x[v] != val:
            return 0.0
    p = 1.0
    for cpt in bn.cpts:
        p *= float(cpt.table[tuple(x[v] for v in cpt.scope)])
    return p


def moral_graph(bn: BeliefNetwork) -> Graph:
    g: Graph = {v: set() for v in range(bn.n)}
    for v, ps in enumerate(bn.parents):
        fam = list(ps) + [v]
        for a in fam:
            for b in fam:
                if a != b:
                    g[a].add(b)
    return g


def underlying_graph(bn: BeliefNetwork) -> Graph:
    g: Graph = {v: set() for v in range(bn.n)}
    for v, ps in enumerate(bn.parents):
        for p in ps:
            g[p].add(v)
            g[v].add(p)
    return g


def is_polytree(bn: BeliefNetwork) -> bool:
    """True iff the DAG with arrows ignored is a forest."""
    root = list(range(bn.n))

    def find(a):
        while root[a] != a:
            root[a] = root[root[a]]
            a = root[a]
        return a

    for v, ps in enumerate(bn.parents):
        for p in ps:
            a, b = find(p), find(v)
            if a == b:
                return False
            root[a] = b
    return True
