"""Random benchmark networks: uniform CPTs, noisy-OR gates, poly-trees, evidence.

All randomness comes from ``numpy.random.Generator`` over PCG64 seeded with
the 64-bit ``GenSpec.seed``, so equal inputs give bit-identical networks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .network import BeliefNetwork, Evidence, topological_order

RNG_NAME = "pcg64"
KINDS = ("uniform", "noisy_or")


@dataclass(frozen=True)
class GenSpec:
    n: int
    e: int
    cardinality: int = 2
    kind: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("need at least one node")
        if not 0 <= self.e <= self.n * (self.n - 1) // 2:
            raise ModelError(f"{self.e} edges do not fit in a DAG on {self.n} nodes")
        if self.kind not in KINDS:
            raise ModelError(f"unknown network kind {self.kind!r}")
        if self.cardinality < 2:
            raise ModelError("cardinality must be at least 2")
        if self.kind == "noisy_or" and self.cardinality != 2:
            raise ModelError("noisy-OR networks are binary")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & (2**64 - 1)))


def gen_graph(spec: GenSpec, rng: np.random.Generator | None = None) -> list[list[int]]:
    """Parent lists of a random DAG with exactly ``spec.e`` edges.

    Nodes get a random rank; every edge points from lower to higher rank, and
    edges are drawn without replacement from all rank-ordered pairs.
    """
    rng = rng or make_rng(spec.seed)
    rank = rng.permutation(spec.n)
    by_rank = np.argsort(rank)
    n_pairs = spec.n * (spec.n - 1) // 2
    picks = rng.choice(n_pairs, size=spec.e, replace=False) if spec.e else []
    hi, lo = np.tril_indices(spec.n, -1)  # pair k: lo[k] < hi[k]
    parents: list[list[int]] = [[] for _ in range(spec.n)]
    for k in sorted(int(p) for p in picks):
        a, b = int(by_rank[lo[k]]), int(by_rank[hi[k]])
        parents[b].append(a)
    return [sorted(ps) for ps in parents]


def _meta(spec: GenSpec) -> dict[str, str]:
    return {"seed": str(spec.seed), "kind": spec.kind, "rng": RNG_NAME}


def _uniform_table(rng, shape):
    raw = rng.random(shape)
    return raw / raw.sum(axis=-1, keepdims=True)


def gen_uniform_cpts(parents, spec: GenSpec, rng: np.random.Generator | None = None) -> BeliefNetwork:
    """Every CPT column drawn uniform(0, 1) and normalized over the child."""
    rng = rng or make_rng(spec.seed)
    cards = [spec.cardinality] * spec.n
    tables = [_uniform_table(rng, tuple(cards[p] for p in ps) + (cards[v],)) for v, ps in enumerate(parents)]
    return BeliefNetwork.from_tables(cards, parents, tables, _meta(spec))


def noisy_or_table(q) -> np.ndarray:
    """Leak-free noisy-OR: ``P(child=0 | parents) = prod of q_k over active parents``."""
    q = np.asarray(q, dtype=float)
    k = len(q)
    table = np.empty((2,) * k + (2,))
    for config in np.ndindex(*(2,) * k):
        off = float(np.prod([q[j] for j in range(k) if config[j] == 1]))
        table[config + (0,)] = off
        table[config + (1,)] = 1.0 - off
    return table


def gen_noisy_or_cpts(parents, spec: GenSpec, rng: np.random.Generator | None = None) -> BeliefNetwork:
    if spec.cardinality != 2:
        raise ModelError("noisy-OR networks are binary")
    rng = rng or make_rng(spec.seed)
    tables = []
    for ps in parents:
        if ps:
            tables.append(noisy_or_table(rng.random(len(ps))))
        else:
            tables.append(_uniform_table(rng, (2,)))
    return BeliefNetwork.from_tables([2] * spec.n, parents, tables, _meta(spec))


def generate(spec: GenSpec) -> BeliefNetwork:
    rng = make_rng(spec.seed)
    parents = gen_graph(spec, rng)
    if spec.kind == "uniform":
        return gen_uniform_cpts(parents, spec, rng)
    return gen_noisy_or_cpts(parents, spec, rng)


def gen_polytree(n: int, max_parents: int = 3, seed: int = 0, cardinality: int = 2) -> BeliefNetwork:
    """Random poly-tree with uniform CPTs.

    Node ``k`` attaches to a random earlier node with a random edge direction;
    a direction that would give a node more than ``max_parents`` parents is
    flipped.
    """
    rng = make_rng(seed)
    parents: list[list[int]] = [[] for _ in range(n)]
    for k in range(1, n):
        other = int(rng.integers(k))
        if rng.random() < 0.5 and len(parents[other]) < max_parents:
            parents[other].append(k)
        else:
            parents[k].append(other)
    parents = [sorted(ps) for ps in parents]
    cards = [cardinality] * n
    tables = [_uniform_table(rng, tuple(cards[p] for p in ps) + (cardinality,)) for ps in parents]
    return BeliefNetwork.from_tables(cards, parents, tables, {"seed": str(seed), "kind": "polytree", "rng": RNG_NAME})


def forward_sample(bn: BeliefNetwork, rng: np.random.Generator) -> tuple[int, ...]:
    x = [0] * bn.n
    for v in topological_order(bn.parents):
        cpt = bn.cpts[v]
        idx = tuple(x[u] if u != v else slice(None) for u in cpt.scope)
        probs = cpt.table[idx]
        x[v] = int(min(np.searchsorted(np.cumsum(probs), rng.random(), side="right"), bn.cards[v] - 1))
    return tuple(x)


def gen_evidence(bn: BeliefNetwork, count: int, policy: str = "positive_ones", seed: int = 0) -> Evidence:
    """``positive_ones`` sets variables ``0..count-1`` to 1; ``sampled`` reveals
    ``count`` random variables of one forward sample."""
    if not 0 <= count <= bn.n:
        raise ModelError(f"cannot observe {count} of {bn.n} variables")
    if policy == "positive_ones":
        return {v: 1 for v in range(count)}
    if policy == "sampled":
        rng = make_rng(seed)
        x = forward_sample(bn, rng)
        chosen = sorted(int(v) for v in rng.choice(bn.n, size=count, replace=False))
        return {v: x[v] for v in chosen}
    raise ValueError(f"unknown evidence policy {policy!r}")
