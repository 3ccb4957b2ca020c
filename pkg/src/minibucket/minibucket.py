"""Mini-bucket approximations of mpe, belief updating and map.

Each bucket is split into blocks ("mini-buckets") of bounded size before the
bucket variable is eliminated, trading accuracy for time and space.  The
maximizing variants return upper bounds; the forward pass over the recorded
functions yields a tuple whose probability is a lower bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

from .elimination import (
    Bucket,
    EliminationTrace,
    eliminate_block,
    finish_belief,
    forward_assign,
    probability_of_evidence,
    run_elimination,
    super_bucket_grouping,
    _require_first,
)
from .errors import InfeasibleConfigError, ResourceLimitError
from .factor import Factor
from .network import BeliefNetwork, joint_probability

BOUND_MODES = {"upper": "max", "lower": "min", "mean": "mean"}

Partition = list[list[int]]


@dataclass(frozen=True)
class MiniBucketConfig:
    """Bounds on mini-bucket size.

    ``i`` caps the number of distinct variables in a block and ``m`` the
    number of canonical (nonsubsumed) blocks merged into one; ``None`` means
    unbounded.  ``strategy`` is ``by_i`` (greedy merge under ``i``, also
    honouring ``m``) or ``by_m`` (merge every ``m`` successive canonical
    blocks); by default it follows whichever of ``i`` and ``m`` is set.
    With ``strict=False`` a canonical block wider than ``i`` is kept whole
    instead of raising.
    """

    i: int | None = None
    m: int | None = None
    strategy: str | None = None
    strict: bool = True

    def __post_init__(self):
        if self.i is not None and self.i < 1:
            raise ValueError("i must be at least 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be at least 1")
        strategy = self.strategy or ("by_i" if self.i is not None else "by_m")
        if strategy not in ("by_i", "by_m"):
            raise ValueError(f"unknown strategy {strategy!r}")
        object.__setattr__(self, "strategy", strategy)

    def label(self) -> str:
        return f"{self.strategy}(i={self.i},m={self.m})"


@dataclass
class BoundsResult:
    upper: float
    lower: float | None
    assignment: tuple[int, ...] | None
    trace: EliminationTrace
    elapsed: float
    hyp_assignment: dict[int, int] | None = None

    @property
    def mb(self) -> int:
        return self.trace.mb

    @property
    def fo(self) -> int:
        return self.trace.fo

    @property
    def fi(self) -> int:
        return self.trace.fi


@dataclass
class BeliefBound:
    bound: Factor
    p_evidence_bound: float
    mode: str
    trace: EliminationTrace


def canonical_partition(scopes: Sequence[Sequence[int]]) -> Partition:
    """Group every subsumed function with its earliest subsumer.

    Among functions with identical scopes the earliest one heads the block.
    Blocks are returned in order of their heads.
    """
    sets = [frozenset(s) for s in scopes]
    n = len(sets)
    link: list[int | None] = [None] * n
    for j in range(n):
        for k in range(n):
            if k != j and sets[j] <= sets[k] and (sets[j] != sets[k] or k < j):
                link[j] = k
                break
    blocks: dict[int, list[int]] = {}
    for j in range(n):
        head = j
        while link[head] is not None:
            head = link[head]
        blocks.setdefault(head, []).append(j)
    return [sorted(blocks[h]) for h in sorted(blocks)]


def _block_vars(block, sets) -> set[int]:
    out: set[int] = set()
    for k in block:
        out |= sets[k]
    return out


def im_partition(canonical: Partition, scopes: Sequence[Sequence[int]], cfg: MiniBucketConfig) -> Partition:
    """Coarsen a canonical partition under ``cfg``."""
    if cfg.strategy == "by_m":
        if cfg.m is None:
            return [sorted(k for blk in canonical for k in blk)] if canonical else []
        return [
            sorted(k for blk in canonical[s : s + cfg.m] for k in blk)
            for s in range(0, len(canonical), cfg.m)
        ]
    sets = [set(s) for s in scopes]
    limit = math.inf if cfg.i is None else cfg.i
    cap_m = math.inf if cfg.m is None else cfg.m
    merged: list[list[int]] = []
    merged_vars: list[set[int]] = []
    heads: list[int] = []
    for blk in canonical:
        bvars = _block_vars(blk, sets)
        if len(bvars) > limit:
            if cfg.strict:
                raise InfeasibleConfigError(
                    f"a function over {len(bvars)} variables does not fit in i={cfg.i}"
                )
            merged.append(list(blk))
            merged_vars.append(bvars)
            heads.append(1)
            continue
        for k, mv in enumerate(merged_vars):
            if heads[k] < cap_m and len(mv | bvars) <= limit:
                merged[k].extend(blk)
                mv |= bvars
                heads[k] += 1
                break
        else:
            merged.append(list(blk))
            merged_vars.append(bvars)
            heads.append(1)
    return [sorted(b) for b in merged]


def is_refinement(qa: Sequence[Sequence[int]], qb: Sequence[Sequence[int]]) -> bool:
    """True iff every block of ``qa`` lies inside some block of ``qb``."""
    ground_a = sorted(k for blk in qa for k in blk)
    ground_b = sorted(k for blk in qb for k in blk)
    if ground_a != ground_b:
        raise ValueError("partitions are over different ground sets")
    blocks_b = [set(b) for b in qb]
    return all(any(set(a) <= b for b in blocks_b) for a in qa)


def partitioner_for(cfg: MiniBucketConfig):
    def partition(bucket: Bucket) -> Partition:
        scopes = bucket.scopes()
        return im_partition(canonical_partition(scopes), scopes, cfg)

    return partition


def process_bucket_max(bucket: Bucket, partition: Partition) -> list[Factor]:
    """Eliminate the bucket variables from each block by maximization."""
    return [eliminate_block(bucket, blk, "max") for blk in partition]


def process_bucket_sum_guarded(
    bucket: Bucket, partition: Partition, mode: str = "upper", first: int | None = None
) -> list[Factor]:
    """Sum the first block, eliminate the rest with max, min or mean.

    ``mode`` is ``upper``, ``lower`` or ``mean``.  The first block defaults to
    the one holding the bucket variable's own CPT.
    """
    op = BOUND_MODES[mode]
    if first is None:
        first = 0
        own = bucket.own_cpt_index()
        if own is not None:
            first = next((k for k, blk in enumerate(partition) if own in blk), 0)
    return [eliminate_block(bucket, blk, "sum" if k == first else op) for k, blk in enumerate(partition)]


def approx_mpe(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    cfg: MiniBucketConfig,
    superbuckets: bool = False,
    cap: int | None = None,
) -> BoundsResult:
    """Upper bound on the mpe plus the greedy tuple's probability as a lower bound."""
    start = time.perf_counter()
    groups = super_bucket_grouping(bn, d, evidence) if superbuckets else None
    trace = run_elimination(
        bn, evidence, d, lambda b: "max", partitioner_for(cfg), groups=groups, cap=cap
    )
    values = forward_assign(trace)
    assignment = tuple(values[v] for v in range(bn.n))
    lower = joint_probability(bn, assignment, evidence)
    return BoundsResult(trace.constant, lower, assignment, trace, time.perf_counter() - start)


def approx_bel(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    query: int,
    cfg: MiniBucketConfig,
    mode: str = "upper",
    cap: int | None = None,
) -> BeliefBound:
    """Bound ``P(query, e)`` pointwise.

    ``upper`` and ``lower`` are guaranteed bounds; ``mean`` is an estimate
    with no guarantee.
    """
    if mode not in BOUND_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    _require_first(d, [query], "query")
    trace = run_elimination(
        bn, evidence, d, lambda b: "sum", partitioner_for(cfg), mode=BOUND_MODES[mode], stop_at=1, cap=cap
    )
    bound = finish_belief(trace, bn, query, cap)
    return BeliefBound(bound, float(bound.table.sum()), mode, trace)


def approx_map(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    hyp: Sequence[int],
    cfg: MiniBucketConfig,
    exact_lower: bool = True,
    cap: int | None = None,
) -> BoundsResult:
    """Upper bound on the unnormalized map value.

    When ``exact_lower`` is set and exact summation fits under the cell cap,
    ``lower`` is the exact score ``P(a, e)`` of the greedy hypothesis ``a``;
    otherwise it is ``None``.
    """
    start = time.perf_counter()
    hyp = sorted(set(int(v) for v in hyp))
    _require_first(d, hyp, "hypothesis")
    hyp_set = set(hyp)
    trace = run_elimination(
        bn,
        evidence,
        d,
        lambda b: "max" if b.variable in hyp_set else "sum",
        partitioner_for(cfg),
        mode="max",
        cap=cap,
    )
    values = forward_assign(trace, upto=len(hyp))
    hyp_assignment = {v: values[v] for v in hyp}
    lower = None
    if exact_lower:
        try:
            lower = probability_of_evidence(bn, {**(evidence or {}), **hyp_assignment}, d, cap)
        except ResourceLimitError:
            lower = None
    return BoundsResult(
        trace.constant, lower, None, trace, time.perf_counter() - start, hyp_assignment=hyp_assignment
    )


def _ratio(a: float, b: float) -> float:
    if b > 0:
        return a / b
    return math.inf if a > 0 else 1.0


def bound_ratios(exact: float | None, upper: float, lower: float | None):
    """``(M/L, U/M, U/L)``; a zero denominator gives ``inf``, a missing input ``None``."""
    ml = um = ul = None
    if lower is not None:
        ul = _ratio(upper, lower)
        if exact is not None:
            ml = _ratio(exact, lower)
    if exact is not None:
        um = _ratio(upper, exact)
    return ml, um, ul
