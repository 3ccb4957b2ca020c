"""Bucket elimination for mpe, belief updating and map.

The engine here is shared with the mini-bucket approximations: a bucket is
split into blocks by an optional partitioner, every block is multiplied out
and the bucket's variables are eliminated from it, and each result is routed
to the bucket of its latest variable in the ordering.  With a single block per
bucket the engine is exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import OrderingError
from .factor import Factor, default_cell_cap, eliminate, multiply, restrict, restrict_many
from .network import BeliefNetwork, check_evidence
from .ordering import check_ordering

Partitioner = Callable[["Bucket"], list[list[int]]]


@dataclass
class Bucket:
    """Functions whose latest variable (w.r.t. the ordering) is in ``variables``.

    ``origins[k]`` says where ``functions[k]`` came from: ``("cpt", child)``
    for an input table, ``("msg", position)`` for a function generated while
    processing the bucket at ``position``, ``("obs", position)`` for a table
    restricted by an observed bucket.
    """

    position: int
    variables: tuple[int, ...]
    functions: list[Factor] = field(default_factory=list)
    origins: list[tuple[str, int]] = field(default_factory=list)
    observed: int | None = None

    @property
    def variable(self) -> int:
        return self.variables[0]

    def scopes(self) -> list[tuple[int, ...]]:
        return [f.scope for f in self.functions]

    def own_cpt_index(self) -> int | None:
        for k, (kind, ref) in enumerate(self.origins):
            if kind == "cpt" and ref in self.variables:
                return k
        return None


@dataclass
class Message:
    factor: Factor
    source: int
    dest: int | None  # None: scalar, folded into the global constant
    kind: str = "msg"


@dataclass
class BucketRecord:
    position: int
    variables: tuple[int, ...]
    op: str
    inputs: list[tuple[int, ...]]
    partition: list[list[int]]
    outputs: list[tuple[tuple[int, ...], int | None]]


@dataclass
class EliminationTrace:
    """What a backward pass produced, kept for the forward phase and search."""

    order: tuple[int, ...]
    buckets: list[Bucket]
    bucket_of: dict[int, int]
    records: list[BucketRecord] = field(default_factory=list)
    messages: list[Message] = field(default_factory=list)
    constants: list[float] = field(default_factory=list)
    fi: int = 0
    fo: int = 0
    mb: int = 0
    elapsed: float = 0.0

    @property
    def constant(self) -> float:
        value = 1.0
        for c in self.constants:
            value *= c
        return value

    def recorded_scopes(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """``(bucket variables, scope)`` of every function generated by elimination."""
        return [
            (self.buckets[m.source].variables, m.factor.scope)
            for m in self.messages
            if m.kind == "msg"
        ]


@dataclass
class MPEResult:
    value: float
    assignment: tuple[int, ...]
    trace: EliminationTrace

    @property
    def impossible(self) -> bool:
        return self.value == 0.0


@dataclass
class BeliefResult:
    joint: Factor
    p_evidence: float
    trace: EliminationTrace

    @property
    def impossible(self) -> bool:
        return self.p_evidence == 0.0

    @property
    def posterior(self) -> Factor | None:
        if self.p_evidence <= 0.0:
            return None
        return Factor(self.joint.scope, self.joint.table / self.p_evidence)


@dataclass
class MAPResult:
    value: float
    hyp_assignment: dict[int, int]
    p_evidence: float
    trace: EliminationTrace

    @property
    def impossible(self) -> bool:
        return self.p_evidence == 0.0

    @property
    def probability(self) -> float:
        """Normalized map probability; 0 when the evidence is impossible."""
        return self.value / self.p_evidence if self.p_evidence > 0 else 0.0


def super_bucket_grouping(
    bn: BeliefNetwork, d: Sequence[int], evidence: Mapping[int, int] | None = None
) -> list[tuple[int, ...]]:
    """Merge maximal runs of consecutive buckets holding co-parents of one child.

    Runs are formed in processing order (from the end of ``d``).  Observed
    variables are never grouped.  Groups are returned in ``d`` order.
    """
    evidence = evidence or {}
    children = [set(c) for c in bn.children()]
    groups: list[list[int]] = []
    common: set[int] = set()
    for v in reversed(tuple(d)):
        if groups and v not in evidence and groups[-1][0] not in evidence:
            shared = common & children[v]
            if shared:
                groups[-1].append(v)
                common = shared
                continue
        groups.append([v])
        common = set(children[v])
    return [tuple(reversed(g)) for g in reversed(groups)]


def partition_buckets(
    factors: Sequence[Factor],
    d: Sequence[int],
    evidence: Mapping[int, int] | None = None,
    groups: Sequence[Sequence[int]] | None = None,
    origins: Sequence[tuple[str, int]] | None = None,
) -> tuple[list[Bucket], float]:
    """Place each factor in the bucket of its latest variable in ``d``.

    Returns the buckets in ``d`` order and the product of all scope-less
    inputs.
    """
    evidence = evidence or {}
    if groups is None:
        groups = [(v,) for v in d]
    pos = {v: k for k, v in enumerate(d)}
    buckets = []
    for k, g in enumerate(groups):
        obs = evidence.get(g[0]) if len(g) == 1 else None
        buckets.append(Bucket(position=k, variables=tuple(g), observed=obs))
    bucket_of = {v: k for k, g in enumerate(groups) for v in g}
    constant = 1.0
    for idx, f in enumerate(factors):
        origin = origins[idx] if origins is not None else ("cpt", idx)
        if not f.scope:
            constant *= float(f.table)
            continue
        missing = [v for v in f.scope if v not in pos]
        if missing:
            raise OrderingError(f"variables {missing} missing from the ordering")
        top = max(f.scope, key=pos.__getitem__)
        b = buckets[bucket_of[top]]
        b.functions.append(f)
        b.origins.append(origin)
    return buckets, constant


def _single_block(bucket: Bucket) -> list[list[int]]:
    return [list(range(len(bucket.functions)))] if bucket.functions else []


def run_elimination(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    op_of: Callable[[Bucket], str],
    partitioner: Partitioner | None = None,
    mode: str = "max",
    groups: Sequence[Sequence[int]] | None = None,
    stop_at: int = 0,
    cap: int | None = None,
) -> EliminationTrace:
    """Backward phase over buckets ``len(buckets)-1 .. stop_at``.

    ``op_of(bucket)`` is ``"max"`` or ``"sum"``.  In a summation bucket split
    into several blocks, the block holding the bucket variable's own CPT (or
    the first block) is summed and the others are eliminated with ``mode``.
    """
    start = time.perf_counter()
    evidence = check_evidence(bn, evidence)
    d = check_ordering(d, bn.n)
    cap = default_cell_cap() if cap is None else cap
    partitioner = partitioner or _single_block
    buckets, constant = partition_buckets(
        bn.cpts, d, evidence, groups, origins=[("cpt", v) for v in range(bn.n)]
    )
    pos = {v: k for k, v in enumerate(d)}
    bucket_of = {v: b.position for b in buckets for v in b.variables}
    trace = EliminationTrace(order=d, buckets=buckets, bucket_of=bucket_of)
    trace.constants.append(constant)
    trace.fi = bn.max_family_size()

    def route(f: Factor, source: int, kind: str):
        if not f.scope:
            trace.constants.append(float(f.table))
            trace.messages.append(Message(f, source, None, kind))
            return None
        dest = bucket_of[max(f.scope, key=pos.__getitem__)]
        buckets[dest].functions.append(f)
        buckets[dest].origins.append((kind, source))
        trace.messages.append(Message(f, source, dest, kind))
        return dest

    for b in range(len(buckets) - 1, stop_at - 1, -1):
        bucket = buckets[b]
        if not bucket.functions:
            continue
        if bucket.observed is not None:
            var = bucket.variable
            outputs = []
            for f in bucket.functions:
                r = restrict(f, var, bucket.observed)
                outputs.append((r.scope, route(r, b, "obs")))
            trace.records.append(
                BucketRecord(b, bucket.variables, "restrict", bucket.scopes(), [], outputs)
            )
            continue
        op = op_of(bucket)
        partition = partitioner(bucket)
        first = 0
        if op == "sum" and len(partition) > 1:
            own = bucket.own_cpt_index()
            if own is not None:
                first = next(k for k, blk in enumerate(partition) if own in blk)
        trace.mb = max(trace.mb, len(partition))
        outputs = []
        for l, block in enumerate(partition):
            out = eliminate_block(bucket, block, op if op == "max" else ("sum" if l == first else mode), cap)
            trace.fo = max(trace.fo, out.arity)
            outputs.append((out.scope, route(out, b, "msg")))
        trace.records.append(
            BucketRecord(b, bucket.variables, op, bucket.scopes(), [list(p) for p in partition], outputs)
        )
    trace.elapsed = time.perf_counter() - start
    return trace


def eliminate_block(bucket: Bucket, block: Sequence[int], op: str, cap: int | None = None) -> Factor:
    prod = multiply([bucket.functions[k] for k in block], cap)
    return eliminate(prod, [v for v in bucket.variables if v in prod.scope], op)


def bucket_argmax(bucket: Bucket, assignment: dict[int, int]) -> dict[int, int]:
    """Values of the bucket's variables maximizing its product given ``assignment``.

    Ties go to the lexicographically smallest value tuple.
    """
    if bucket.observed is not None:
        return {bucket.variable: bucket.observed}
    prod = multiply(restrict_many(f, assignment) for f in bucket.functions)
    best = np.unravel_index(int(np.argmax(prod.table)), prod.table.shape) if prod.scope else ()
    chosen = dict(zip(prod.scope, (int(x) for x in best)))
    return {v: chosen.get(v, 0) for v in bucket.variables}


def forward_assign(trace: EliminationTrace, upto: int | None = None) -> dict[int, int]:
    """Greedy forward phase over buckets ``0 .. upto-1`` in ``d`` order."""
    assignment: dict[int, int] = {}
    buckets = trace.buckets if upto is None else trace.buckets[:upto]
    for bucket in buckets:
        assignment.update(bucket_argmax(bucket, assignment))
    return assignment


def elim_mpe(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    superbuckets: bool = False,
    cap: int | None = None,
) -> MPEResult:
    groups = super_bucket_grouping(bn, d, evidence or {}) if superbuckets else None
    trace = run_elimination(bn, evidence, d, lambda b: "max", groups=groups, cap=cap)
    t0 = time.perf_counter()
    values = forward_assign(trace)
    trace.elapsed += time.perf_counter() - t0
    assignment = tuple(values[v] for v in range(bn.n))
    return MPEResult(trace.constant, assignment, trace)


def _require_first(d: Sequence[int], first: Sequence[int], what: str):
    if set(d[: len(first)]) != set(first):
        raise OrderingError(f"{what} variables {sorted(first)} must occupy the first positions of d")


def finish_belief(trace: EliminationTrace, bn: BeliefNetwork, query: int, cap: int | None = None) -> Factor:
    """Multiply what reached the query bucket into a table over the query."""
    bucket = trace.buckets[0]
    card = bn.cards[query]
    if bucket.observed is not None:
        rest = 1.0
        for f in bucket.functions:
            rest *= float(restrict(f, query, bucket.observed).table)
        table = np.zeros(card)
        table[bucket.observed] = rest
    else:
        prod = multiply(bucket.functions, cap)
        table = np.broadcast_to(prod.table, (card,)) if not prod.scope else prod.table
    return Factor((query,), np.asarray(table) * trace.constant)


def elim_bel(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    query: int,
    cap: int | None = None,
) -> BeliefResult:
    """Exact ``P(query, e)`` by summation; ``query`` must be first in ``d``."""
    _require_first(d, [query], "query")
    trace = run_elimination(bn, evidence, d, lambda b: "sum", stop_at=1, cap=cap)
    joint = finish_belief(trace, bn, query, cap)
    return BeliefResult(joint, float(joint.table.sum()), trace)


def probability_of_evidence(
    bn: BeliefNetwork, evidence: Mapping[int, int] | None, d: Sequence[int], cap: int | None = None
) -> float:
    trace = run_elimination(bn, evidence, d, lambda b: "sum", cap=cap)
    return trace.constant


def elim_map(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    d: Sequence[int],
    hyp: Sequence[int],
    cap: int | None = None,
) -> MAPResult:
    """Exact map over ``hyp``; the hypothesis variables must lead ``d``.

    ``value`` is the unnormalized ``max_a sum_rest prod P``; the normalizer
    ``p_evidence`` comes from a separate full summation.
    """
    hyp = sorted(set(int(v) for v in hyp))
    _require_first(d, hyp, "hypothesis")
    hyp_set = set(hyp)
    trace = run_elimination(
        bn, evidence, d, lambda b: "max" if b.variable in hyp_set else "sum", cap=cap
    )
    values = forward_assign(trace, upto=len(hyp))
    p_e = probability_of_evidence(bn, evidence, d, cap)
    return MAPResult(trace.constant, {v: values[v] for v in hyp}, p_e, trace)

