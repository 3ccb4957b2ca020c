"""Variable orderings: width, induced width, greedy heuristics, legal poly-tree orders.

Orderings follow the bucket convention: ``d[0]`` is processed last and
``d[-1]`` is eliminated first.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .errors import ModelError, OrderingError
from .network import BeliefNetwork, Graph, is_polytree

Ordering = tuple[int, ...]

STRATEGIES = ("min-fill", "min-degree", "given")


def check_ordering(d: Sequence[int], n: int) -> Ordering:
    d = tuple(int(v) for v in d)
    if sorted(d) != list(range(n)):
        raise OrderingError(f"ordering {d} is not a permutation of 0..{n - 1}")
    return d


def induced_width(g: Graph, d: Sequence[int]) -> tuple[int, int]:
    """Return ``(w(d), w*(d))`` of the ordered graph ``(g, d)``."""
    d = check_ordering(d, len(g))
    pos = {v: k for k, v in enumerate(d)}
    width = max((sum(pos[u] < pos[v] for u in g[v]) for v in d), default=0)
    adj = {v: set(nb) for v, nb in g.items()}
    induced = 0
    for v in reversed(d):
        earlier = [u for u in adj[v] if pos[u] < pos[v]]
        induced = max(induced, len(earlier))
        for a in earlier:
            adj[a].update(u for u in earlier if u != a)
    return width, induced


def induced_graph(g: Graph, d: Sequence[int]) -> Graph:
    pos = {v: k for k, v in enumerate(d)}
    adj = {v: set(nb) for v, nb in g.items()}
    for v in reversed(d):
        earlier = [u for u in adj[v] if pos[u] < pos[v]]
        for a in earlier:
            adj[a].update(u for u in earlier if u != a)
    return adj


def _fill_in(adj: Graph, v: int) -> int:
    nb = list(adj[v])
    missing = 0
    for k, a in enumerate(nb):
        for b in nb[k + 1 :]:
            if b not in adj[a]:
                missing += 1
    return missing


def _greedy(adj: Graph, candidates: Iterable[int], score) -> list[int]:
    seq = []
    pool = set(candidates)
    while pool:
        # ties go to the highest id so that low ids land early in d
        v = min(pool, key=lambda u: (score(adj, u), -u))
        nb = adj[v]
        for a in nb:
            adj[a].update(u for u in nb if u != a)
            adj[a].discard(v)
        del adj[v]
        pool.remove(v)
        seq.append(v)
    return seq


def find_ordering(
    g: Graph,
    strategy: str = "min-fill",
    given: Sequence[int] | None = None,
    first: Sequence[int] = (),
    last: Sequence[int] = (),
) -> Ordering:
    """Greedy elimination ordering.

    ``first`` variables are forced to the front of ``d`` (eliminated last);
    ``last`` variables go to the back in ascending id order and are removed
    from the graph without fill edges, which is how observed variables behave
    under restriction.
    """
    if strategy == "given":
        if given is None:
            raise OrderingError("strategy 'given' needs an explicit ordering")
        return check_ordering(given, len(g))
    if strategy == "min-degree":
        score = lambda adj, v: len(adj[v])
    elif strategy == "min-fill":
        score = _fill_in
    else:
        raise ValueError(f"unknown ordering strategy {strategy!r}")
    first_set, last_set = set(first), set(last)
    if first_set & last_set:
        raise OrderingError("a variable cannot be forced both first and last")
    adj = {v: set(nb) - last_set for v, nb in g.items() if v not in last_set}
    middle = [v for v in adj if v not in first_set]
    seq = _greedy(adj, middle, score)
    seq += _greedy(adj, [v for v in first_set if v in adj], score)
    return tuple(reversed(seq)) + tuple(sorted(last_set))


def legal_ordering(bn: BeliefNetwork, evidence: Mapping[int, int] | None = None) -> Ordering:
    """Ordering of a poly-tree under which one-function mini-buckets stay exact.

    Observed variables go last.  The unobserved part is ordered by a post-order
    walk of the family tree rooted at a sink: for each family, the members away
    from the root are grouped consecutively, the child first and the parents in
    ascending id order.  Whenever every family can be oriented towards one
    sink (in-trees, single families), every child precedes its parents.
    """
    if not is_polytree(bn):
        raise ModelError("legal orderings are defined for poly-trees only")
    evidence = dict(evidence or {})
    observed = set(evidence)
    children = bn.children()
    # families restricted to unobserved variables; one per CPT
    fam = {}
    for c in range(bn.n):
        members = tuple(v for v in bn.cpts[c].scope if v not in observed)
        if members:
            fam[c] = members
    touching: dict[int, list[int]] = {v: [] for v in range(bn.n) if v not in observed}
    for c, members in fam.items():
        for v in members:
            touching[v].append(c)

    processed: list[int] = []
    seen_vars: set[int] = set()

    def unit(c, exclude):
        members = [v for v in fam[c] if v != exclude]
        # processing order: parents high-to-low, then the child
        return sorted((v for v in members if v != c), reverse=True) + [v for v in members if v == c]

    def visit(v, via):
        seen_vars.add(v)
        for c in sorted(touching[v]):
            if c == via:
                continue
            members = unit(c, v)
            for w in members:
                visit(w, c)
            processed.extend(members)

    roots_order = []
    for v in sorted(touching):
        if v in seen_vars:
            continue
        comp = _component(v, touching, fam)
        sinks = [u for u in comp if not any(c not in observed for c in children[u])]
        root = min(sinks) if sinks else min(comp)
        before = len(processed)
        visit(root, None)
        processed.append(root)
        roots_order.append(processed[before:])
    d: list[int] = []
    for seq in roots_order:
        d.extend(reversed(seq))
    return tuple(d) + tuple(sorted(observed))


def _component(v, touching, fam) -> list[int]:
    comp, stack = {v}, [v]
    while stack:
        u = stack.pop()
        for c in touching[u]:
            for w in fam[c]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
    return sorted(comp)
