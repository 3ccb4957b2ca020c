"""BNET v1: a line-oriented text format for belief networks.

::

    BNET 1
    vars <n>
    card <c_0> ... <c_{n-1}>
    factors <k>
    scope <s> <v_0> ... <v_{s-1}> child <v_c>
    <prod of scope cardinalities values, last scope variable fastest>
    ...
    evidence <t>            (optional)
    <var> <value>           (t lines)
    meta seed <u64> kind <kind> [rng <name>]   (optional)

``#`` starts a comment; blank lines are ignored.  Values are written with 17
significant digits so a save/load round trip is bit-exact.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .errors import ModelError, ParseError
from .factor import Factor
from .network import NORMALIZATION_TOL, BeliefNetwork, Evidence

MAGIC = "BNET 1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps(bn: BeliefNetwork, evidence: Mapping[int, int] | None = None) -> str:
    lines = [MAGIC, f"vars {bn.n}", "card " + " ".join(str(c) for c in bn.cards), f"factors {bn.n}"]
    for v, cpt in enumerate(bn.cpts):
        lines.append(f"scope {len(cpt.scope)} " + " ".join(map(str, cpt.scope)) + f" child {v}")
        lines.append(" ".join(_fmt(x) for x in cpt.flat()))
    if evidence:
        lines.append(f"evidence {len(evidence)}")
        lines.extend(f"{v} {evidence[v]}" for v in sorted(evidence))
    meta = dict(bn.meta)
    if "seed" in meta and "kind" in meta:
        extra = "".join(f" {k} {meta[k]}" for k in sorted(meta) if k not in ("seed", "kind"))
        lines.append(f"meta seed {meta['seed']} kind {meta['kind']}{extra}")
    return "\n".join(lines) + "\n"


def save_network(path, bn: BeliefNetwork, evidence: Mapping[int, int] | None = None) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(bn, evidence))


class _Lines:
    def __init__(self, text: str):
        self.items = []
        for no, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0]
            if body.strip():
                self.items.append((no, body))
        self.k = 0
        self.last = 0

    def next(self, what: str):
        if self.k >= len(self.items):
            raise ParseError(f"unexpected end of file, expected {what}", self.last + 1)
        no, body = self.items[self.k]
        self.k += 1
        self.last = no
        return no, body

    def done(self) -> bool:
        return self.k >= len(self.items)


def _tokens(body: str):
    """Yield ``(column, token)`` pairs, columns 1-based."""
    col = 0
    for tok in body.split():
        col = body.index(tok, col)
        yield col + 1, tok
        col += len(tok)


def _ints(no, body, expect_head, count=None):
    toks = list(_tokens(body))
    if not toks or toks[0][1] != expect_head:
        col = toks[0][0] if toks else 1
        raise ParseError(f"expected '{expect_head}'", no, col)
    out = []
    for col, tok in toks[1:]:
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(f"expected an integer, got {tok!r}", no, col) from None
    if count is not None and len(out) != count:
        raise ParseError(f"expected {count} integers after '{expect_head}', got {len(out)}", no, 1)
    return out


def loads(text: str) -> tuple[BeliefNetwork, Evidence]:
    lines = _Lines(text)
    no, body = lines.next("header")
    if body.split() != MAGIC.split():
        raise ParseError(f"expected header {MAGIC!r}", no, 1)
    no, body = lines.next("vars line")
    (n,) = _ints(no, body, "vars", 1)
    no, body = lines.next("card line")
    cards = _ints(no, body, "card", n)
    if any(c < 2 for c in cards):
        raise ParseError("every cardinality must be at least 2", no, 1)
    no, body = lines.next("factors line")
    (k,) = _ints(no, body, "factors", 1)
    cpts: list[Factor | None] = [None] * n
    parents: list[tuple[int, ...]] = [()] * n
    for idx in range(k):
        no, body = lines.next(f"scope of factor {idx}")
        toks = list(_tokens(body))
        if not toks or toks[0][1] != "scope":
            raise ParseError(f"factor {idx}: expected 'scope'", no, toks[0][0] if toks else 1)
        try:
            s = int(toks[1][1])
            scope = [int(t) for _, t in toks[2 : 2 + s]]
            if toks[2 + s][1] != "child" or len(toks) != 4 + s:
                raise ValueError
            child = int(toks[3 + s][1])
        except (ValueError, IndexError):
            raise ParseError(f"factor {idx}: malformed scope line", no, 1) from None
        if scope != sorted(set(scope)) or any(not 0 <= v < n for v in scope):
            raise ParseError(f"factor {idx}: scope must be ascending distinct variable ids", no, 1)
        if child not in scope:
            raise ParseError(f"factor {idx}: child {child} not in scope", no, 1)
        if cpts[child] is not None:
            raise ParseError(f"factor {idx}: second table for variable {child}", no, 1)
        no, body = lines.next(f"table of factor {idx}")
        values = []
        for col, tok in _tokens(body):
            try:
                values.append(float(tok))
            except ValueError:
                raise ParseError(f"factor {idx}: bad number {tok!r}", no, col) from None
        try:
            cpts[child] = Factor.from_flat(scope, [cards[v] for v in scope], values)
        except ModelError as exc:
            raise ParseError(f"factor {idx}: {exc}", no, 1) from None
        sums = cpts[child].table.sum(axis=scope.index(child))
        if np.max(np.abs(sums - 1.0), initial=0.0) > NORMALIZATION_TOL:
            raise ParseError(f"factor {idx}: table of variable {child} is not normalized", no, 1)
        parents[child] = tuple(v for v in scope if v != child)
    if any(c is None for c in cpts):
        missing = [v for v, c in enumerate(cpts) if c is None]
        raise ParseError(f"no table for variables {missing}", lines.last, 1)
    evidence: Evidence = {}
    meta: dict[str, str] = {}
    while not lines.done():
        no, body = lines.next("section")
        head = body.split()[0]
        if head == "evidence":
            (t,) = _ints(no, body, "evidence", 1)
            for _ in range(t):
                no, body = lines.next("evidence entry")
                toks = list(_tokens(body))
                try:
                    v, x = (int(tok) for _, tok in toks)
                except ValueError:
                    raise ParseError("expected '<var> <value>'", no, 1) from None
                if v in evidence:
                    raise ParseError(f"variable {v} observed twice", no, 1)
                if not (0 <= v < n and 0 <= x < cards[v]):
                    raise ParseError(f"evidence {v}={x} out of range", no, 1)
                evidence[v] = x
        elif head == "meta":
            toks = body.split()[1:]
            if len(toks) % 2:
                raise ParseError("meta needs key/value pairs", no, 1)
            meta.update(zip(toks[::2], toks[1::2]))
        else:
            raise ParseError(f"unknown section {head!r}", no, 1)
    try:
        bn = BeliefNetwork(tuple(cards), tuple(parents), tuple(cpts), meta)
    except ModelError as exc:
        raise ParseError(str(exc), lines.last, 1) from None
    return bn, evidence


def load_network(path) -> tuple[BeliefNetwork, Evidence]:
    with open(path, encoding="ascii") as fh:
        return loads(fh.read())

