"""Dense factor tables and the algebra used by every elimination routine.

A :class:`Factor` is a nonnegative table over an ascending tuple of variable
ids.  The table is a C-ordered ``numpy`` array whose axis ``k`` belongs to
``scope[k]``, so the last scope variable varies fastest in the flattened
layout.
"""

from __future__ import annotations

import os
from typing import Iterable, Sequence

import numpy as np

from .errors import ModelError, ResourceLimitError

DEFAULT_CELL_CAP = 2**26
ELIMINATION_OPS = ("max", "min", "sum", "mean")


def default_cell_cap() -> int:
    """Cell cap for recorded tables; ``BNET_MEM_CELLS`` overrides the default."""
    raw = os.environ.get("BNET_MEM_CELLS")
    if raw:
        return int(raw)
    return DEFAULT_CELL_CAP


def _c_order(table: np.ndarray) -> np.ndarray:
    # np.ascontiguousarray would turn a 0-d table into shape (1,)
    if table.flags.c_contiguous and table.flags.owndata:
        return table
    return table.copy(order="C")


class Factor:
    """A nonnegative real function over a set of discrete variables."""

    __slots__ = ("scope", "table")

    def __init__(self, scope: Iterable[int], table, *, validate: bool = True):
        scope = tuple(int(v) for v in scope)
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != len(scope):
            raise ModelError(
                f"table has {table.ndim} axes but scope has {len(scope)} variables"
            )
        if len(set(scope)) != len(scope):
            raise ModelError(f"duplicate variable in scope {scope}")
        if any(a > b for a, b in zip(scope, scope[1:])):
            perm = sorted(range(len(scope)), key=scope.__getitem__)
            scope = tuple(scope[k] for k in perm)
            table = np.transpose(table, perm)
        table = table.copy(order="C")  # never freeze the caller's array
        if validate:
            if any(s < 2 for s in table.shape):
                raise ModelError(f"cardinality below 2 in scope {scope}")
            if not np.all(np.isfinite(table)) or np.any(table < 0):
                raise ModelError("factor entries must be finite and nonnegative")
        table.setflags(write=False)
        self.scope = scope
        self.table = table

    @classmethod
    def _trusted(cls, scope: tuple[int, ...], table: np.ndarray) -> "Factor":
        """Wrap a table derived from valid factors; ``scope`` must be ascending."""
        f = cls.__new__(cls)
        table = _c_order(np.asarray(table, dtype=np.float64))
        table.setflags(write=False)
        f.scope = scope
        f.table = table
        return f

    @classmethod
    def from_flat(cls, scope: Sequence[int], cards: Sequence[int], values) -> "Factor":
        """Build from a flat, last-variable-fastest value list in ascending scope order."""
        scope = tuple(scope)
        if list(scope) != sorted(scope):
            raise ModelError("flat tables require an ascending scope")
        values = np.asarray(values, dtype=np.float64)
        expected = int(np.prod(cards, dtype=np.int64)) if cards else 1
        if values.size != expected:
            raise ModelError(
                f"table has {values.size} entries, scope {scope} needs {expected}"
            )
        return cls(scope, values.reshape(tuple(cards)))

    @classmethod
    def constant(cls, value: float) -> "Factor":
        return cls((), np.float64(value))

    @property
    def cards(self) -> tuple[int, ...]:
        return self.table.shape

    @property
    def size(self) -> int:
        return self.table.size

    @property
    def arity(self) -> int:
        return len(self.scope)

    def card_of(self, var: int) -> int:
        return self.table.shape[self.scope.index(var)]

    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def value(self, assignment) -> float:
        """Evaluate at an assignment given as a mapping or a full sequence."""
        return float(self.table[tuple(assignment[v] for v in self.scope)])

    def __repr__(self):
        return f"Factor(scope={self.scope}, cards={self.cards})"

    def __eq__(self, other):
        if not isinstance(other, Factor):
            return NotImplemented
        return self.scope == other.scope and np.array_equal(self.table, other.table)

    __hash__ = None


def _union_scope(factors: Sequence[Factor]) -> tuple[tuple[int, ...], dict[int, int]]:
    cards: dict[int, int] = {}
    for f in factors:
        for v, c in zip(f.scope, f.cards):
            if cards.setdefault(v, c) != c:
                raise ModelError(f"variable {v} has cardinality {cards[v]} and {c}")
    return tuple(sorted(cards)), cards


def product_cells(factors: Sequence[Factor]) -> int:
    scope, cards = _union_scope(factors)
    return int(np.prod([cards[v] for v in scope], dtype=np.int64)) if scope else 1


def _expand(f: Factor, scope: tuple[int, ...]) -> np.ndarray:
    # both scopes are ascending, so inserting singleton axes keeps axis order
    shape = []
    k = 0
    for v in scope:
        if k < len(f.scope) and f.scope[k] == v:
            shape.append(f.table.shape[k])
            k += 1
        else:
            shape.append(1)
    return f.table.reshape(shape)


def multiply(factors: Iterable[Factor], cap: int | None = None) -> Factor:
    """Pointwise product over the union of the input scopes.

    Raises :class:`ResourceLimitError` when the result would hold more than
    ``cap`` cells.
    """
    factors = list(factors)
    if not factors:
        return Factor.constant(1.0)
    scope, cards = _union_scope(factors)
    if cap is not None:
        cells = int(np.prod([cards[v] for v in scope], dtype=np.int64)) if scope else 1
        if cells > cap:
            raise ResourceLimitError(
                f"product over {len(scope)} variables needs {cells} cells (cap {cap})",
                cells=cells,
                cap=cap,
            )
    if len(factors) == 1:
        return factors[0]
    out = _expand(factors[0], scope)
    for f in factors[1:]:
        out = out * _expand(f, scope)
    out = np.broadcast_to(out, tuple(cards[v] for v in scope))
    return Factor._trusted(scope, out)


def eliminate(f: Factor, variables, op: str) -> Factor:
    """Remove ``variables`` (an id or an iterable of ids) from ``f`` with ``op``.

    ``op`` is one of ``max``, ``min``, ``sum`` or ``mean``; ``mean`` divides the
    sum by the product of the eliminated cardinalities.
    """
    if isinstance(variables, (int, np.integer)):
        variables = (int(variables),)
    variables = tuple(variables)
    missing = [v for v in variables if v not in f.scope]
    if missing:
        raise ModelError(f"variables {missing} not in scope {f.scope}")
    if op not in ELIMINATION_OPS:
        raise ValueError(f"unknown elimination op {op!r}")
    axes = tuple(f.scope.index(v) for v in variables)
    if op == "max":
        table = f.table.max(axis=axes)
    elif op == "min":
        table = f.table.min(axis=axes)
    elif op == "sum":
        table = f.table.sum(axis=axes)
    else:
        table = f.table.mean(axis=axes)
    scope = tuple(v for v in f.scope if v not in variables)
    return Factor._trusted(scope, table)


def restrict(f: Factor, var: int, value: int) -> Factor:
    """Slice ``f`` at ``var = value`` and drop ``var`` from the scope."""
    if var not in f.scope:
        raise ModelError(f"variable {var} not in scope {f.scope}")
    axis = f.scope.index(var)
    card = f.table.shape[axis]
    if not 0 <= value < card:
        raise ModelError(f"value {value} out of range for variable {var} (card {card})")
    table = np.take(f.table, value, axis=axis)
    return Factor._trusted(f.scope[:axis] + f.scope[axis + 1 :], table)


def restrict_many(f: Factor, assignment) -> Factor:
    """Restrict every variable of ``f`` that ``assignment`` (a mapping) fixes."""
    index = []
    scope = []
    for v, c in zip(f.scope, f.table.shape):
        x = assignment.get(v)
        if x is None:
            index.append(slice(None))
            scope.append(v)
        elif 0 <= x < c:
            index.append(x)
        else:
            raise ModelError(f"value {x} out of range for variable {v} (card {c})")
    if len(scope) == len(f.scope):
        return f
    return Factor._trusted(tuple(scope), f.table[tuple(index)])
