"""Exhaustive-enumeration reference answers for small networks.

Everything here indexes the CPT arrays directly over the full list of
assignments; none of the factor algebra is used, so these results can check
the elimination code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import BudgetExceededError
from .network import BeliefNetwork


@dataclass(frozen=True)
class OracleBudget:
    max_states: int = 2**20

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be positive")


def _joint_table(bn: BeliefNetwork, evidence, budget: OracleBudget | None) -> np.ndarray:
    budget = budget or OracleBudget()
    states = bn.state_space()
    if states > budget.max_states:
        raise BudgetExceededError(f"{states} states exceed the budget of {budget.max_states}")
    # row r of `grid` is the r-th assignment in lexicographic order (var 0 slowest)
    grid = np.indices(bn.cards).reshape(bn.n, -1).T
    joint = np.ones(len(grid))
    for cpt in bn.cpts:
        strides = np.cumprod((cpt.table.shape[1:] + (1,))[::-1])[::-1]
        flat = grid[:, list(cpt.scope)] @ strides
        joint *= cpt.table.reshape(-1)[flat]
    for v, x in (evidence or {}).items():
        joint[grid[:, v] != x] = 0.0
    return joint.reshape(bn.cards)


def brute_mpe(bn: BeliefNetwork, evidence: Mapping[int, int] | None = None, budget: OracleBudget | None = None):
    """``(value, assignment)``; ties go to the lexicographically smallest tuple."""
    joint = _joint_table(bn, evidence, budget)
    k = int(np.argmax(joint))
    return float(joint.reshape(-1)[k]), tuple(int(x) for x in np.unravel_index(k, joint.shape))


def brute_bel(bn: BeliefNetwork, evidence: Mapping[int, int] | None, query: int, budget: OracleBudget | None = None):
    """``(P(query, e) as an array, P(e))``."""
    joint = _joint_table(bn, evidence, budget)
    axes = tuple(a for a in range(bn.n) if a != query)
    marg = joint.sum(axis=axes)
    return marg, float(marg.sum())


def brute_map(
    bn: BeliefNetwork,
    evidence: Mapping[int, int] | None,
    hyp: Sequence[int],
    budget: OracleBudget | None = None,
):
    """``(max_a sum_rest P(a, rest, e), {var: value})`` over ascending ``hyp``."""
    hyp = sorted(set(hyp))
    joint = _joint_table(bn, evidence, budget)
    rest = tuple(a for a in range(bn.n) if a not in hyp)
    summed = joint.sum(axis=rest) if rest else joint
    if not hyp:
        return float(summed), {}
    k = int(np.argmax(summed))
    values = np.unravel_index(k, summed.shape)
    return float(summed.reshape(-1)[k]), {v: int(x) for v, x in zip(hyp, values)}
