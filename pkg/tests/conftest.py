"""Shared fixtures: hand-built networks and random instance helpers."""

import math

import numpy as np
import pytest

from minibucket.factor import Factor
from minibucket.generators import GenSpec, gen_evidence, generate, make_rng
from minibucket.network import BeliefNetwork, moral_graph
from minibucket.ordering import find_ordering

REL = 1e-9
ABS_FLOOR = 1e-300

# Eight-node network with an undirected loop: B=0 C=1 D=2 E=3 F=4 G=5 H=6 I=7
B, C, D, E, F, G, H, I = range(8)
LOOPY8_PARENTS = {I: (G, H), H: (E, F), G: (D, E), F: (B,), E: (B, C), D: (C,), B: (), C: ()}

# turbo-code network: information bits, code fragments, channel outputs
U1, U2, U3, U4 = 0, 1, 2, 3
X1, X2, X3 = 4, 5, 6
Y1, Y2, Y3 = 7, 8, 9
YS1, YS2, YS3, YS4 = 10, 11, 12, 13
TURBO_PARENTS = {
    U1: (), U2: (), U3: (), U4: (),
    X1: (U1, U2, U3, U4), X2: (U1, U2, U3, U4), X3: (U1, U2, U3),
    Y1: (X1,), Y2: (X2,), Y3: (X3,),
    YS1: (U1,), YS2: (U2,), YS3: (U3,), YS4: (U4,),
}


def close(a, b, rel=REL):
    """Relative comparison with an absolute floor for tiny values."""
    return math.isclose(a, b, rel_tol=rel, abs_tol=ABS_FLOOR)


def leq(a, b, rel=REL):
    """``a <= b`` up to the relative tolerance."""
    return a <= b + rel * max(abs(a), abs(b)) + ABS_FLOOR


def random_network(parents: dict, seed: int, card: int = 2) -> BeliefNetwork:
    rng = make_rng(seed)
    n = len(parents)
    plist = [tuple(sorted(parents[v])) for v in range(n)]
    tables = []
    for v in range(n):
        raw = rng.random((card,) * len(plist[v]) + (card,)) + 0.05
        tables.append(raw / raw.sum(axis=-1, keepdims=True))
    return BeliefNetwork.from_tables([card] * n, plist, tables)


def instance(n, e, seed, n_evidence=0, kind="uniform"):
    """A generated network, sampled evidence and a min-fill ordering with evidence last."""
    bn = generate(GenSpec(n, e, kind=kind, seed=seed))
    ev = gen_evidence(bn, n_evidence, "sampled", seed) if n_evidence else {}
    d = find_ordering(moral_graph(bn), last=sorted(ev))
    return bn, ev, d


@pytest.fixture
def loopy8():
    return random_network(LOOPY8_PARENTS, seed=3)


@pytest.fixture
def turbo():
    bn = random_network(TURBO_PARENTS, seed=5)
    evidence = {Y1: 1, Y2: 0, Y3: 1, YS1: 0, YS2: 1, YS3: 1, YS4: 0}
    d = (U4, U3, U2, U1, X3, X2, X1) + tuple(sorted(evidence))
    return bn, evidence, d


@pytest.fixture
def coins():
    """Three independent fair coins."""
    half = np.array([0.5, 0.5])
    return BeliefNetwork.from_tables([2, 2, 2], [(), (), ()], [half, half, half])


@pytest.fixture
def chain():
    """0 -> 1 -> 2 with fixed tables."""
    return BeliefNetwork.from_tables(
        [2, 2, 2],
        [(), (0,), (1,)],
        [np.array([0.6, 0.4]), np.array([[0.7, 0.3], [0.2, 0.8]]), np.array([[0.9, 0.1], [0.5, 0.5]])],
    )


def factor(scope, values, cards=None):
    cards = cards or [2] * len(scope)
    return Factor.from_flat(scope, cards, values)


# ---------------------------------------------------------------- acceptance log

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance():
    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number!s:>2}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
